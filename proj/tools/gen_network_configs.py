#!/usr/bin/env python3
"""Writes the bundled network configs under configs/networks/.

Shapes are pre-padded: a 3x3 "same" convolution on a 56x56 map is written as
h_i = 58. Residual adds, upsampling and max-pool branches are not modeled;
layers fed by something other than the preceding layer carry "branch": true.
"""

import json
import pathlib
import sys

OUT = pathlib.Path(__file__).resolve().parent.parent / "configs" / "networks"


class Net:
    def __init__(self, name, channels, size, n_nzb_max=3):
        self.name = name
        self.input = [channels, size, size]
        self.n_nzb_max = n_nzb_max
        self.layers = []

    def conv(self, name, n_ic, n_oc, size, k, stride=1, pad=0, relu=True, pool=None, branch=False):
        layer = {
            "name": name,
            "kind": "conv",
            "n_ic": n_ic,
            "n_oc": n_oc,
            "h_i": size + 2 * pad,
            "h_k": k,
            "stride": stride,
            "post_relu": relu,
        }
        if pool:
            layer["pool"] = {"window": pool[0], "stride": pool[1]}
        if branch:
            layer["branch"] = True
        self.layers.append(layer)
        out = (size + 2 * pad - k) // stride + 1
        if pool:
            out = (out - pool[0]) // pool[1] + 1
        return out

    def fc(self, name, n_ic, n_oc, relu=True, branch=False):
        layer = {"name": name, "kind": "fc", "n_ic": n_ic, "n_oc": n_oc, "post_relu": relu}
        if branch:
            layer["branch"] = True
        self.layers.append(layer)

    def dump(self):
        return {
            "name": self.name,
            "precision": 16,
            "n_nzb_max": self.n_nzb_max,
            "input": self.input,
            "layers": self.layers,
        }


def smoke():
    n = Net("smoke", 4, 10)
    n.conv("conv1", 4, 8, 10, 3, pool=(2, 2))
    n.fc("fc1", 8 * 4 * 4, 10, relu=False)
    return n


def alexnet():
    n = Net("alexnet", 3, 227)
    s = n.conv("conv1", 3, 96, 227, 11, stride=4, pool=(3, 2))
    s = n.conv("conv2", 96, 256, s, 5, pad=2, pool=(3, 2))
    s = n.conv("conv3", 256, 384, s, 3, pad=1)
    s = n.conv("conv4", 384, 384, s, 3, pad=1)
    s = n.conv("conv5", 384, 256, s, 3, pad=1, pool=(3, 2))
    n.fc("fc6", 256 * s * s, 4096)
    n.fc("fc7", 4096, 4096)
    n.fc("fc8", 4096, 1000, relu=False)
    return n


def vgg16():
    n = Net("vgg16", 3, 224)
    s, c = 224, 3
    for stage, (width, reps) in enumerate([(64, 2), (128, 2), (256, 3), (512, 3), (512, 3)], start=1):
        for r in range(1, reps + 1):
            pool = (2, 2) if r == reps else None
            s = n.conv(f"conv{stage}_{r}", c, width, s, 3, pad=1, pool=pool)
            c = width
    n.fc("fc6", c * s * s, 4096)
    n.fc("fc7", 4096, 4096)
    n.fc("fc8", 4096, 1000, relu=False)
    return n


def resnet50():
    # The padded 3x3/2 stem pool is a 2x2/2 pool here and the global average
    # pool is a 7x7 max-pool on the last layer.
    n = Net("resnet50", 3, 224)
    s = n.conv("conv1", 3, 64, 224, 7, stride=2, pad=3, pool=(2, 2))
    c = 64
    stages = [(64, 256, 3, 1), (128, 512, 4, 2), (256, 1024, 6, 2), (512, 2048, 3, 2)]
    for si, (mid, out, blocks, first_stride) in enumerate(stages, start=2):
        for b in range(1, blocks + 1):
            stride = first_stride if b == 1 else 1
            tag = f"res{si}{chr(ord('a') + b - 1)}"
            last = si == 5 and b == blocks
            n.conv(f"{tag}_1x1a", c, mid, s, 1)
            t = n.conv(f"{tag}_3x3", mid, mid, s, 3, stride=stride, pad=1)
            n.conv(f"{tag}_1x1b", mid, out, t, 1, relu=False, pool=(7, 7) if last else None)
            if b == 1:
                n.conv(f"{tag}_proj", c, out, s, 1, stride=stride, relu=False, branch=True)
            s, c = t, out
    n.fc("fc", 2048, 1000, relu=False)
    return n


def googlenet():
    # 3x3/2 padded pools become 2x2/2; pools after a concat are applied to
    # every branch's final layer (max-pool is per channel). The pool-projection
    # branch keeps only its 1x1 conv.
    n = Net("googlenet", 3, 224)
    s = n.conv("conv1", 3, 64, 224, 7, stride=2, pad=3, pool=(2, 2))
    s = n.conv("conv2_reduce", 64, 64, s, 1)
    s = n.conv("conv2", 64, 192, s, 3, pad=1, pool=(2, 2))
    c = 192
    blocks = [
        ("3a", 64, 96, 128, 16, 32, 32, None),
        ("3b", 128, 128, 192, 32, 96, 64, (2, 2)),
        ("4a", 192, 96, 208, 16, 48, 64, None),
        ("4b", 160, 112, 224, 24, 64, 64, None),
        ("4c", 128, 128, 256, 24, 64, 64, None),
        ("4d", 112, 144, 288, 32, 64, 64, None),
        ("4e", 256, 160, 320, 32, 128, 128, (2, 2)),
        ("5a", 256, 160, 320, 32, 128, 128, None),
        ("5b", 384, 192, 384, 48, 128, 128, (7, 7)),
    ]
    first = True
    for tag, b1, r3, b3, r5, b5, bp, pool in blocks:
        p = f"inc{tag}"
        out = n.conv(f"{p}_1x1", c, b1, s, 1, pool=pool, branch=not first)
        first = False
        n.conv(f"{p}_3x3_reduce", c, r3, s, 1, branch=True)
        n.conv(f"{p}_3x3", r3, b3, s, 3, pad=1, pool=pool)
        n.conv(f"{p}_5x5_reduce", c, r5, s, 1, branch=True)
        n.conv(f"{p}_5x5", r5, b5, s, 5, pad=2, pool=pool)
        n.conv(f"{p}_pool_proj", c, bp, s, 1, pool=pool, branch=True)
        s, c = out, b1 + b3 + b5 + bp
    n.fc("fc", c * s * s, 1000, relu=False, branch=True)
    return n


def yolov3():
    # Darknet-53 backbone plus the three detection heads at 416x416. Leaky
    # ReLU is modeled as ReLU; residual adds and upsampling are not modeled.
    n = Net("yolov3", 3, 416)
    s = n.conv("conv0", 3, 32, 416, 3, pad=1)
    c = 32
    idx = 1
    for width, reps in [(64, 1), (128, 2), (256, 8), (512, 8), (1024, 4)]:
        s = n.conv(f"conv{idx}", c, width, s, 3, stride=2, pad=1)
        idx += 1
        c = width
        for _ in range(reps):
            n.conv(f"conv{idx}", c, c // 2, s, 1)
            n.conv(f"conv{idx + 1}", c // 2, c, s, 3, pad=1)
            idx += 2

    def head(tag, n_in, width, size, branch):
        nonlocal idx
        n.conv(f"{tag}_conv{idx}", n_in, width, size, 1, branch=branch)
        n.conv(f"{tag}_conv{idx + 1}", width, width * 2, size, 3, pad=1)
        n.conv(f"{tag}_conv{idx + 2}", width * 2, width, size, 1)
        n.conv(f"{tag}_conv{idx + 3}", width, width * 2, size, 3, pad=1)
        n.conv(f"{tag}_conv{idx + 4}", width * 2, width, size, 1)
        n.conv(f"{tag}_conv{idx + 5}", width, width * 2, size, 3, pad=1)
        n.conv(f"{tag}_detect", width * 2, 255, size, 1, relu=False)
        idx += 6

    head("head13", 1024, 512, 13, False)
    n.conv(f"route13_conv{idx}", 512, 256, 13, 1, branch=True)
    idx += 1
    head("head26", 256 + 512, 256, 26, True)
    n.conv(f"route26_conv{idx}", 256, 128, 26, 1, branch=True)
    idx += 1
    head("head52", 128 + 256, 128, 52, True)
    return n


def main(argv):
    out = pathlib.Path(argv[1]) if len(argv) > 1 else OUT
    out.mkdir(parents=True, exist_ok=True)
    for build in (smoke, alexnet, vgg16, resnet50, googlenet, yolov3):
        net = build()
        path = out / f"{net.name}.json"
        path.write_text(json.dumps(net.dump(), indent=1) + "\n")
        print(f"{path}: {len(net.layers)} layers")


if __name__ == "__main__":
    main(sys.argv)
