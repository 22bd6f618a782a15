#include "sbsim/tensor.hpp"

#include <sstream>

#include "sbsim/error.hpp"

namespace sbsim {

std::size_t element_count(std::span<const std::size_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::string dims_to_string(std::span<const std::size_t> dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ']';
  return os.str();
}

namespace {

void check_shape(const std::vector<std::size_t>& dims, std::size_t length) {
  if (dims.empty()) throw ValidationError("tensor needs at least one dimension");
  if (element_count(dims) != length) {
    throw ValidationError("tensor dims " + dims_to_string(dims) + " do not match data length " +
                          std::to_string(length));
  }
}

}  // namespace

FixedTensor::FixedTensor(std::vector<std::size_t> dims, Precision bitwidth,
                         std::vector<std::int32_t> data)
    : dims_(std::move(dims)), bitwidth_(bitwidth) {
  check_shape(dims_, data.size());
  const int bits = bits_of(bitwidth_);
  data_.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!fits_signed(data[i], bits)) {
      throw ValidationError("element " + std::to_string(i) + " = " + std::to_string(data[i]) +
                            " does not fit " + std::to_string(bits) + "-bit signed");
    }
    data_[i] = static_cast<std::int16_t>(data[i]);
  }
}

FixedTensor FixedTensor::adopt(std::vector<std::size_t> dims, Precision bitwidth,
                               std::vector<std::int16_t> data) {
  check_shape(dims, data.size());
  if (bitwidth == Precision::Int8) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!fits_signed(data[i], 8)) {
        throw ValidationError("element " + std::to_string(i) + " = " + std::to_string(data[i]) +
                              " does not fit 8-bit signed");
      }
    }
  }
  FixedTensor t;
  t.dims_ = std::move(dims);
  t.bitwidth_ = bitwidth;
  t.data_ = std::move(data);
  return t;
}

FixedTensor FixedTensor::zeros(std::vector<std::size_t> dims, Precision bitwidth) {
  const auto n = element_count(dims);
  return adopt(std::move(dims), bitwidth, std::vector<std::int16_t>(n, 0));
}

std::size_t FixedTensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != dims_.size()) throw ValidationError("index rank mismatch");
  std::size_t off = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= dims_[axis]) throw ValidationError("index out of range");
    off = off * dims_[axis] + i;
    ++axis;
  }
  return off;
}

std::int32_t FixedTensor::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(index)];
}

std::vector<std::int32_t> FixedTensor::to_vector() const {
  return {data_.begin(), data_.end()};
}

std::uint64_t tensor_hash(const FixedTensor& t) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 1099511628211ull;
  };
  for (auto d : t.dims()) {
    for (int k = 0; k < 8; ++k) mix((d >> (8 * k)) & 0xff);
  }
  mix(static_cast<std::uint64_t>(bits_of(t.bitwidth())));
  for (auto v : t.values()) {
    const auto u = static_cast<std::uint16_t>(v);
    mix(u & 0xff);
    mix(u >> 8);
  }
  return h;
}

}  // namespace sbsim
