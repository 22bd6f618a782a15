#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "sbsim/bits.hpp"

namespace sbsim {

/// Immutable integer tensor with a declared 8- or 16-bit signed width.
///
/// Elements are stored row-major. Every element is range-checked against the
/// declared width when the tensor is built, so downstream code can rely on it.
class FixedTensor {
 public:
  FixedTensor() = default;

  /// Throws ValidationError if the dims do not match the data length or any
  /// element falls outside [-2^(w-1), 2^(w-1)-1].
  FixedTensor(std::vector<std::size_t> dims, Precision bitwidth, std::vector<std::int32_t> data);

  /// Same checks, but takes ownership of already-narrowed storage.
  static FixedTensor adopt(std::vector<std::size_t> dims, Precision bitwidth,
                           std::vector<std::int16_t> data);

  static FixedTensor zeros(std::vector<std::size_t> dims, Precision bitwidth);

  const std::vector<std::size_t>& dims() const { return dims_; }
  Precision bitwidth() const { return bitwidth_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::span<const std::int16_t> values() const { return data_; }

  std::int32_t operator[](std::size_t i) const { return data_[i]; }
  std::int32_t at(std::initializer_list<std::size_t> index) const;
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  std::vector<std::int32_t> to_vector() const;

  bool operator==(const FixedTensor& other) const = default;

 private:
  std::vector<std::size_t> dims_;
  Precision bitwidth_ = Precision::Int16;
  std::vector<std::int16_t> data_;
};

std::size_t element_count(std::span<const std::size_t> dims);
std::string dims_to_string(std::span<const std::size_t> dims);

// FNV-1a over dims, width and element bytes; used to compare OFMs cheaply.
std::uint64_t tensor_hash(const FixedTensor& t);

}  // namespace sbsim
