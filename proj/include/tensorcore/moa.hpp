#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tc {

/// Dimension vector of a dense array. The empty shape is a scalar.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  std::size_t rank() const { return dims_.size(); }
  std::size_t count() const;
  std::size_t operator[](std::size_t axis) const { return dims_.at(axis); }
  const std::vector<std::size_t>& dims() const { return dims_; }

  std::string to_string() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> dims_;
};

using MultiIndex = std::vector<std::size_t>;

/// Row-major ravel: ((i0*d1 + i1)*d2 + i2)... Throws std::out_of_range.
std::size_t gamma(const MultiIndex& idx, const Shape& shape);
/// Inverse of gamma.
MultiIndex gamma_inverse(std::size_t offset, const Shape& shape);

/// Flat row-major storage plus a shape; multidimensionality exists only through gamma.
template <class T>
class DenseArray {
 public:
  using value_type = T;

  DenseArray() = default;
  DenseArray(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.count()) {
      throw std::invalid_argument("array data length " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_.to_string());
    }
  }
  DenseArray(Shape shape, const T& fill) : shape_(std::move(shape)), data_(shape_.count(), fill) {}

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  const T& operator[](std::size_t flat) const { return data_[flat]; }
  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& at(const MultiIndex& idx) const { return data_[gamma(idx, shape_)]; }
  T& at(const MultiIndex& idx) { return data_[gamma(idx, shape_)]; }

  friend bool operator==(const DenseArray&, const DenseArray&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

/// Subarray selected by a prefix index (the contiguous trailing block).
template <class T>
DenseArray<T> psi(const MultiIndex& prefix, const DenseArray<T>& a) {
  const auto& dims = a.shape().dims();
  if (prefix.size() > dims.size()) throw std::invalid_argument("psi: prefix longer than array rank");
  MultiIndex full(dims.size(), 0);
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] >= dims[i]) throw std::out_of_range("psi: prefix index out of bounds");
    full[i] = prefix[i];
  }
  Shape rest(std::vector<std::size_t>(dims.begin() + static_cast<std::ptrdiff_t>(prefix.size()), dims.end()));
  const std::size_t start = a.size() == 0 ? 0 : gamma(full, a.shape());
  std::vector<T> data(a.data().begin() + static_cast<std::ptrdiff_t>(start),
                      a.data().begin() + static_cast<std::ptrdiff_t>(start + rest.count()));
  return DenseArray<T>(std::move(rest), std::move(data));
}

Shape lift_shape(const Shape& shape, std::size_t axis, std::size_t block);
Shape flatten_shape(const Shape& shape, std::size_t axis);

/// Dimension lifting: splits dims[axis] into (dims[axis] / block, block).
///
/// Under row-major gamma an axis split never moves data, so this is a pure
/// reinterpretation; use permute_axes to make blocks contiguous.
template <class T>
DenseArray<T> lift(const DenseArray<T>& a, std::size_t axis, std::size_t block) {
  return DenseArray<T>(lift_shape(a.shape(), axis, block), a.data());
}

/// Inverse of lift: merges axes `axis` and `axis + 1`.
template <class T>
DenseArray<T> flatten(const DenseArray<T>& a, std::size_t axis) {
  return DenseArray<T>(flatten_shape(a.shape(), axis), a.data());
}

/// Physical transpose: result axis r is source axis order[r].
template <class T>
DenseArray<T> permute_axes(const DenseArray<T>& a, const std::vector<std::size_t>& order) {
  const auto& dims = a.shape().dims();
  if (order.size() != dims.size()) throw std::invalid_argument("permute_axes: order rank mismatch");
  std::vector<bool> seen(dims.size(), false);
  std::vector<std::size_t> out_dims(dims.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (order[r] >= dims.size() || seen[order[r]]) throw std::invalid_argument("permute_axes: not a permutation");
    seen[order[r]] = true;
    out_dims[r] = dims[order[r]];
  }
  Shape out_shape(out_dims);
  std::vector<T> out;
  out.reserve(a.size());
  MultiIndex src(dims.size());
  for (std::size_t flat = 0; flat < a.size(); ++flat) {
    const MultiIndex dst = gamma_inverse(flat, out_shape);
    for (std::size_t r = 0; r < order.size(); ++r) src[order[r]] = dst[r];
    out.push_back(a.at(src));
  }
  return DenseArray<T>(std::move(out_shape), std::move(out));
}

/// Tiles a matrix into contiguous (rows x cols) blocks: shape
/// (R/rows, C/cols, rows, cols), blocks in row-major block order.
template <class T>
DenseArray<T> block_layout(const DenseArray<T>& m, std::size_t rows, std::size_t cols) {
  if (m.shape().rank() != 2) throw std::invalid_argument("block_layout: expected a matrix");
  return permute_axes(lift(lift(m, 0, rows), 2, cols), {0, 2, 1, 3});
}

/// Inverse of block_layout.
template <class T>
DenseArray<T> unblock_layout(const DenseArray<T>& b) {
  if (b.shape().rank() != 4) throw std::invalid_argument("unblock_layout: expected a rank-4 blocked array");
  const auto back = permute_axes(b, {0, 2, 1, 3});
  return flatten(flatten(back, 2), 0);
}

}  // namespace tc
