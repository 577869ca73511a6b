#include "tensorcore/moa.hpp"

#include <sstream>

namespace tc {

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  for (auto d : dims_) {
    if (d == 0) throw std::invalid_argument("shape dimensions must be positive");
  }
}

std::size_t Shape::count() const {
  std::size_t n = 1;
  for (auto d : dims_) n *= d;
  return n;
}

std::string Shape::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
  os << ')';
  return os.str();
}

std::size_t gamma(const MultiIndex& idx, const Shape& shape) {
  if (idx.size() != shape.rank()) throw std::out_of_range("gamma: index rank does not match shape rank");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    if (idx[a] >= shape[a]) throw std::out_of_range("gamma: index out of bounds on axis " + std::to_string(a));
    flat = flat * shape[a] + idx[a];
  }
  return flat;
}

MultiIndex gamma_inverse(std::size_t offset, const Shape& shape) {
  if (offset >= shape.count()) throw std::out_of_range("gamma_inverse: offset out of bounds");
  MultiIndex idx(shape.rank());
  for (std::size_t a = shape.rank(); a-- > 0;) {
    idx[a] = offset % shape[a];
    offset /= shape[a];
  }
  return idx;
}

Shape lift_shape(const Shape& shape, std::size_t axis, std::size_t block) {
  if (axis >= shape.rank()) throw std::invalid_argument("lift: axis out of range");
  if (block == 0 || shape[axis] % block != 0) {
    throw std::invalid_argument("lift: block " + std::to_string(block) + " does not divide extent " +
                                std::to_string(shape[axis]));
  }
  std::vector<std::size_t> dims = shape.dims();
  dims[axis] /= block;
  dims.insert(dims.begin() + static_cast<std::ptrdiff_t>(axis) + 1, block);
  return Shape(std::move(dims));
}

Shape flatten_shape(const Shape& shape, std::size_t axis) {
  if (axis + 1 >= shape.rank()) throw std::invalid_argument("flatten: axis out of range");
  std::vector<std::size_t> dims = shape.dims();
  dims[axis] *= dims[axis + 1];
  dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(axis) + 1);
  return Shape(std::move(dims));
}

}  // namespace tc
