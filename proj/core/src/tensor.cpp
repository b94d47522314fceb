#include "ccsp/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ccsp/error.hpp"

namespace ccsp::ad {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) { return fmt::format("({})", fmt::join(shape, "x")); }

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    throw_invalid(fmt::format("Tensor: shape {} needs {} values, got {}", shape_string(shape_),
                              shape_size(shape_), data_.size()));
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw_invalid(fmt::format("Tensor: axis {} out of range for shape {}", axis, shape_string(shape_)));
  }
  return shape_[axis];
}

double Tensor::item() const {
  if (data_.size() != 1) throw_invalid(fmt::format("Tensor::item on shape {}", shape_string(shape_)));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw_invalid(fmt::format("Tensor: cannot reshape {} to {}", shape_string(shape_), shape_string(shape)));
  }
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const { return first_non_finite() == data_.size(); }

std::size_t Tensor::first_non_finite() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) return i;
  }
  return data_.size();
}

}  // namespace ccsp::ad
