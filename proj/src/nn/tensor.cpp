#include "lesion/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "lesion/error.hpp"

namespace lesion::nn {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_))
    fail(ErrorKind::ShapeMismatch, "tensor data length " + std::to_string(data_.size()) +
                                       " does not match shape " + to_string(shape_));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (element_count(shape) != data_.size())
    fail(ErrorKind::ShapeMismatch, "cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

}  // namespace lesion::nn
