#include "hqfl/tensor.hpp"

#include <cmath>
#include <sstream>

#include "hqfl/errors.hpp"

namespace hqfl {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape_in)
    : shape(std::move(shape_in)), data(shape_product(shape), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
  if (shape_product(shape) != data.size()) {
    throw ConfigError("Tensor: shape " + shape_str() + " does not match data length " +
                      std::to_string(data.size()));
  }
}

Tensor Tensor::zeros_like(const Tensor& other) { return Tensor(other.shape); }

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

void check_finite(const Tensor& t, const char* context) {
  for (double v : t.data) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value in ") + context);
    }
  }
}

double l2_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data) s += v * v;
  return std::sqrt(s);
}

void axpy(double alpha, const Tensor& x, Tensor& y) {
  if (!x.same_shape(y)) {
    throw InputError("axpy: shape mismatch " + x.shape_str() + " vs " + y.shape_str());
  }
  for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] += alpha * x.data[i];
}

}  // namespace hqfl
