#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hqfl {

/// Dense row-major tensor of doubles. Shape product always equals the data
/// length; this is checked at construction.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape_in);
  Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in);

  static Tensor zeros_like(const Tensor& other);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  std::string shape_str() const;
};

/// Throws NumericError if any element is NaN or infinite.
void check_finite(const Tensor& t, const char* context);

/// L2 norm over all elements.
double l2_norm(const Tensor& t);

/// y += alpha * x (shapes must agree).
void axpy(double alpha, const Tensor& x, Tensor& y);

std::size_t shape_product(const std::vector<std::size_t>& shape);

}  // namespace hqfl
