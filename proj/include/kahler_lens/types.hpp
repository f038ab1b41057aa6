#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kahler {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr Complex kI{0.0, 1.0};

// Errors ---------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point outside the validity region of a chart, or a stencil leaving it.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// dF lost rank at the requested point.
class DegenerateImmersionError : public Error {
 public:
  DegenerateImmersionError(const std::string& what, double singular_value)
      : Error(what), singular_value_(singular_value) {}
  double singular_value() const { return singular_value_; }

 private:
  double singular_value_;
};

/// Some Kähler angle is zero (cos = 1) where the operation needs sin > 0.
class ComplexDirectionError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Spectrum not suited to the request (equal cosines where a split is needed,
/// pairing failure of the doubled singular values).
class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

/// A smooth frame could not be continued across the stencil.
class FrameContinuationError : public Error {
 public:
  using Error::Error;
};

class UnknownIdError : public Error {
 public:
  using Error::Error;
};

class CertificationError : public Error {
 public:
  CertificationError(const std::string& what, std::string property)
      : Error(what), property_(std::move(property)) {}
  const std::string& property() const { return property_; }

 private:
  std::string property_;
};

// Small dense tensors ----------------------------------------------------------

/// Rank-3 real array, row-major in (i, j, k).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d0, int d1, int d2)
      : d_{d0, d1, d2}, data_(static_cast<std::size_t>(d0) * d1 * d2, 0.0) {}

  int dim(int axis) const { return d_[axis]; }
  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double max_abs() const;
  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s);

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * d_[1] + j) * d_[2] + k;
  }
  int d_[3] = {0, 0, 0};
  std::vector<double> data_;
};

inline Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
inline Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
inline Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
inline Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

/// Rank-4 real array, all axes of equal length.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n)
      : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int dim() const { return n_; }
  double& operator()(int a, int b, int c, int d) { return data_[index(a, b, c, d)]; }
  double operator()(int a, int b, int c, int d) const { return data_[index(a, b, c, d)]; }
  const std::vector<double>& data() const { return data_; }

  double max_abs() const;

 private:
  std::size_t index(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * n_ + b) * n_ + c) * n_ + d;
  }
  int n_ = 0;
  std::vector<double> data_;
};

/// Axis-aligned box in chart coordinates.
struct Box {
  Vector lower;
  Vector upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vector& p, double margin = 0.0) const;
};

}  // namespace kahler
