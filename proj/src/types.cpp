#include "kahler_lens/types.hpp"

#include <algorithm>
#include <cmath>

namespace kahler {

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

double Tensor4::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Box::contains(const Vector& p, double margin) const {
  if (p.size() != lower.size()) return false;
  for (int i = 0; i < p.size(); ++i) {
    if (!(p[i] >= lower[i] + margin && p[i] <= upper[i] - margin)) return false;
  }
  return true;
}

}  // namespace kahler
