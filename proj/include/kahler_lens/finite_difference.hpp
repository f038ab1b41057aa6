#pragma once

// Central-difference stencils shared by every module. The value type only
// needs +, - and multiplication by double (double, Eigen objects, Tensor3).

#include <type_traits>

#include "kahler_lens/types.hpp"

namespace kahler::fd {

/// ∂_k f(x) by central differences of order 2 or 4.
template <class Fn>
auto partial(Fn&& f, const Vector& x, int k, double h, int order = 4) {
  using Value = std::decay_t<decltype(f(x))>;
  auto at = [&](double t) -> Value {
    Vector y = x;
    y[k] += t;
    return f(y);
  };
  if (order == 2) {
    Value r = (at(h) - at(-h)) * (1.0 / (2.0 * h));
    return r;
  }
  Value r = (at(-2 * h) - at(2 * h) + 8.0 * (at(h) - at(-h))) * (1.0 / (12.0 * h));
  return r;
}

/// ∂_k ∂_k f(x), order 2 or 4.
template <class Fn>
auto second_partial(Fn&& f, const Vector& x, int k, double h, int order = 4) {
  using Value = std::decay_t<decltype(f(x))>;
  auto at = [&](double t) -> Value {
    Vector y = x;
    y[k] += t;
    return f(y);
  };
  const Value f0 = at(0.0);
  if (order == 2) {
    Value r = (at(h) + at(-h) - 2.0 * f0) * (1.0 / (h * h));
    return r;
  }
  Value r = (16.0 * (at(h) + at(-h)) - (at(2 * h) + at(-2 * h)) - 30.0 * f0) *
            (1.0 / (12.0 * h * h));
  return r;
}

/// Stencil half-width in units of h.
inline int reach(int order) { return order == 2 ? 1 : 2; }

/// Machine-epsilon based steps (scale-free), for first and second derivatives.
double first_derivative_step(double scale = 1.0);
double second_derivative_step(double scale = 1.0);

}  // namespace kahler::fd
