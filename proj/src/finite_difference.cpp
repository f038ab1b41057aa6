#include "kahler_lens/finite_difference.hpp"

#include <cmath>
#include <limits>

namespace kahler::fd {

double first_derivative_step(double scale) {
  return std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 5.0) * scale;
}

double second_derivative_step(double scale) {
  return std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0) * scale;
}

}  // namespace kahler::fd
