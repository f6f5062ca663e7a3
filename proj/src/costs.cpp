#include "fedcorr/costs.hpp"

#include <cmath>
#include <numbers>

#include "fedcorr/error.hpp"

namespace fedcorr {

std::size_t breakeven_rounds(std::size_t m, std::size_t r) {
  if (r == 0) throw InvalidInput("breakeven: r must be positive");
  if (r >= m)
    throw InvalidInput("breakeven: r >= m never amortizes the basis");
  // Strict inequality: the threshold itself is not enough.
  return (m * r) / (m - r) + 1;
}

namespace {

std::optional<std::size_t> horizon_for(double c, double arc) {
  if (!(c > 0.0 && c <= 1.0))
    throw InvalidInput("horizon: cosine bound must lie in (0, 1]");
  if (c == 1.0) return std::nullopt;  // zero angle, unbounded reuse
  const double theta = std::acos(c);
  // Guard against results like 8*(1 - eps) flooring one short when the
  // angle is an exact divisor.
  return static_cast<std::size_t>(std::floor(arc / theta + 1e-9));
}

}  // namespace

std::optional<std::size_t> reuse_horizon(double c) {
  return horizon_for(c, 2.0 * std::numbers::pi);
}

std::optional<std::size_t> reuse_horizon_quarter(double c) {
  return horizon_for(c, 0.5 * std::numbers::pi);
}

}  // namespace fedcorr
