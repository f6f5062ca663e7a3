#pragma once

#include <cstddef>
#include <optional>

namespace fedcorr {

// Smallest j for which reusing an m x r basis over j rounds transmits
// fewer elements than sending raw slices: m*r + r*j < j*m, i.e. the
// strict integer j > m*r/(m-r). Requires 0 < r < m.
std::size_t breakeven_rounds(std::size_t m, std::size_t r);

// Reuse horizon floor(2*pi / arccos(c)) for a per-round cosine lower
// bound c in (0, 1]; c == 1 has no bound (nullopt).
std::optional<std::size_t> reuse_horizon(double c);

// Conservative alternate that keeps the accumulated angle below pi/2,
// where the cosine stays positive: floor(pi / (2 * arccos(c))).
std::optional<std::size_t> reuse_horizon_quarter(double c);

}  // namespace fedcorr
