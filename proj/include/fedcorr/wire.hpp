#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedcorr/compressors.hpp"

// Binary client-to-server record: a 1-byte payload tag followed by
// little-endian u32 dimensions and little-endian IEEE-754 f64 payloads.
// The exact layout is documented in docs/wire-format.md; encoder and
// decoder here are the reference implementation for both endpoints.

namespace fedcorr::wire {

enum class Tag : std::uint8_t {
  kRaw = 0,
  kSubspaceCoeffs = 1,
  kPcaSlices = 2,
  kLowRankDiag = 3,
  kPredictive = 4,
};

std::vector<std::uint8_t> serialize(const CompressedUpdate& update);

// Throws ParseError on unknown tags, truncated buffers, or trailing
// bytes.
CompressedUpdate deserialize(std::span<const std::uint8_t> bytes);

}  // namespace fedcorr::wire
