#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedcorr/matrix.hpp"

namespace fedcorr {

// Dense feature/label pairs. Labels are stored as reals so the same
// container serves classification (integral values, e.g. -1/+1 or
// 0..C-1) and regression targets.
struct LabeledDataset {
  std::vector<ParamVector> features;
  std::vector<double> labels;
  std::size_t feature_dim = 0;

  std::size_t size() const { return features.size(); }
  int label_as_int(std::size_t i) const {
    return static_cast<int>(labels[i]);
  }
};

// LIBSVM text format: "label idx:val idx:val ..." with 1-based strictly
// ascending indices. Rows are densified to feature_dim entries;
// unspecified positions are zero. Labels listed as 0/1 are normalized
// to -1/+1 when normalize_binary_labels is set.
LabeledDataset parse_libsvm(std::istream& in, std::size_t feature_dim,
                            bool normalize_binary_labels = true);
LabeledDataset load_libsvm(const std::string& path, std::size_t feature_dim,
                           bool normalize_binary_labels = true);
// Writes nonzero entries only; parse_libsvm inverts it.
void write_libsvm(std::ostream& out, const LabeledDataset& data);

// IDX binary container (the MNIST distribution format): big-endian
// magic 0x00000803 (u8 images, 3 dims) or 0x00000801 (u8 labels,
// 1 dim), big-endian u32 dimension sizes, row-major u8 payload.
struct IdxTensor {
  std::vector<std::size_t> dims;
  std::vector<std::uint8_t> data;
};

IdxTensor parse_idx(std::span<const std::uint8_t> bytes);
IdxTensor load_idx(const std::string& path);
std::vector<std::uint8_t> write_idx(const IdxTensor& tensor);

// Images rescaled to [0, 1]; labels taken as class ids.
LabeledDataset dataset_from_idx(const IdxTensor& images,
                                const IdxTensor& labels);

// y = <x*, features> + bias* + noise * N(0,1), with standard-normal
// features; the generating parameters are drawn from the same seed so
// the optimum is recoverable when noise == 0.
LabeledDataset synth_linreg(std::size_t n, std::size_t feature_dim,
                            double noise, std::uint64_t seed);

// Two classes, strictly separable through the origin with the given
// margin along a random unit direction; labels are -1/+1.
LabeledDataset synth_logreg(std::size_t n, std::size_t feature_dim,
                            double margin, std::uint64_t seed);

// Class-prototype images plus pixel noise, emitted in IDX form so the
// image pipeline is exercised end to end. Returns {images, labels}.
std::pair<IdxTensor, IdxTensor> synth_digits(std::size_t n, std::size_t side,
                                             std::size_t classes, double noise,
                                             std::uint64_t seed);

}  // namespace fedcorr
