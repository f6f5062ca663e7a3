#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedcorr/datasets.hpp"
#include "fedcorr/matrix.hpp"

namespace fedcorr {

// One compressible parameter block and how it slices into update
// columns (slice_rows is the m of the block's reshape).
struct LayerSpec {
  std::string name;
  std::size_t size = 0;
  std::size_t slice_rows = 0;
};

struct ModelSpec {
  enum class Kind { kLinReg, kLogReg, kMlp };

  Kind kind = Kind::kLinReg;
  std::size_t input_dim = 0;
  std::size_t hidden = 0;   // MLP
  std::size_t classes = 0;  // MLP
  // Slice length for the single-block models; 0 picks ~sqrt(d).
  std::size_t slice_rows = 0;

  std::size_t param_count() const;
  std::vector<LayerSpec> layers() const;
  bool is_classifier() const { return kind != Kind::kLinReg; }
};

// Initial parameters: zeros for the linear models, uniform
// +-sqrt(6/(fan_in+fan_out)) for MLP weight blocks.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Mean loss over the given sample indices; adds the mean gradient into
// grad (which must be zeroed by the caller if a fresh gradient is
// wanted).
double model_loss_grad(const ModelSpec& spec, std::span<const double> params,
                       const LabeledDataset& data,
                       std::span<const std::size_t> batch,
                       std::span<double> grad);

double model_loss(const ModelSpec& spec, std::span<const double> params,
                  const LabeledDataset& data,
                  std::span<const std::size_t> batch);

// Classification accuracy over the indices; NaN for regression models.
double model_accuracy(const ModelSpec& spec, std::span<const double> params,
                      const LabeledDataset& data,
                      std::span<const std::size_t> batch);

}  // namespace fedcorr
