#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "fedcorr/datasets.hpp"
#include "fedcorr/fedsim.hpp"
#include "fedcorr/models.hpp"

namespace fedcorr {

// Dataset recipe from the experiment config; materialized lazily so
// parse errors in the config surface before any data work.
struct DatasetSpec {
  enum class Kind { kSynthLinreg, kSynthLogreg, kSynthDigits, kLibsvm, kIdx };

  Kind kind = Kind::kSynthLinreg;
  std::size_t samples = 0;
  double noise = 0.0;
  double margin = 1.0;
  std::size_t side = 16;
  std::size_t classes = 10;
  std::size_t dim = 0;         // libsvm declared dimension
  std::string path;            // libsvm
  std::string images;          // idx
  std::string labels;          // idx
  std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
  FedConfig fed;
  ModelSpec model;
  DatasetSpec dataset;
};

// Strict schema: unknown keys are rejected at every level, required
// keys must be present, and types must match. Throws InvalidInput with
// a readable path on violation.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

// Reads and parses; throws InvalidInput on unreadable files or
// malformed JSON.
ExperimentConfig load_experiment_config(const std::string& path);

LabeledDataset materialize_dataset(const DatasetSpec& spec,
                                   std::uint64_t default_seed);

}  // namespace fedcorr
