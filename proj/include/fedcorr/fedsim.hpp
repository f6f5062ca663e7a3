#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedcorr/adaptive.hpp"
#include "fedcorr/datasets.hpp"
#include "fedcorr/ledger.hpp"
#include "fedcorr/metrics.hpp"
#include "fedcorr/models.hpp"

namespace fedcorr {

enum class PartitionKind { kIid, kLabelLimited };
enum class Scheme { kNone, kSvdFed, kAdaSvdFed, kPcaFed, kPredictive };

const char* scheme_name(Scheme s);

struct FedConfig {
  std::size_t clients = 1;      // K
  std::size_t local_steps = 1;  // tau
  double learning_rate = 0.1;   // gamma
  std::size_t rounds = 10;      // T
  double momentum = 0.0;
  double weight_decay = 0.0;
  std::uint64_t seed = 1;

  PartitionKind partition = PartitionKind::kIid;
  std::size_t labels_per_client = 0;  // L, label-limited only

  Scheme scheme = Scheme::kNone;
  AdaConfig ada;    // svdfed / adasvdfed / predictive
  PcaFedConfig pca;  // pcafed

  // Correlation probe: record structural/temporal/spatial readings each
  // round (compression stays off; pair with Scheme::kNone).
  bool probe = false;
  double probe_beta = 0.2;
  std::size_t probe_window = 5;  // h, window includes the current round
  PcaRankRule rank_rule = PcaRankRule::kSampleLimited;

  // Fraction of the dataset held out for validation accuracy.
  double val_fraction = 0.2;
  // Optional early target; rounds-to-target is reported when reached.
  std::optional<double> target_accuracy;

  void validate() const;
};

// Deterministic shard assignment. IID: a seeded shuffle split as evenly
// as possible. Label-limited: client k draws from L of the C distinct
// labels (blocks of L in label order, wrapping), each label's samples
// split evenly among its holders. Requires K*L >= C so every label has
// a holder.
std::vector<std::vector<std::size_t>> partition(const LabeledDataset& data,
                                                const FedConfig& cfg);

// tau mini-batch SGD steps from x on the shard; batch sizes satisfy
// |batch| * tau ~= |shard| (chunks differ by at most one sample).
// Momentum buffer starts at zero each round. Returns the parameter
// delta x_local - x.
ParamVector local_update(const ModelSpec& spec, std::span<const double> x,
                         const LabeledDataset& data,
                         const std::vector<std::size_t>& shard,
                         const FedConfig& cfg, std::uint64_t round,
                         std::size_t client);

// x + sum_k w_k ghat_k; weights must sum to 1 within 1e-12.
ParamVector aggregate(std::span<const double> x,
                      const std::vector<ParamVector>& reconstructed,
                      const std::vector<double>& weights);

struct LayerStateTrace {
  std::string layer;
  std::vector<ClientTrace> clients;
};

struct RoundRecord {
  std::size_t round = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  std::vector<double> client_mse;  // per-client update distortion (Eq. MSE)
  RoundTraffic traffic;
  std::vector<LayerStateTrace> states;
  std::vector<CorrelationReading> readings;  // probe mode

  std::string to_jsonl() const;
  std::string state_trace_jsonl() const;
};

struct ExperimentResult {
  std::vector<RoundRecord> records;
  CommLedger ledger;
  ParamVector final_params;
  // First round whose post-aggregation validation accuracy reached the
  // target; 0 when never reached or no target set.
  std::size_t rounds_to_target = 0;
  std::size_t uplink_to_target = 0;
  std::size_t downlink_to_target = 0;

  std::string summary_csv_row(const std::string& scheme) const;
};

// CSV header matching summary_csv_row.
std::string summary_csv_header();

ExperimentResult run_experiment(const FedConfig& cfg, const ModelSpec& spec,
                                const LabeledDataset& dataset);

}  // namespace fedcorr
