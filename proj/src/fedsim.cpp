#include "fedcorr/fedsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fedcorr/error.hpp"
#include "fedcorr/kernels.hpp"
#include "fedcorr/rng.hpp"

namespace fedcorr {

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kNone:
      return "none";
    case Scheme::kSvdFed:
      return "svdfed";
    case Scheme::kAdaSvdFed:
      return "adasvdfed";
    case Scheme::kPcaFed:
      return "pcafed";
    case Scheme::kPredictive:
      return "predictive";
  }
  return "?";
}

void FedConfig::validate() const {
  if (clients < 1) throw InvalidInput("config: clients must be >= 1");
  if (local_steps < 1) throw InvalidInput("config: local_steps must be >= 1");
  if (!(learning_rate > 0.0))
    throw InvalidInput("config: learning_rate must be positive");
  if (rounds < 1) throw InvalidInput("config: rounds must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw InvalidInput("config: momentum must lie in [0, 1)");
  if (weight_decay < 0.0)
    throw InvalidInput("config: weight_decay must be non-negative");
  if (partition == PartitionKind::kLabelLimited && labels_per_client == 0)
    throw InvalidInput("config: label_limited partition needs L >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0))
    throw InvalidInput("config: val_fraction must lie in [0, 1)");
  if (scheme == Scheme::kSvdFed || scheme == Scheme::kAdaSvdFed ||
      scheme == Scheme::kPredictive)
    ada.validate();
  if (scheme == Scheme::kPcaFed) pca.validate();
  if (probe && probe_window < 1)
    throw InvalidInput("config: probe_window must be >= 1");
  if (probe && !(probe_beta >= 0.0 && probe_beta <= 1.0))
    throw InvalidInput("config: probe_beta must lie in [0, 1]");
}

std::vector<std::vector<std::size_t>> partition(const LabeledDataset& data,
                                                const FedConfig& cfg) {
  const std::size_t k = cfg.clients;
  if (data.size() < k)
    throw InvalidInput("partition: fewer samples than clients");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(cfg.seed, 2));
  rng.shuffle(order);

  std::vector<std::vector<std::size_t>> shards(k);

  if (cfg.partition == PartitionKind::kIid) {
    for (std::size_t i = 0; i < order.size(); ++i)
      shards[i % k].push_back(order[i]);
    return shards;
  }

  // Label-limited: enumerate the distinct labels, give client c the
  // block {labels[(c*L + j) mod C]}, then split each label's samples
  // evenly across its holders.
  std::vector<int> distinct;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int l = data.label_as_int(i);
    if (std::find(distinct.begin(), distinct.end(), l) == distinct.end())
      distinct.push_back(l);
  }
  std::sort(distinct.begin(), distinct.end());
  const std::size_t c_count = distinct.size();
  const std::size_t l_per = cfg.labels_per_client;
  if (l_per > c_count)
    throw InvalidInput("partition: labels_per_client exceeds label count");
  if (k * l_per < c_count)
    throw InvalidInput(
        "partition: K*L < C leaves labels without a holder; increase "
        "labels_per_client or clients");

  std::map<int, std::vector<std::size_t>> holders;  // label -> client ids
  std::vector<std::vector<int>> client_labels(k);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < l_per; ++j) {
      const int label = distinct[(c * l_per + j) % c_count];
      if (std::find(client_labels[c].begin(), client_labels[c].end(), label) ==
          client_labels[c].end()) {
        client_labels[c].push_back(label);
        holders[label].push_back(c);
      }
    }
  }

  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i : order) by_label[data.label_as_int(i)].push_back(i);

  for (const auto& [label, samples] : by_label) {
    const auto& hs = holders.at(label);
    for (std::size_t i = 0; i < samples.size(); ++i)
      shards[hs[i % hs.size()]].push_back(samples[i]);
  }
  for (auto& shard : shards) {
    if (shard.empty())
      throw InvalidInput("partition: a client received no samples");
  }
  return shards;
}

ParamVector local_update(const ModelSpec& spec, std::span<const double> x,
                         const LabeledDataset& data,
                         const std::vector<std::size_t>& shard,
                         const FedConfig& cfg, std::uint64_t round,
                         std::size_t client) {
  if (shard.empty()) throw InvalidInput("local_update: empty shard");

  std::vector<std::size_t> order = shard;
  Rng rng(Rng::derive(cfg.seed, 1000 + round, client));
  rng.shuffle(order);

  const std::size_t tau = cfg.local_steps;
  ParamVector params(x.begin(), x.end());
  ParamVector velocity(params.size(), 0.0);
  ParamVector grad(params.size());

  // tau chunks with sizes differing by at most one, so every sample is
  // visited once per round and |batch| * tau ~= |shard|.
  const std::size_t base = order.size() / tau;
  const std::size_t extra = order.size() % tau;
  std::size_t offset = 0;
  for (std::size_t step = 0; step < tau; ++step) {
    const std::size_t len = base + (step < extra ? 1 : 0);
    if (len == 0) continue;  // more steps than samples
    std::fill(grad.begin(), grad.end(), 0.0);
    model_loss_grad(spec, params, data,
                    std::span<const std::size_t>(order.data() + offset, len),
                    grad);
    offset += len;
    if (cfg.weight_decay != 0.0)
      kernels::axpy(cfg.weight_decay, params.data(), grad.data(), grad.size());
    // Heavy-ball: v <- m*v + grad; x <- x - gamma*v.
    kernels::scal(cfg.momentum, velocity.data(), velocity.size());
    kernels::axpy(1.0, grad.data(), velocity.data(), velocity.size());
    kernels::axpy(-cfg.learning_rate, velocity.data(), params.data(),
                  params.size());
  }

  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= x[i];
  return params;
}

ParamVector aggregate(std::span<const double> x,
                      const std::vector<ParamVector>& reconstructed,
                      const std::vector<double>& weights) {
  if (reconstructed.size() != weights.size())
    throw InvalidInput("aggregate: weight count mismatch");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (std::abs(wsum - 1.0) > 1e-12)
    throw InvalidInput("aggregate: weights must sum to 1");
  ParamVector out(x.begin(), x.end());
  for (std::size_t k = 0; k < reconstructed.size(); ++k) {
    if (reconstructed[k].size() != out.size())
      throw ShapeMismatch("aggregate: update dimension mismatch");
    kernels::axpy(weights[k], reconstructed[k].data(), out.data(), out.size());
  }
  return out;
}

namespace {

std::unique_ptr<CompressorEngine> make_engine(const FedConfig& cfg,
                                              const LayerSpec& layer) {
  switch (cfg.scheme) {
    case Scheme::kNone:
      return std::make_unique<RawEngine>(layer.size, cfg.clients);
    case Scheme::kSvdFed:
      return std::make_unique<SvdFedEngine>(layer.size, cfg.clients, cfg.ada);
    case Scheme::kAdaSvdFed:
      return std::make_unique<AdaSvdFedEngine>(layer.size, cfg.clients,
                                               cfg.ada);
    case Scheme::kPredictive:
      return std::make_unique<PredictiveEngine>(layer.size, cfg.clients,
                                                cfg.ada);
    case Scheme::kPcaFed: {
      PcaFedConfig pcfg = cfg.pca;
      pcfg.rank_rule = cfg.rank_rule;
      return std::make_unique<PcaFedEngine>(
          ReshapeSpec::flat(layer.size, layer.slice_rows), cfg.clients, pcfg);
    }
  }
  throw InvalidInput("unknown scheme");
}

std::vector<ParamVector> layer_segment(const std::vector<ParamVector>& whole,
                                       std::size_t offset, std::size_t len) {
  std::vector<ParamVector> out(whole.size());
  for (std::size_t k = 0; k < whole.size(); ++k) {
    out[k].assign(whole[k].begin() + static_cast<std::ptrdiff_t>(offset),
                  whole[k].begin() + static_cast<std::ptrdiff_t>(offset + len));
  }
  return out;
}

// Probe readings for one layer segment; empty layer name means the
// parameter-weighted aggregate gets computed elsewhere.
void probe_layer(std::vector<CorrelationReading>& out, std::size_t round,
                 const std::string& layer_name, const LayerSpec& layer,
                 const std::vector<ParamVector>& current,
                 const std::deque<std::vector<ParamVector>>& history,
                 const FedConfig& cfg) {
  using Kind = CorrelationReading::Kind;
  const std::size_t clients = current.size();
  const ReshapeSpec spec = ReshapeSpec::flat(layer.size, layer.slice_rows);

  // Structural: slices of each client's current update, client-averaged.
  if (spec.cols >= 2) {
    double acc = 0.0;
    for (std::size_t k = 0; k < clients; ++k) {
      const UpdateMatrix um = reshape_to_matrix(current[k], spec);
      std::vector<ParamVector> slices(spec.cols);
      for (std::size_t j = 0; j < spec.cols; ++j) slices[j] = um.g_mat.col(j);
      acc += measure_corr_pca(slices, cfg.probe_beta, cfg.rank_rule);
    }
    out.push_back({Kind::kStructural, acc / static_cast<double>(clients),
                   static_cast<std::size_t>(
                       std::ceil(cfg.probe_beta *
                                 static_cast<double>(std::min(
                                     spec.rows, spec.cols)))),
                   spec.cols, round, layer_name});
  }

  // Temporal: per-client window over the last h rounds (current
  // included); emitted once the window is full.
  if (history.size() >= cfg.probe_window && cfg.probe_window >= 2) {
    double acc = 0.0;
    for (std::size_t k = 0; k < clients; ++k) {
      std::vector<ParamVector> window;
      for (std::size_t t = 0; t < cfg.probe_window; ++t)
        window.push_back(history[t][k]);
      acc += measure_corr_pca(window, cfg.probe_beta, cfg.rank_rule);
    }
    out.push_back({Kind::kTemporal, acc / static_cast<double>(clients), 0,
                   cfg.probe_window, round, layer_name});
  }

  // Spatial: all clients' current updates.
  if (clients >= 2) {
    out.push_back({Kind::kSpatial,
                   measure_corr_pca(current, cfg.probe_beta, cfg.rank_rule), 0,
                   clients, round, layer_name});
  }
}

}  // namespace

std::string RoundRecord::to_jsonl() const {
  nlohmann::json j{{"round", round},
                   {"train_loss", train_loss},
                   {"uplink", traffic.uplink_total()},
                   {"uplink_index_overhead", traffic.uplink_index_total()},
                   {"downlink", traffic.downlink_total()},
                   {"mse", client_mse}};
  if (std::isnan(val_accuracy)) {
    j["val_accuracy"] = nullptr;
  } else {
    j["val_accuracy"] = val_accuracy;
  }
  return j.dump();
}

std::string RoundRecord::state_trace_jsonl() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : states) {
    nlohmann::json clients = nlohmann::json::array();
    for (const auto& c : layer.clients) {
      nlohmann::json jc{{"state", c.state},
                        {"rank", c.rank},
                        {"uplink", c.uplink_values}};
      if (!c.sharing.empty()) jc["sharing"] = c.sharing;
      clients.push_back(std::move(jc));
    }
    layers.push_back(nlohmann::json{{"layer", layer.layer},
                                    {"clients", std::move(clients)}});
  }
  return nlohmann::json{{"round", round}, {"layers", std::move(layers)}}.dump();
}

std::string summary_csv_header() {
  return "scheme,rounds_to_target,uplink,downlink,total";
}

std::string ExperimentResult::summary_csv_row(const std::string& scheme) const {
  const bool reached = rounds_to_target > 0;
  const std::size_t up = reached ? uplink_to_target : ledger.uplink_total();
  const std::size_t down =
      reached ? downlink_to_target : ledger.downlink_total();
  std::ostringstream os;
  os << scheme << ',' << rounds_to_target << ',' << up << ',' << down << ','
     << (up + down);
  return os.str();
}

ExperimentResult run_experiment(const FedConfig& cfg, const ModelSpec& spec,
                                const LabeledDataset& dataset) {
  cfg.validate();
  const std::size_t d = spec.param_count();
  if (d == 0) throw InvalidInput("run_experiment: empty model");
  if (dataset.feature_dim != spec.input_dim)
    throw ShapeMismatch(
        "run_experiment: dataset feature_dim != model input_dim");

  // Held-out validation split, then shards over the training part.
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(Rng::derive(cfg.seed, 3));
  split_rng.shuffle(order);
  const std::size_t val_count = static_cast<std::size_t>(
      std::floor(cfg.val_fraction * static_cast<double>(dataset.size())));
  std::vector<std::size_t> val_idx(order.begin(),
                                   order.begin() + static_cast<std::ptrdiff_t>(val_count));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(val_count),
                                     order.end());

  LabeledDataset train;
  train.feature_dim = dataset.feature_dim;
  for (std::size_t i : train_idx) {
    train.features.push_back(dataset.features[i]);
    train.labels.push_back(dataset.labels[i]);
  }

  const auto shards = partition(train, cfg);
  std::vector<double> weights(cfg.clients);
  for (std::size_t k = 0; k < cfg.clients; ++k) {
    weights[k] = static_cast<double>(shards[k].size()) /
                 static_cast<double>(train.size());
  }

  const auto layers = spec.layers();
  std::vector<std::size_t> layer_offsets(layers.size());
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      layer_offsets[l] = off;
      off += layers[l].size;
    }
    if (off != d) throw InvalidInput("run_experiment: layer sizes != d");
  }
  std::vector<std::unique_ptr<CompressorEngine>> engines;
  engines.reserve(layers.size());
  for (const auto& layer : layers) engines.push_back(make_engine(cfg, layer));

  std::vector<std::size_t> all_train(train.size());
  std::iota(all_train.begin(), all_train.end(), 0);

  ParamVector x = init_params(spec, cfg.seed);

  ExperimentResult result;
  std::deque<std::vector<ParamVector>> probe_history;  // newest first

  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    RoundRecord record;
    record.round = t;
    record.traffic = RoundTraffic{};
    record.traffic.round = t;
    record.traffic.downlink_model = d;  // global model broadcast, once

    std::vector<ParamVector> raw(cfg.clients);
    for (std::size_t k = 0; k < cfg.clients; ++k)
      raw[k] = local_update(spec, x, train, shards[k], cfg, t, k);

    std::vector<ParamVector> reconstructed(cfg.clients, ParamVector(d, 0.0));
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto segment = layer_segment(raw, layer_offsets[l],
                                         layers[l].size);
      SchemeRound sr = engines[l]->round(segment, t);
      record.traffic.merge(sr.traffic);
      for (std::size_t k = 0; k < cfg.clients; ++k) {
        std::copy(sr.reconstructed[k].begin(), sr.reconstructed[k].end(),
                  reconstructed[k].begin() +
                      static_cast<std::ptrdiff_t>(layer_offsets[l]));
      }
      record.states.push_back({layers[l].name, std::move(sr.clients)});
    }

    record.client_mse.resize(cfg.clients);
    for (std::size_t k = 0; k < cfg.clients; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double diff = reconstructed[k][i] - raw[k][i];
        acc += diff * diff;
      }
      record.client_mse[k] = acc / static_cast<double>(d);
    }

    if (cfg.probe) {
      probe_history.push_front(raw);
      while (probe_history.size() > cfg.probe_window) probe_history.pop_back();

      std::vector<CorrelationReading> readings;
      std::vector<std::size_t> measured_layer;  // for the weighted aggregate
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto segment =
            layer_segment(raw, layer_offsets[l], layers[l].size);
        std::deque<std::vector<ParamVector>> seg_history;
        for (const auto& h : probe_history)
          seg_history.push_back(
              layer_segment(h, layer_offsets[l], layers[l].size));
        probe_layer(readings, t, layers[l].name, layers[l], segment,
                    seg_history, cfg);
        measured_layer.push_back(l);
      }
      // Parameter-weighted aggregate per kind across layers.
      using Kind = CorrelationReading::Kind;
      for (Kind kind : {Kind::kStructural, Kind::kTemporal, Kind::kSpatial}) {
        double weighted = 0.0;
        double weight_sum = 0.0;
        for (const auto& r : readings) {
          if (r.kind != kind || r.layer.empty()) continue;
          for (std::size_t l = 0; l < layers.size(); ++l) {
            if (layers[l].name == r.layer) {
              weighted += r.alpha * static_cast<double>(layers[l].size);
              weight_sum += static_cast<double>(layers[l].size);
              break;
            }
          }
        }
        if (weight_sum > 0.0) {
          readings.push_back(
              {kind, weighted / weight_sum, 0, 0, t, "all"});
        }
      }
      record.readings = std::move(readings);
    }

    x = aggregate(x, reconstructed, weights);

    record.train_loss = model_loss(spec, x, train, all_train);
    record.val_accuracy =
        val_idx.empty() || !spec.is_classifier()
            ? std::numeric_limits<double>::quiet_NaN()
            : model_accuracy(spec, x, dataset, val_idx);

    result.ledger.add(record.traffic);
    if (cfg.target_accuracy && result.rounds_to_target == 0 &&
        !std::isnan(record.val_accuracy) &&
        record.val_accuracy >= *cfg.target_accuracy) {
      result.rounds_to_target = t;
      result.uplink_to_target = result.ledger.uplink_total();
      result.downlink_to_target = result.ledger.downlink_total();
    }
    result.records.push_back(std::move(record));
  }

  result.final_params = std::move(x);
  return result;
}

}  // namespace fedcorr
