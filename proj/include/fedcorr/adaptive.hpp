#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fedcorr/compressors.hpp"
#include "fedcorr/ledger.hpp"
#include "fedcorr/matrix.hpp"
#include "fedcorr/metrics.hpp"
#include "fedcorr/updates.hpp"

namespace fedcorr {

// ---------------------------------------------------------------------------
// Scheme engine interface. One engine instance handles one parameter
// block (a layer) across all clients; the simulator owns one engine per
// layer per scheme.

struct ClientTrace {
  std::string state;
  std::string sharing;  // PCAFed basis-sharing case, empty elsewhere
  std::size_t rank = 0;
  std::size_t uplink_values = 0;
};

struct SchemeRound {
  std::vector<ParamVector> reconstructed;  // per-client server-side g-hat
  RoundTraffic traffic;
  std::vector<ClientTrace> clients;
};

class CompressorEngine {
 public:
  virtual ~CompressorEngine() = default;
  virtual SchemeRound round(const std::vector<ParamVector>& raw_updates,
                            std::size_t t) = 0;
};

// Transmits raw updates; the no-compression baseline.
class RawEngine : public CompressorEngine {
 public:
  RawEngine(std::size_t dim, std::size_t clients);
  SchemeRound round(const std::vector<ParamVector>& raw_updates,
                    std::size_t t) override;

 private:
  std::size_t dim_;
  std::size_t clients_;
};

// ---------------------------------------------------------------------------
// AdaSVDFed: periodic update rounds measure spatial correlation and
// switch the next T_u - 1 rounds between a server-provided fixed
// subspace and least-squares predictive coding with a sparsified
// residual.

enum class AdaTag { kUpdate, kSpatial, kPred };
const char* ada_tag_name(AdaTag tag);

struct AdaState {
  AdaTag tag = AdaTag::kUpdate;
  std::optional<TruncatedSvd> basis;  // present iff tag == kSpatial
};

struct AdaConfig {
  std::size_t update_period = 3;  // T_u
  double alpha = 0.8;
  double beta = 0.2;
  std::size_t memory = 5;  // h
  double residual_fraction = 0.05;

  void validate() const;
};

class AdaSvdFedEngine : public CompressorEngine {
 public:
  AdaSvdFedEngine(std::size_t dim, std::size_t clients, AdaConfig cfg);

  SchemeRound round(const std::vector<ParamVector>& raw_updates,
                    std::size_t t) override;

  const AdaState& state() const { return state_; }
  const PredictorMemory& client_memory(std::size_t k) const {
    return client_memory_[k];
  }
  const PredictorMemory& server_memory(std::size_t k) const {
    return server_memory_[k];
  }

 private:
  std::size_t dim_;
  std::size_t clients_;
  AdaConfig cfg_;
  AdaState state_;
  std::vector<PredictorMemory> client_memory_;
  std::vector<PredictorMemory> server_memory_;
};

// Simplified SVDFed: refreshes the subspace on every update round
// without measuring, the non-adaptive baseline the adaptive variant is
// compared against.
class SvdFedEngine : public CompressorEngine {
 public:
  SvdFedEngine(std::size_t dim, std::size_t clients, AdaConfig cfg);
  SchemeRound round(const std::vector<ParamVector>& raw_updates,
                    std::size_t t) override;

 private:
  std::size_t dim_;
  std::size_t clients_;
  AdaConfig cfg_;
  std::optional<TruncatedSvd> basis_;
};

// Pure least-squares predictive coding with a sparsified residual,
// applied every round.
class PredictiveEngine : public CompressorEngine {
 public:
  PredictiveEngine(std::size_t dim, std::size_t clients, AdaConfig cfg);
  SchemeRound round(const std::vector<ParamVector>& raw_updates,
                    std::size_t t) override;

 private:
  std::size_t dim_;
  std::size_t clients_;
  AdaConfig cfg_;
  std::vector<PredictorMemory> client_memory_;
  std::vector<PredictorMemory> server_memory_;
};

// ---------------------------------------------------------------------------
// PCAFed: per-client states selected on update rounds by measuring
// spatial, temporal, and structural correlation with the approximate
// energy ratio; four basis-sharing cases depending on which
// correlations are present.

enum class PcaTag { kUpdate, kPca, kLocalPca };
const char* pca_tag_name(PcaTag tag);

enum class SharingCase {
  kPerSlicePerClient,  // only temporal correlation
  kPerSliceShared,     // spatial + temporal
  kPerClientShared,    // structural + temporal
  kFullyShared,        // spatial + structural + temporal
};
const char* sharing_name(SharingCase c);

struct PcaFedClientState {
  PcaTag tag = PcaTag::kUpdate;
  SharingCase sharing = SharingCase::kPerSlicePerClient;
  std::vector<PcaBasis> slice_bases;  // one per slice iff tag == kPca
};

struct PcaFedConfig {
  std::size_t update_period = 3;  // T_u
  double alpha = 0.8;
  double beta = 0.2;
  std::size_t memory = 5;  // h rounds of server-side history
  PcaRankRule rank_rule = PcaRankRule::kSampleLimited;

  void validate() const;
};

class PcaFedEngine : public CompressorEngine {
 public:
  // slicing fixes how this block's vector splits into update slices.
  PcaFedEngine(ReshapeSpec slicing, std::size_t clients, PcaFedConfig cfg);

  SchemeRound round(const std::vector<ParamVector>& raw_updates,
                    std::size_t t) override;

  // The Fig.-2-style state selection: spatial test on the current
  // updates, temporal and structural tests on the reconstruction
  // history (pooled when spatial correlation is present, per client
  // otherwise). Exposed for scripted trace tests.
  static std::vector<PcaFedClientState> update_states(
      const std::vector<ParamVector>& current,
      const std::deque<std::vector<ParamVector>>& history,
      const ReshapeSpec& slicing, const PcaFedConfig& cfg);

  const std::vector<PcaFedClientState>& client_states() const {
    return states_;
  }

 private:
  ReshapeSpec slicing_;
  std::size_t dim_;
  std::size_t clients_;
  PcaFedConfig cfg_;
  std::vector<PcaFedClientState> states_;
  std::deque<std::vector<ParamVector>> history_;  // newest first, <= h rounds
};

}  // namespace fedcorr
