#include "fedcorr/adaptive.hpp"

#include <algorithm>
#include <cstring>

#include "fedcorr/error.hpp"
#include "fedcorr/wire.hpp"

namespace fedcorr {

namespace {

void check_round_inputs(const std::vector<ParamVector>& raw, std::size_t dim,
                        std::size_t clients) {
  if (raw.size() != clients)
    throw ShapeMismatch("scheme round: client count changed");
  for (const auto& g : raw) {
    if (g.size() != dim)
      throw ShapeMismatch("scheme round: update dimension mismatch");
  }
}

// Ships a payload through the wire codec, so every simulated round
// exercises the exact bytes both endpoints would exchange.
CompressedUpdate through_wire(CompressedUpdate update) {
  return wire::deserialize(wire::serialize(update));
}

RoundTraffic empty_traffic(std::size_t t, std::size_t clients) {
  RoundTraffic traffic;
  traffic.round = t;
  traffic.uplink_values.assign(clients, 0);
  traffic.uplink_index_overhead.assign(clients, 0);
  traffic.downlink_basis_per_client.assign(clients, 0);
  return traffic;
}

bool bitwise_equal(const ParamVector& a, const ParamVector& b) {
  return a.size() == b.size() &&
         (a.empty() ||
          std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

std::vector<ParamVector> slice_columns(const ParamVector& g,
                                       const ReshapeSpec& spec) {
  const UpdateMatrix um = reshape_to_matrix(g, spec);
  std::vector<ParamVector> slices(spec.cols);
  for (std::size_t j = 0; j < spec.cols; ++j) slices[j] = um.g_mat.col(j);
  return slices;
}

ParamVector assemble_from_slices(const std::vector<ParamVector>& slices,
                                 const ReshapeSpec& spec, std::size_t dim) {
  UpdateMatrix um;
  um.spec = spec;
  um.pad_count = spec.rows * spec.cols - dim;
  um.g_mat = Matrix(spec.rows, spec.cols);
  for (std::size_t j = 0; j < spec.cols; ++j) um.g_mat.set_col(j, slices[j]);
  return flatten_from_matrix(um);
}

std::size_t basis_elements(const PcaBasis& basis) {
  // Q_r plus the mean vector.
  return basis.mu.size() * (basis.rank + 1);
}

}  // namespace

const char* ada_tag_name(AdaTag tag) {
  switch (tag) {
    case AdaTag::kUpdate:
      return "UPDATE";
    case AdaTag::kSpatial:
      return "SPATIAL";
    case AdaTag::kPred:
      return "PRED";
  }
  return "?";
}

const char* pca_tag_name(PcaTag tag) {
  switch (tag) {
    case PcaTag::kUpdate:
      return "UPDATE";
    case PcaTag::kPca:
      return "PCA";
    case PcaTag::kLocalPca:
      return "LocalPCA";
  }
  return "?";
}

const char* sharing_name(SharingCase c) {
  switch (c) {
    case SharingCase::kPerSlicePerClient:
      return "per-slice-per-client";
    case SharingCase::kPerSliceShared:
      return "per-slice-shared";
    case SharingCase::kPerClientShared:
      return "per-client-shared";
    case SharingCase::kFullyShared:
      return "fully-shared";
  }
  return "?";
}

void AdaConfig::validate() const {
  if (update_period < 2) throw InvalidInput("update_period must be >= 2");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidInput("alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0))
    throw InvalidInput("beta must lie in [0, 1]");
  if (memory < 1) throw InvalidInput("memory must be >= 1");
  if (!(residual_fraction > 0.0 && residual_fraction <= 1.0))
    throw InvalidInput("residual_fraction must lie in (0, 1]");
}

void PcaFedConfig::validate() const {
  if (update_period < 2) throw InvalidInput("update_period must be >= 2");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidInput("alpha must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0))
    throw InvalidInput("beta must lie in [0, 1]");
  if (memory < 1) throw InvalidInput("memory must be >= 1");
}

// ---------------------------------------------------------------------------
// RawEngine

RawEngine::RawEngine(std::size_t dim, std::size_t clients)
    : dim_(dim), clients_(clients) {}

SchemeRound RawEngine::round(const std::vector<ParamVector>& raw_updates,
                             std::size_t t) {
  check_round_inputs(raw_updates, dim_, clients_);
  SchemeRound out;
  out.traffic = empty_traffic(t, clients_);
  out.reconstructed.reserve(clients_);
  out.clients.resize(clients_);
  for (std::size_t k = 0; k < clients_; ++k) {
    CompressedUpdate decoded = through_wire({RawPayload{raw_updates[k]}});
    out.traffic.uplink_values[k] = decoded.uplink_element_count();
    out.reconstructed.push_back(
        std::move(std::get<RawPayload>(decoded.payload).g));
    out.clients[k].state = "RAW";
    out.clients[k].uplink_values = out.traffic.uplink_values[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// AdaSVDFed

AdaSvdFedEngine::AdaSvdFedEngine(std::size_t dim, std::size_t clients,
                                 AdaConfig cfg)
    : dim_(dim), clients_(clients), cfg_(cfg) {
  cfg_.validate();
  if (clients_ == 0) throw InvalidInput("AdaSvdFed: need at least one client");
  client_memory_.assign(clients_, PredictorMemory(dim_, cfg_.memory));
  server_memory_.assign(clients_, PredictorMemory(dim_, cfg_.memory));
}

SchemeRound AdaSvdFedEngine::round(const std::vector<ParamVector>& raw_updates,
                                   std::size_t t) {
  check_round_inputs(raw_updates, dim_, clients_);
  SchemeRound out;
  out.traffic = empty_traffic(t, clients_);
  out.clients.resize(clients_);

  if (t % cfg_.update_period == 1) {
    state_.tag = AdaTag::kUpdate;
    state_.basis.reset();
  }

  switch (state_.tag) {
    case AdaTag::kUpdate: {
      out.reconstructed.reserve(clients_);
      for (std::size_t k = 0; k < clients_; ++k) {
        CompressedUpdate decoded = through_wire({RawPayload{raw_updates[k]}});
        out.traffic.uplink_values[k] = decoded.uplink_element_count();
        out.reconstructed.push_back(
            std::move(std::get<RawPayload>(decoded.payload).g));
      }
      const Matrix observed = Matrix::from_columns(out.reconstructed);
      if (measure_corr_svd(observed, cfg_.beta) >= cfg_.alpha) {
        TruncatedSvd basis = narrow_svd(observed, cfg_.alpha);
        out.traffic.downlink_basis_broadcast += dim_ * basis.rank;
        state_.tag = AdaTag::kSpatial;
        state_.basis = std::move(basis);
      } else {
        for (std::size_t k = 0; k < clients_; ++k) {
          client_memory_[k].shift_in(raw_updates[k]);
          server_memory_[k].shift_in(out.reconstructed[k]);
        }
        state_.tag = AdaTag::kPred;
        state_.basis.reset();
      }
      for (std::size_t k = 0; k < clients_; ++k) {
        out.clients[k].state = "UPDATE";
        out.clients[k].uplink_values = out.traffic.uplink_values[k];
      }
      break;
    }

    case AdaTag::kSpatial: {
      if (!state_.basis)
        throw ProtocolViolation("AdaSvdFed: SPATIAL round without a basis");
      const Matrix& u_r = state_.basis->u_r;
      out.reconstructed.reserve(clients_);
      for (std::size_t k = 0; k < clients_; ++k) {
        CompressedUpdate decoded = through_wire(
            {SubspaceCoeffsPayload{subspace_project(raw_updates[k], u_r)}});
        out.traffic.uplink_values[k] = decoded.uplink_element_count();
        out.reconstructed.push_back(subspace_reconstruct(
            std::get<SubspaceCoeffsPayload>(decoded.payload).coeffs, u_r));
        out.clients[k].state = "SPATIAL";
        out.clients[k].rank = state_.basis->rank;
        out.clients[k].uplink_values = out.traffic.uplink_values[k];
      }
      break;
    }

    case AdaTag::kPred: {
      out.reconstructed.reserve(clients_);
      for (std::size_t k = 0; k < clients_; ++k) {
        const std::vector<double> coeffs =
            predictor_fit(client_memory_[k], raw_updates[k]);
        ParamVector prediction = predictor_roundtrip(
            client_memory_[k], coeffs, SparseResidual{dim_, {}, {}});
        ParamVector residual(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
          residual[i] = raw_updates[k][i] - prediction[i];
        SparseResidual sparse =
            topk_sparsify(residual, cfg_.residual_fraction);

        CompressedUpdate decoded = through_wire(
            {PredictivePayload{coeffs, std::move(sparse)}});
        const auto& payload = std::get<PredictivePayload>(decoded.payload);
        out.traffic.uplink_values[k] = decoded.uplink_element_count();
        out.traffic.uplink_index_overhead[k] = decoded.index_overhead();

        ParamVector ghat_client = predictor_roundtrip(
            client_memory_[k], payload.coeffs, payload.residual);
        ParamVector ghat_server = predictor_roundtrip(
            server_memory_[k], payload.coeffs, payload.residual);
        if (!bitwise_equal(ghat_client, ghat_server))
          throw ProtocolViolation(
              "AdaSvdFed: client and server reconstructions diverged");
        client_memory_[k].shift_in(ghat_client);
        server_memory_[k].shift_in(ghat_server);
        out.reconstructed.push_back(std::move(ghat_server));
        out.clients[k].state = "PRED";
        out.clients[k].uplink_values = out.traffic.uplink_values[k];
      }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SvdFed (periodic refresh, no measurement gate)

SvdFedEngine::SvdFedEngine(std::size_t dim, std::size_t clients, AdaConfig cfg)
    : dim_(dim), clients_(clients), cfg_(cfg) {
  cfg_.validate();
  if (clients_ == 0) throw InvalidInput("SvdFed: need at least one client");
}

SchemeRound SvdFedEngine::round(const std::vector<ParamVector>& raw_updates,
                                std::size_t t) {
  check_round_inputs(raw_updates, dim_, clients_);
  SchemeRound out;
  out.traffic = empty_traffic(t, clients_);
  out.clients.resize(clients_);

  if (t % cfg_.update_period == 1) {
    out.reconstructed.reserve(clients_);
    for (std::size_t k = 0; k < clients_; ++k) {
      CompressedUpdate decoded = through_wire({RawPayload{raw_updates[k]}});
      out.traffic.uplink_values[k] = decoded.uplink_element_count();
      out.reconstructed.push_back(
          std::move(std::get<RawPayload>(decoded.payload).g));
      out.clients[k].state = "UPDATE";
      out.clients[k].uplink_values = out.traffic.uplink_values[k];
    }
    basis_ = narrow_svd(Matrix::from_columns(out.reconstructed), cfg_.alpha);
    out.traffic.downlink_basis_broadcast += dim_ * basis_->rank;
    return out;
  }

  if (!basis_) throw ProtocolViolation("SvdFed: no basis before first update");
  out.reconstructed.reserve(clients_);
  for (std::size_t k = 0; k < clients_; ++k) {
    CompressedUpdate decoded = through_wire(
        {SubspaceCoeffsPayload{subspace_project(raw_updates[k], basis_->u_r)}});
    out.traffic.uplink_values[k] = decoded.uplink_element_count();
    out.reconstructed.push_back(subspace_reconstruct(
        std::get<SubspaceCoeffsPayload>(decoded.payload).coeffs, basis_->u_r));
    out.clients[k].state = "SPATIAL";
    out.clients[k].rank = basis_->rank;
    out.clients[k].uplink_values = out.traffic.uplink_values[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Predictive coding every round

PredictiveEngine::PredictiveEngine(std::size_t dim, std::size_t clients,
                                   AdaConfig cfg)
    : dim_(dim), clients_(clients), cfg_(cfg) {
  cfg_.validate();
  if (clients_ == 0)
    throw InvalidInput("Predictive: need at least one client");
  client_memory_.assign(clients_, PredictorMemory(dim_, cfg_.memory));
  server_memory_.assign(clients_, PredictorMemory(dim_, cfg_.memory));
}

SchemeRound PredictiveEngine::round(const std::vector<ParamVector>& raw_updates,
                                    std::size_t t) {
  check_round_inputs(raw_updates, dim_, clients_);
  SchemeRound out;
  out.traffic = empty_traffic(t, clients_);
  out.clients.resize(clients_);
  out.reconstructed.reserve(clients_);
  for (std::size_t k = 0; k < clients_; ++k) {
    const std::vector<double> coeffs =
        predictor_fit(client_memory_[k], raw_updates[k]);
    ParamVector prediction = predictor_roundtrip(client_memory_[k], coeffs,
                                                 SparseResidual{dim_, {}, {}});
    ParamVector residual(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      residual[i] = raw_updates[k][i] - prediction[i];
    CompressedUpdate decoded = through_wire({PredictivePayload{
        coeffs, topk_sparsify(residual, cfg_.residual_fraction)}});
    const auto& payload = std::get<PredictivePayload>(decoded.payload);
    out.traffic.uplink_values[k] = decoded.uplink_element_count();
    out.traffic.uplink_index_overhead[k] = decoded.index_overhead();

    ParamVector ghat_client =
        predictor_roundtrip(client_memory_[k], payload.coeffs, payload.residual);
    ParamVector ghat_server =
        predictor_roundtrip(server_memory_[k], payload.coeffs, payload.residual);
    if (!bitwise_equal(ghat_client, ghat_server))
      throw ProtocolViolation(
          "Predictive: client and server reconstructions diverged");
    client_memory_[k].shift_in(ghat_client);
    server_memory_[k].shift_in(ghat_server);
    out.reconstructed.push_back(std::move(ghat_server));
    out.clients[k].state = "PRED";
    out.clients[k].uplink_values = out.traffic.uplink_values[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// PCAFed

PcaFedEngine::PcaFedEngine(ReshapeSpec slicing, std::size_t clients,
                           PcaFedConfig cfg)
    : slicing_(std::move(slicing)), clients_(clients), cfg_(cfg) {
  cfg_.validate();
  if (clients_ == 0) throw InvalidInput("PcaFed: need at least one client");
  if (!slicing_.is_flat())
    dim_ = slicing_.source_dim();
  else
    dim_ = slicing_.source_shape.front().length;
  states_.assign(clients_, PcaFedClientState{});
}

std::vector<PcaFedClientState> PcaFedEngine::update_states(
    const std::vector<ParamVector>& current,
    const std::deque<std::vector<ParamVector>>& history,
    const ReshapeSpec& slicing, const PcaFedConfig& cfg) {
  const std::size_t clients = current.size();
  const std::size_t n_slices = slicing.cols;
  std::vector<PcaFedClientState> states(clients);
  for (auto& s : states) s.tag = PcaTag::kLocalPca;

  // A correlation test needs at least two samples; short of that it
  // reads as "no correlation".
  auto measure_ok = [&](const std::vector<ParamVector>& samples) {
    return samples.size() >= 2 &&
           measure_corr_pca(samples, cfg.beta, cfg.rank_rule) >= cfg.alpha;
  };

  const bool spatial = measure_ok(current);

  if (spatial) {
    // Combined processing at the server over all clients' history.
    std::vector<ParamVector> pooled;
    for (const auto& round_updates : history)
      for (const auto& g : round_updates) pooled.push_back(g);
    if (!measure_ok(pooled)) return states;  // all LocalPCA

    std::vector<ParamVector> pooled_slices;
    for (const auto& g : pooled) {
      auto cols = slice_columns(g, slicing);
      for (auto& c : cols) pooled_slices.push_back(std::move(c));
    }
    if (measure_ok(pooled_slices)) {
      const PcaBasis shared = narrow_pca(pooled_slices, cfg.alpha);
      for (auto& s : states) {
        s.tag = PcaTag::kPca;
        s.sharing = SharingCase::kFullyShared;
        s.slice_bases.assign(n_slices, shared);
      }
    } else {
      std::vector<PcaBasis> per_slice(n_slices);
      for (std::size_t i = 0; i < n_slices; ++i) {
        std::vector<ParamVector> slice_set;
        for (std::size_t v = i; v < pooled_slices.size(); v += n_slices)
          slice_set.push_back(pooled_slices[v]);
        per_slice[i] = narrow_pca(slice_set, cfg.alpha);
      }
      for (auto& s : states) {
        s.tag = PcaTag::kPca;
        s.sharing = SharingCase::kPerSliceShared;
        s.slice_bases = per_slice;
      }
    }
    return states;
  }

  // Per-agent processing.
  for (std::size_t k = 0; k < clients; ++k) {
    std::vector<ParamVector> hist_k;
    for (const auto& round_updates : history) hist_k.push_back(round_updates[k]);
    if (!measure_ok(hist_k)) continue;  // stays LocalPCA

    std::vector<ParamVector> slices_k;
    for (const auto& g : hist_k) {
      auto cols = slice_columns(g, slicing);
      for (auto& c : cols) slices_k.push_back(std::move(c));
    }
    if (measure_ok(slices_k)) {
      const PcaBasis shared = narrow_pca(slices_k, cfg.alpha);
      states[k].tag = PcaTag::kPca;
      states[k].sharing = SharingCase::kPerClientShared;
      states[k].slice_bases.assign(n_slices, shared);
    } else {
      states[k].tag = PcaTag::kPca;
      states[k].sharing = SharingCase::kPerSlicePerClient;
      states[k].slice_bases.resize(n_slices);
      for (std::size_t i = 0; i < n_slices; ++i) {
        std::vector<ParamVector> slice_set;
        for (std::size_t v = i; v < slices_k.size(); v += n_slices)
          slice_set.push_back(slices_k[v]);
        states[k].slice_bases[i] = narrow_pca(slice_set, cfg.alpha);
      }
    }
  }
  return states;
}

SchemeRound PcaFedEngine::round(const std::vector<ParamVector>& raw_updates,
                                std::size_t t) {
  check_round_inputs(raw_updates, dim_, clients_);
  SchemeRound out;
  out.traffic = empty_traffic(t, clients_);
  out.clients.resize(clients_);

  if (t % cfg_.update_period == 1) {
    for (auto& s : states_) s = PcaFedClientState{};  // all UPDATE
  }

  const bool update_round = states_.front().tag == PcaTag::kUpdate;
  out.reconstructed.reserve(clients_);

  if (update_round) {
    for (std::size_t k = 0; k < clients_; ++k) {
      CompressedUpdate decoded = through_wire({RawPayload{raw_updates[k]}});
      out.traffic.uplink_values[k] = decoded.uplink_element_count();
      out.reconstructed.push_back(
          std::move(std::get<RawPayload>(decoded.payload).g));
      out.clients[k].state = "UPDATE";
      out.clients[k].uplink_values = out.traffic.uplink_values[k];
    }

    states_ = update_states(out.reconstructed, history_, slicing_, cfg_);

    // Basis downlink: shared bases broadcast once, per-client bases per
    // client.
    bool shared_counted = false;
    for (std::size_t k = 0; k < clients_; ++k) {
      const auto& s = states_[k];
      if (s.tag != PcaTag::kPca) continue;
      switch (s.sharing) {
        case SharingCase::kFullyShared:
          if (!shared_counted) {
            out.traffic.downlink_basis_broadcast +=
                basis_elements(s.slice_bases.front());
            shared_counted = true;
          }
          break;
        case SharingCase::kPerSliceShared:
          if (!shared_counted) {
            for (const auto& b : s.slice_bases)
              out.traffic.downlink_basis_broadcast += basis_elements(b);
            shared_counted = true;
          }
          break;
        case SharingCase::kPerClientShared:
          out.traffic.downlink_basis_per_client[k] +=
              basis_elements(s.slice_bases.front());
          break;
        case SharingCase::kPerSlicePerClient:
          for (const auto& b : s.slice_bases)
            out.traffic.downlink_basis_per_client[k] += basis_elements(b);
          break;
      }
    }
  } else {
    for (std::size_t k = 0; k < clients_; ++k) {
      const auto& s = states_[k];
      if (s.tag == PcaTag::kPca) {
        if (s.slice_bases.size() != slicing_.cols)
          throw ProtocolViolation("PcaFed: PCA state without slice bases");
        const auto slices = slice_columns(raw_updates[k], slicing_);
        PcaSlicesPayload payload;
        payload.slices.reserve(slices.size());
        for (std::size_t i = 0; i < slices.size(); ++i)
          payload.slices.push_back(pca_compress(slices[i], s.slice_bases[i]));
        CompressedUpdate decoded = through_wire({std::move(payload)});
        const auto& got = std::get<PcaSlicesPayload>(decoded.payload);
        std::vector<ParamVector> rebuilt(slices.size());
        for (std::size_t i = 0; i < slices.size(); ++i)
          rebuilt[i] = pca_decompress(got.slices[i], s.slice_bases[i]);
        out.reconstructed.push_back(
            assemble_from_slices(rebuilt, slicing_, dim_));
        out.traffic.uplink_values[k] = decoded.uplink_element_count();
        out.clients[k].state = "PCA";
        out.clients[k].sharing = sharing_name(s.sharing);
        out.clients[k].rank = s.slice_bases.front().rank;
        out.clients[k].uplink_values = out.traffic.uplink_values[k];
        continue;
      }

      // LocalPCA: test the client's own slices each round; compress
      // with a locally fitted basis when correlation suffices, fall
      // back to the raw update otherwise.
      const auto slices = slice_columns(raw_updates[k], slicing_);
      const bool local_ok =
          slices.size() >= 2 &&
          measure_corr_pca(slices, cfg_.beta, cfg_.rank_rule) >= cfg_.alpha;
      if (local_ok) {
        const PcaBasis local = narrow_pca(slices, cfg_.alpha);
        PcaSlicesPayload payload;
        payload.slices.reserve(slices.size());
        for (const auto& slice : slices)
          payload.slices.push_back(pca_compress(slice, local));
        CompressedUpdate decoded = through_wire({std::move(payload)});
        const auto& got = std::get<PcaSlicesPayload>(decoded.payload);
        std::vector<ParamVector> rebuilt(slices.size());
        for (std::size_t i = 0; i < slices.size(); ++i)
          rebuilt[i] = pca_decompress(got.slices[i], local);
        out.reconstructed.push_back(
            assemble_from_slices(rebuilt, slicing_, dim_));
        // Coefficients plus the basis and mean travel uplink.
        out.traffic.uplink_values[k] =
            decoded.uplink_element_count() + basis_elements(local);
        out.clients[k].state = "LocalPCA";
        out.clients[k].rank = local.rank;
        out.clients[k].uplink_values = out.traffic.uplink_values[k];
      } else {
        CompressedUpdate decoded = through_wire({RawPayload{raw_updates[k]}});
        out.traffic.uplink_values[k] = decoded.uplink_element_count();
        out.reconstructed.push_back(
            std::move(std::get<RawPayload>(decoded.payload).g));
        out.clients[k].state = "LocalPCA-raw";
        out.clients[k].uplink_values = out.traffic.uplink_values[k];
      }
    }
  }

  history_.push_front(out.reconstructed);
  while (history_.size() > cfg_.memory) history_.pop_back();
  return out;
}

}  // namespace fedcorr
