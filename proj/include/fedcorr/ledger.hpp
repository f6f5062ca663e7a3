#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fedcorr {

// Exact element counts moved in one round. Broadcast payloads (global
// model, shared bases) are counted once; per-client payloads once per
// client. Index positions of sparse payloads are tracked separately
// from value elements so either counting convention can be read off.
struct RoundTraffic {
  std::size_t round = 0;
  std::vector<std::size_t> uplink_values;          // per client
  std::vector<std::size_t> uplink_index_overhead;  // per client
  std::size_t downlink_model = 0;                  // broadcast, once
  std::size_t downlink_basis_broadcast = 0;        // shared basis, once
  std::vector<std::size_t> downlink_basis_per_client;

  std::size_t uplink_total() const;
  std::size_t uplink_index_total() const;
  std::size_t downlink_total() const;

  void merge(const RoundTraffic& other);
};

class CommLedger {
 public:
  void add(RoundTraffic traffic);

  const std::vector<RoundTraffic>& rounds() const { return rounds_; }

  std::size_t uplink_total() const { return uplink_total_; }
  std::size_t uplink_index_total() const { return uplink_index_total_; }
  std::size_t downlink_model_total() const { return downlink_model_total_; }
  std::size_t downlink_basis_total() const { return downlink_basis_total_; }
  std::size_t downlink_total() const {
    return downlink_model_total_ + downlink_basis_total_;
  }
  std::size_t grand_total() const { return uplink_total() + downlink_total(); }

  // Totals over rounds 1..t only (for cost-to-target readouts).
  std::size_t uplink_total_through(std::size_t t) const;
  std::size_t downlink_total_through(std::size_t t) const;

 private:
  std::vector<RoundTraffic> rounds_;
  std::size_t uplink_total_ = 0;
  std::size_t uplink_index_total_ = 0;
  std::size_t downlink_model_total_ = 0;
  std::size_t downlink_basis_total_ = 0;
};

}  // namespace fedcorr
