#include "fedcorr/ledger.hpp"

#include <numeric>

#include "fedcorr/error.hpp"

namespace fedcorr {

namespace {

std::size_t vec_sum(const std::vector<std::size_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::size_t{0});
}

void merge_per_client(std::vector<std::size_t>& into,
                      const std::vector<std::size_t>& from) {
  if (into.empty()) {
    into = from;
    return;
  }
  if (from.empty()) return;
  if (into.size() != from.size())
    throw ShapeMismatch("RoundTraffic::merge: client counts differ");
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

}  // namespace

std::size_t RoundTraffic::uplink_total() const { return vec_sum(uplink_values); }

std::size_t RoundTraffic::uplink_index_total() const {
  return vec_sum(uplink_index_overhead);
}

std::size_t RoundTraffic::downlink_total() const {
  return downlink_model + downlink_basis_broadcast +
         vec_sum(downlink_basis_per_client);
}

void RoundTraffic::merge(const RoundTraffic& other) {
  merge_per_client(uplink_values, other.uplink_values);
  merge_per_client(uplink_index_overhead, other.uplink_index_overhead);
  merge_per_client(downlink_basis_per_client, other.downlink_basis_per_client);
  downlink_model += other.downlink_model;
  downlink_basis_broadcast += other.downlink_basis_broadcast;
}

void CommLedger::add(RoundTraffic traffic) {
  uplink_total_ += traffic.uplink_total();
  uplink_index_total_ += traffic.uplink_index_total();
  downlink_model_total_ += traffic.downlink_model;
  downlink_basis_total_ += traffic.downlink_basis_broadcast +
                           std::accumulate(traffic.downlink_basis_per_client.begin(),
                                           traffic.downlink_basis_per_client.end(),
                                           std::size_t{0});
  rounds_.push_back(std::move(traffic));
}

std::size_t CommLedger::uplink_total_through(std::size_t t) const {
  std::size_t total = 0;
  for (const auto& r : rounds_) {
    if (r.round <= t) total += r.uplink_total();
  }
  return total;
}

std::size_t CommLedger::downlink_total_through(std::size_t t) const {
  std::size_t total = 0;
  for (const auto& r : rounds_) {
    if (r.round <= t) total += r.downlink_total();
  }
  return total;
}

}  // namespace fedcorr
