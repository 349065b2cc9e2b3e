#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "barelay/analysis.hpp"
#include "barelay/channel.hpp"
#include "barelay/protocols.hpp"

namespace barelay {

enum class ProtocolKind {
  Conventional,
  BufferAidedGenie,
  BufferAidedAdaptive,
  MaxLink,
  DelayLimited,
};

std::string to_string(ProtocolKind kind);

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::Conventional;
  std::optional<SelectionWeights> weights;  // BufferAidedGenie only
  double delay_target = 0.0;                // DelayLimited only, in slots

  static ProtocolSpec conventional() { return {ProtocolKind::Conventional, {}, 0.0}; }
  static ProtocolSpec genie(SelectionWeights mu) {
    return {ProtocolKind::BufferAidedGenie, std::move(mu), 0.0};
  }
  static ProtocolSpec adaptive() { return {ProtocolKind::BufferAidedAdaptive, {}, 0.0}; }
  static ProtocolSpec max_link() { return {ProtocolKind::MaxLink, {}, 0.0}; }
  static ProtocolSpec delay_limited(double target) {
    return {ProtocolKind::DelayLimited, {}, target};
  }
};

struct SimulationConfig {
  FadingModel model;
  ProtocolSpec protocol;
  std::uint64_t num_slots = 1'000'000;
  std::uint64_t seed = 1;
  std::optional<StepFunction> mu_step;      // defaults to 0.1 / sqrt(i)
  std::optional<StepFunction> lambda_step;  // defaults to 0.005 / sqrt(i) / log2(1 + P/N0)
  std::uint64_t metric_stride = 1000;
  std::uint64_t burn_in = 0;  // leading slots excluded from the averages
  bool record_decisions = false;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TrajectoryPoint {
  std::uint64_t slot = 0;
  double running_rate = 0.0;
  double running_delay = 0.0;
  std::vector<double> mu_est;
  std::vector<double> lambda_est;

  bool operator==(const TrajectoryPoint&) const = default;
};

struct RateReport {
  double avg_rate_sd = 0.0;
  std::vector<double> per_relay_arrival;
  std::vector<double> per_relay_departure;
  std::vector<double> flow_residuals;
  std::vector<double> avg_queue;
  double avg_delay = 0.0;
  std::vector<TrajectoryPoint> trajectory;

  std::vector<double> final_queues;
  std::vector<double> final_mu_est;
  std::vector<double> final_lambda_est;
  std::uint64_t slots_averaged = 0;
  double total_received = 0.0;
  double total_delivered = 0.0;
  // Largest |received - delivered - sum_k Q_k| seen at any snapshot.
  double max_conservation_error = 0.0;
  // Set when an adaptive mu estimate sat on its clamp for over half the slots.
  bool estimator_pinned = false;
  std::vector<Decision> decisions;

  double max_abs_flow_residual() const;
  bool operator==(const RateReport&) const = default;
};

RateReport run_simulation(const SimulationConfig& config);

// Runs independent simulations on up to `max_workers` threads (0 picks the
// hardware concurrency). Reports come back in input order.
std::vector<RateReport> run_simulations(const std::vector<SimulationConfig>& configs,
                                        unsigned max_workers = 0);

// Little's-law delay in slots. Throws std::domain_error when nothing arrives.
double average_delay(double sum_avg_queues, double sum_arrival_rates);

enum class Implementation { Centralized, Distributed };

// Pilot, feedback and control transmissions needed per slot. The centralized
// count depends on whether the selected relay must feed back its
// relay-destination CSI; `lower == upper` when it does not vary.
struct OverheadCount {
  int lower = 0;
  int upper = 0;
  bool operator==(const OverheadCount&) const = default;
};

OverheadCount signaling_overhead(int num_relays, Implementation implementation,
                                 ProtocolFamily protocol);

}  // namespace barelay
