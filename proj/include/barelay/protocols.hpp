#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "barelay/channel.hpp"

namespace barelay {

enum class Mode { Receive, Transmit };

// The single active relay of a slot. Exactly one relay is active in exactly
// one mode; `rate` is filled in by apply_decision.
struct Decision {
  std::size_t relay = 0;
  Mode mode = Mode::Receive;
  double rate = 0.0;

  bool operator==(const Decision&) const = default;
};

// Constant selection weights mu_k in (0, 1), one per relay.
class SelectionWeights {
 public:
  explicit SelectionWeights(std::vector<double> mu);
  static SelectionWeights uniform(std::size_t num_relays, double value = 0.5);

  std::size_t size() const { return mu_.size(); }
  double operator[](std::size_t k) const { return mu_[k]; }
  const std::vector<double>& values() const { return mu_; }

 private:
  std::vector<double> mu_;
};

// Step size as a function of the one-based slot index.
using StepFunction = std::function<double(std::uint64_t)>;

inline constexpr double kMuClampLow = 1e-3;
inline constexpr double kMuClampHigh = 1.0 - 1e-3;
inline constexpr double kLambdaFloor = 1e-3;
inline constexpr double kMuInitial = 0.5;
inline constexpr double kLambdaInitial = 0.9;

// delta(i) = 0.1 / sqrt(i)
StepFunction default_mu_step();
// zeta(i) = 0.005 / sqrt(i) / log2(1 + snr_ref)
StepFunction default_lambda_step(double snr_ref);

struct NetworkState {
  explicit NetworkState(std::size_t num_relays);

  std::size_t num_relays() const { return queues.size(); }

  std::vector<double> queues;              // Q_k, bits/symbol
  std::vector<double> mu_est;              // mu_k^e
  std::vector<double> lambda_est;          // lambda_k
  std::vector<double> arrival_rate_est;    // running mean of r_k^R C_Sk
  std::vector<double> departure_rate_est;  // running mean of r_k^T C_kD
  std::uint64_t slot_count = 0;            // slots folded into the estimates
};

struct SlotCapacities {
  std::vector<double> sr;
  std::vector<double> rd;
};

SlotCapacities slot_capacities(const SlotRealization& slot);
void slot_capacities_into(const SlotRealization& slot, SlotCapacities& caps);

struct ConventionalChoice {
  std::size_t relay = 0;
  double rate = 0.0;  // half the bottleneck capacity of the chosen relay
};

// Non-buffered benchmark: best bottleneck min{C_Sk, C_kD}, half-slot each hop.
ConventionalChoice select_conventional(const SlotCapacities& caps);

// Weighted argmax over {mu_k C_Sk} and {(1 - mu_k) C_kD}. Ties go to the
// lowest relay index and, within a relay, to Receive.
Decision select_buffer_aided(const SlotCapacities& caps,
                             const SelectionWeights& weights);
// Same rule with unchecked weights, for estimates already kept in (0, 1).
Decision select_buffer_aided(const SlotCapacities& caps, std::span<const double> mu);

ConventionalChoice select_conventional(const SlotRealization& slot);
Decision select_buffer_aided(const SlotRealization& slot,
                             const SelectionWeights& weights);

// Unweighted argmax over all 2M capacities, same tie rule.
Decision select_max_link(const SlotCapacities& caps);

// Timer rule of the delay-limited protocol: relay k bids
// max{lambda_k C_Sk, min{Q_k, C_kD} / lambda_k}; the largest bid wins.
Decision select_delay_limited(const SlotCapacities& caps, const NetworkState& state);
Decision select_delay_limited(const SlotRealization& slot, const NetworkState& state);

struct SlotTransfer {
  double bits_received = 0.0;
  double bits_delivered = 0.0;
};

// Moves bits according to the decision and records the realized rate in
// `decision.rate`. Throws std::out_of_range for an unknown relay.
SlotTransfer apply_decision(NetworkState& state, Decision& decision,
                            const SlotCapacities& caps);

// Folds slot `state.slot_count + 1` into the running arrival and departure
// estimates. The departure estimate uses C_kD, not the buffer-limited rate.
void update_rate_estimates(NetworkState& state, const Decision& decision,
                           const SlotCapacities& caps);

// mu_k^e(i) = clamp(mu_k^e(i-1) + delta(i) (R_kD^e(i-1) - R_Sk^e(i-1))),
// with i = state.slot_count + 1.
void update_mu_estimate(NetworkState& state, const StepFunction& step);

// lambda_k(i) = max(floor, lambda_k(i-1) + zeta(i) (T0 - Q_k / R_Sk^e)),
// with the ratio taken as 0 while R_Sk^e is still 0.
void update_lambda(NetworkState& state, double delay_target, const StepFunction& step);

}  // namespace barelay
