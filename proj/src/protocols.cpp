#include "barelay/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace barelay {

SelectionWeights::SelectionWeights(std::vector<double> mu) : mu_(std::move(mu)) {
  if (mu_.empty()) throw std::invalid_argument("selection weights are empty");
  for (std::size_t k = 0; k < mu_.size(); ++k) {
    if (!(mu_[k] > 0.0 && mu_[k] < 1.0))
      throw std::invalid_argument("selection weight mu[" + std::to_string(k) +
                                  "] must lie strictly inside (0, 1)");
  }
}

SelectionWeights SelectionWeights::uniform(std::size_t num_relays, double value) {
  return SelectionWeights(std::vector<double>(num_relays, value));
}

StepFunction default_mu_step() {
  return [](std::uint64_t i) { return 0.1 / std::sqrt(static_cast<double>(i)); };
}

StepFunction default_lambda_step(double snr_ref) {
  const double scale = 0.005 / std::log2(1.0 + snr_ref);
  return [scale](std::uint64_t i) { return scale / std::sqrt(static_cast<double>(i)); };
}

NetworkState::NetworkState(std::size_t num_relays)
    : queues(num_relays, 0.0),
      mu_est(num_relays, kMuInitial),
      lambda_est(num_relays, kLambdaInitial),
      arrival_rate_est(num_relays, 0.0),
      departure_rate_est(num_relays, 0.0) {}

void slot_capacities_into(const SlotRealization& slot, SlotCapacities& caps) {
  const std::size_t m = slot.gamma_sr.size();
  caps.sr.resize(m);
  caps.rd.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    caps.sr[k] = capacity(slot.gamma_sr[k]);
    caps.rd[k] = capacity(slot.gamma_rd[k]);
  }
}

SlotCapacities slot_capacities(const SlotRealization& slot) {
  SlotCapacities caps;
  slot_capacities_into(slot, caps);
  return caps;
}

ConventionalChoice select_conventional(const SlotCapacities& caps) {
  ConventionalChoice best;
  double best_bottleneck = -1.0;
  for (std::size_t k = 0; k < caps.sr.size(); ++k) {
    const double bottleneck = std::min(caps.sr[k], caps.rd[k]);
    if (bottleneck > best_bottleneck) {
      best_bottleneck = bottleneck;
      best.relay = k;
    }
  }
  best.rate = 0.5 * best_bottleneck;
  return best;
}

ConventionalChoice select_conventional(const SlotRealization& slot) {
  return select_conventional(slot_capacities(slot));
}

namespace {

// Scans relays in index order, Receive before Transmit, keeping the first
// strict maximum.
template <typename ReceiveScore, typename TransmitScore>
Decision weighted_argmax(std::size_t num_relays, ReceiveScore receive,
                         TransmitScore transmit) {
  Decision best;
  double best_score = -1.0;
  for (std::size_t k = 0; k < num_relays; ++k) {
    const double r = receive(k);
    if (r > best_score) {
      best_score = r;
      best = {k, Mode::Receive, 0.0};
    }
    const double t = transmit(k);
    if (t > best_score) {
      best_score = t;
      best = {k, Mode::Transmit, 0.0};
    }
  }
  return best;
}

}  // namespace

Decision select_buffer_aided(const SlotCapacities& caps, std::span<const double> mu) {
  if (mu.size() != caps.sr.size())
    throw std::invalid_argument("selection weights do not match the relay count");
  return weighted_argmax(
      caps.sr.size(), [&](std::size_t k) { return mu[k] * caps.sr[k]; },
      [&](std::size_t k) { return (1.0 - mu[k]) * caps.rd[k]; });
}

Decision select_buffer_aided(const SlotCapacities& caps,
                             const SelectionWeights& weights) {
  return select_buffer_aided(caps, std::span<const double>(weights.values()));
}

Decision select_buffer_aided(const SlotRealization& slot,
                             const SelectionWeights& weights) {
  return select_buffer_aided(slot_capacities(slot), weights);
}

Decision select_max_link(const SlotCapacities& caps) {
  return weighted_argmax(
      caps.sr.size(), [&](std::size_t k) { return caps.sr[k]; },
      [&](std::size_t k) { return caps.rd[k]; });
}

Decision select_delay_limited(const SlotCapacities& caps, const NetworkState& state) {
  if (state.num_relays() != caps.sr.size())
    throw std::invalid_argument("network state does not match the relay count");
  Decision best;
  double best_bid = -1.0;
  for (std::size_t k = 0; k < caps.sr.size(); ++k) {
    const double lambda = state.lambda_est[k];
    const double receive = lambda * caps.sr[k];
    const double transmit = std::min(state.queues[k], caps.rd[k]) / lambda;
    const double bid = std::max(receive, transmit);
    if (bid > best_bid) {
      best_bid = bid;
      best = {k, receive >= transmit ? Mode::Receive : Mode::Transmit, 0.0};
    }
  }
  return best;
}

Decision select_delay_limited(const SlotRealization& slot, const NetworkState& state) {
  return select_delay_limited(slot_capacities(slot), state);
}

SlotTransfer apply_decision(NetworkState& state, Decision& decision,
                            const SlotCapacities& caps) {
  const std::size_t k = decision.relay;
  if (k >= state.num_relays() || k >= caps.sr.size())
    throw std::out_of_range("decision names relay " + std::to_string(k) +
                            " outside the network");
  SlotTransfer transfer;
  if (decision.mode == Mode::Receive) {
    decision.rate = caps.sr[k];
    state.queues[k] += decision.rate;
    transfer.bits_received = decision.rate;
  } else {
    decision.rate = std::min(state.queues[k], caps.rd[k]);
    state.queues[k] -= decision.rate;
    // Guard against -0.0 and rounding below zero.
    if (state.queues[k] < 0.0) state.queues[k] = 0.0;
    transfer.bits_delivered = decision.rate;
  }
  return transfer;
}

void update_rate_estimates(NetworkState& state, const Decision& decision,
                           const SlotCapacities& caps) {
  const std::uint64_t i = ++state.slot_count;
  const double keep = static_cast<double>(i - 1) / static_cast<double>(i);
  const double add = 1.0 / static_cast<double>(i);
  for (std::size_t k = 0; k < state.num_relays(); ++k) {
    state.arrival_rate_est[k] *= keep;
    state.departure_rate_est[k] *= keep;
  }
  if (decision.mode == Mode::Receive)
    state.arrival_rate_est[decision.relay] += add * caps.sr[decision.relay];
  else
    state.departure_rate_est[decision.relay] += add * caps.rd[decision.relay];
}

void update_mu_estimate(NetworkState& state, const StepFunction& step) {
  const double delta = step(state.slot_count + 1);
  for (std::size_t k = 0; k < state.num_relays(); ++k) {
    const double gradient = state.departure_rate_est[k] - state.arrival_rate_est[k];
    state.mu_est[k] =
        std::clamp(state.mu_est[k] + delta * gradient, kMuClampLow, kMuClampHigh);
  }
}

void update_lambda(NetworkState& state, double delay_target, const StepFunction& step) {
  const double zeta = step(state.slot_count + 1);
  for (std::size_t k = 0; k < state.num_relays(); ++k) {
    const double arrivals = state.arrival_rate_est[k];
    const double ratio = arrivals > 0.0 ? state.queues[k] / arrivals : 0.0;
    state.lambda_est[k] =
        std::max(kLambdaFloor, state.lambda_est[k] + zeta * (delay_target - ratio));
  }
}

}  // namespace barelay
