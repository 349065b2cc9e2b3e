#include "barelay/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace barelay {

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::Conventional: return "conventional";
    case ProtocolKind::BufferAidedGenie: return "genie";
    case ProtocolKind::BufferAidedAdaptive: return "adaptive";
    case ProtocolKind::MaxLink: return "max-link";
    case ProtocolKind::DelayLimited: return "delay-limited";
  }
  return "unknown";
}

void SimulationConfig::validate() const {
  if (num_slots < 1) throw std::invalid_argument("num_slots must be at least 1");
  if (metric_stride < 1) throw std::invalid_argument("metric_stride must be at least 1");
  if (burn_in >= num_slots) throw std::invalid_argument("burn_in must be below num_slots");
  switch (protocol.kind) {
    case ProtocolKind::BufferAidedGenie:
      if (!protocol.weights)
        throw std::invalid_argument("protocol.weights is required for the genie protocol");
      if (protocol.weights->size() != model.num_relays())
        throw std::invalid_argument("protocol.weights length differs from the relay count");
      break;
    case ProtocolKind::DelayLimited:
      if (!(protocol.delay_target > 0.0) || !std::isfinite(protocol.delay_target))
        throw std::invalid_argument("protocol.delay_target must be positive");
      break;
    default:
      break;
  }
}

double RateReport::max_abs_flow_residual() const {
  double worst = 0.0;
  for (double r : flow_residuals) worst = std::max(worst, std::abs(r));
  return worst;
}

double average_delay(double sum_avg_queues, double sum_arrival_rates) {
  if (!(sum_arrival_rates > 0.0))
    throw std::domain_error("average delay is undefined without arrivals");
  return sum_avg_queues / sum_arrival_rates;
}

OverheadCount signaling_overhead(int num_relays, Implementation implementation,
                                 ProtocolFamily /*protocol*/) {
  if (num_relays < 1) throw std::invalid_argument("relay count must be at least 1");
  // Identical for the conventional and buffer-aided families.
  if (implementation == Implementation::Distributed) return {4, 4};
  return {2 * num_relays + 4, 2 * num_relays + 5};
}

namespace {

class MetricAccumulator {
 public:
  explicit MetricAccumulator(std::size_t m)
      : received_(m, 0.0), delivered_(m, 0.0), queue_sum_(m, 0.0) {}

  void add(const Decision& d, const SlotTransfer& t, const std::vector<double>& queues) {
    received_[d.relay] += t.bits_received;
    delivered_[d.relay] += t.bits_delivered;
    for (std::size_t k = 0; k < queues.size(); ++k) queue_sum_[k] += queues[k];
    ++count_;
  }

  // Conventional relaying moves the same bits over both hops in one slot.
  void add_pass_through(std::size_t relay, double bits) {
    received_[relay] += bits;
    delivered_[relay] += bits;
    ++count_;
  }

  std::uint64_t count() const { return count_; }

  double running_rate() const {
    if (count_ == 0) return 0.0;
    double sum = 0.0;
    for (double d : delivered_) sum += d;
    return sum / static_cast<double>(count_);
  }

  double running_delay(bool buffered) const {
    double arrivals = 0.0;
    double queued = 0.0;
    for (double r : received_) arrivals += r;
    for (double q : queue_sum_) queued += q;
    if (!(arrivals > 0.0)) return 0.0;
    // Conventional relaying delivers every bit in the slot it is sent.
    return buffered ? average_delay(queued, arrivals) : 1.0;
  }

  void finish(RateReport& report, bool buffered) const {
    const double n = static_cast<double>(count_);
    const std::size_t m = received_.size();
    report.slots_averaged = count_;
    report.per_relay_arrival.resize(m);
    report.per_relay_departure.resize(m);
    report.flow_residuals.resize(m);
    report.avg_queue.resize(m);
    report.avg_rate_sd = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      report.per_relay_arrival[k] = received_[k] / n;
      report.per_relay_departure[k] = delivered_[k] / n;
      report.flow_residuals[k] = report.per_relay_arrival[k] - report.per_relay_departure[k];
      report.avg_queue[k] = queue_sum_[k] / n;
      report.avg_rate_sd += report.per_relay_departure[k];
    }
    report.avg_delay = running_delay(buffered);
  }

 private:
  std::vector<double> received_;
  std::vector<double> delivered_;
  std::vector<double> queue_sum_;
  std::uint64_t count_ = 0;
};

bool mu_on_clamp(const NetworkState& state) {
  return std::any_of(state.mu_est.begin(), state.mu_est.end(), [](double mu) {
    return mu <= kMuClampLow || mu >= kMuClampHigh;
  });
}

RateReport run_conventional(const SimulationConfig& config) {
  const std::size_t m = config.model.num_relays();
  RandomStream stream(config.seed, m);
  SlotRealization slot;
  SlotCapacities caps;
  MetricAccumulator metrics(m);
  RateReport report;

  for (std::uint64_t i = 1; i <= config.num_slots; ++i) {
    sample_slot_into(config.model, stream, slot);
    slot_capacities_into(slot, caps);
    const ConventionalChoice choice = select_conventional(caps);
    report.total_received += choice.rate;
    report.total_delivered += choice.rate;
    if (config.record_decisions)
      report.decisions.push_back({choice.relay, Mode::Receive, choice.rate});
    if (i > config.burn_in) metrics.add_pass_through(choice.relay, choice.rate);
    if (i % config.metric_stride == 0 && metrics.count() > 0) {
      report.trajectory.push_back(
          {i, metrics.running_rate(), metrics.running_delay(false), {}, {}});
    }
  }
  metrics.finish(report, false);
  report.final_queues.assign(m, 0.0);
  return report;
}

RateReport run_buffered(const SimulationConfig& config) {
  const std::size_t m = config.model.num_relays();
  const ProtocolKind kind = config.protocol.kind;
  const StepFunction mu_step = config.mu_step.value_or(default_mu_step());
  const StepFunction lambda_step =
      config.lambda_step.value_or(default_lambda_step(config.model.snr_ref()));

  RandomStream stream(config.seed, m);
  SlotRealization slot;
  SlotCapacities caps;
  NetworkState state(m);
  MetricAccumulator metrics(m);
  RateReport report;
  std::uint64_t pinned_slots = 0;

  auto audit = [&] {
    double queued = 0.0;
    for (double q : state.queues) queued += q;
    const double error = std::abs(report.total_received - report.total_delivered - queued);
    report.max_conservation_error = std::max(report.max_conservation_error, error);
  };

  for (std::uint64_t i = 1; i <= config.num_slots; ++i) {
    sample_slot_into(config.model, stream, slot);
    slot_capacities_into(slot, caps);

    // Estimators start from their initial values in slot 1.
    if (i > 1) {
      if (kind == ProtocolKind::BufferAidedAdaptive) update_mu_estimate(state, mu_step);
      if (kind == ProtocolKind::DelayLimited)
        update_lambda(state, config.protocol.delay_target, lambda_step);
    }

    Decision decision;
    switch (kind) {
      case ProtocolKind::BufferAidedGenie:
        decision = select_buffer_aided(caps, *config.protocol.weights);
        break;
      case ProtocolKind::BufferAidedAdaptive:
        decision = select_buffer_aided(caps, std::span<const double>(state.mu_est));
        break;
      case ProtocolKind::MaxLink:
        decision = select_max_link(caps);
        break;
      case ProtocolKind::DelayLimited:
        decision = select_delay_limited(caps, state);
        break;
      case ProtocolKind::Conventional:
        throw std::logic_error("conventional relaying has no buffer");
    }

    const SlotTransfer transfer = apply_decision(state, decision, caps);
    update_rate_estimates(state, decision, caps);
    report.total_received += transfer.bits_received;
    report.total_delivered += transfer.bits_delivered;
    if (kind == ProtocolKind::BufferAidedAdaptive && mu_on_clamp(state)) ++pinned_slots;
    if (config.record_decisions) report.decisions.push_back(decision);
    if (i > config.burn_in) metrics.add(decision, transfer, state.queues);

    if (i % config.metric_stride == 0) {
      audit();
      if (metrics.count() > 0) {
        report.trajectory.push_back({i, metrics.running_rate(), metrics.running_delay(true),
                                     state.mu_est, state.lambda_est});
      }
    }
  }
  audit();
  metrics.finish(report, true);
  report.final_queues = state.queues;
  report.final_mu_est = state.mu_est;
  report.final_lambda_est = state.lambda_est;
  report.estimator_pinned = 2 * pinned_slots > config.num_slots;
  return report;
}

}  // namespace

RateReport run_simulation(const SimulationConfig& config) {
  config.validate();
  if (config.protocol.kind == ProtocolKind::Conventional) return run_conventional(config);
  return run_buffered(config);
}

std::vector<RateReport> run_simulations(const std::vector<SimulationConfig>& configs,
                                        unsigned max_workers) {
  std::vector<RateReport> reports(configs.size());
  if (configs.empty()) return reports;
  unsigned workers = max_workers ? max_workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(configs.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t idx = next++; idx < configs.size(); idx = next++) {
      try {
        reports[idx] = run_simulation(configs[idx]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return reports;
}

}  // namespace barelay
