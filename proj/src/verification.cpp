#include "barelay/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include "barelay/analysis.hpp"
#include "barelay/simulator.hpp"

namespace barelay {

FadingModel five_relay_model(double snr_db) {
  return FadingModel(db_to_linear(snr_db), kFiveRelayOmegaSr, kFiveRelayOmegaRd);
}

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!passed) detail << "; ";
      else detail.str("");
      passed = false;
      detail << "FAILED " << what;
    }
  }
};

std::string fmt(double value, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << value;
  return os.str();
}

double relative_error(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

SimulationConfig make_config(const FadingModel& model, ProtocolSpec protocol,
                             std::uint64_t slots, std::uint64_t seed) {
  return SimulationConfig{.model = model,
                          .protocol = std::move(protocol),
                          .num_slots = slots,
                          .seed = seed,
                          .mu_step = std::nullopt,
                          .lambda_step = std::nullopt,
                          .metric_stride = std::max<std::uint64_t>(1, slots / 100),
                          .burn_in = 0,
                          .record_decisions = false};
}

constexpr int kGridRelays[] = {1, 2, 5};
constexpr double kGridSnrDb[] = {0.0, 10.0, 20.0};

// 1. Monte-Carlo buffer-aided rate at mu = 1/2 vs the closed form.
void closed_form_buffer_aided(const VerificationOptions& opt, Outcome& out) {
  double worst = 0.0;
  for (int m : kGridRelays) {
    for (double db : kGridSnrDb) {
      const double snr = db_to_linear(db);
      const auto report = run_simulation(make_config(
          FadingModel::iid(m, snr), ProtocolSpec::genie(SelectionWeights::uniform(m)),
          1'000'000, opt.seed));
      const double err =
          relative_error(report.avg_rate_sd, closed_form_rate_ba_iid_rayleigh(m, snr));
      worst = std::max(worst, err);
      out.require(err <= 0.01, "M=" + std::to_string(m) + " " + fmt(db) +
                                   " dB rel err " + fmt(err));
    }
  }
  if (out.passed) out.detail << "max relative error " << fmt(worst) << " <= 0.01";
}

// 2. Monte-Carlo conventional rate vs its closed form.
void closed_form_conventional(const VerificationOptions& opt, Outcome& out) {
  double worst = 0.0;
  for (int m : kGridRelays) {
    for (double db : kGridSnrDb) {
      const double snr = db_to_linear(db);
      const auto report = run_simulation(make_config(
          FadingModel::iid(m, snr), ProtocolSpec::conventional(), 1'000'000, opt.seed));
      const double err =
          relative_error(report.avg_rate_sd, closed_form_rate_conv_iid_rayleigh(m, snr));
      worst = std::max(worst, err);
      out.require(err <= 0.01, "M=" + std::to_string(m) + " " + fmt(db) +
                                   " dB rel err " + fmt(err));
    }
  }
  if (out.passed) out.detail << "max relative error " << fmt(worst) << " <= 0.01";
}

// 3. Order-statistic quadrature vs the closed form.
void dual_route(const VerificationOptions&, Outcome& out) {
  double worst = 0.0;
  for (int m = 1; m <= 10; ++m) {
    for (double snr : {0.1, 1.0, 10.0, 100.0}) {
      const double diff = std::abs(iid_rate_quadrature(m, snr) -
                                   closed_form_rate_ba_iid_rayleigh(m, snr));
      worst = std::max(worst, diff);
      out.require(diff <= 1e-6, "M=" + std::to_string(m) + " snr " + fmt(snr) +
                                    " |diff| " + fmt(diff));
    }
  }
  if (out.passed) out.detail << "max |difference| " << fmt(worst, 3) << " <= 1e-6";
}

// 4. The flow-balance solver returns 1/2 on i.i.d. models.
void iid_fixed_point(const VerificationOptions&, Outcome& out) {
  double worst = 0.0;
  for (int m : {1, 2, 3, 5, 8}) {
    for (double snr : {0.1, 1.0, 10.0, 100.0}) {
      for (double gain : {1.0, 2.5}) {
        const FadingModel model(snr, std::vector<double>(m, gain),
                                std::vector<double>(m, gain));
        MuSolverOptions options;
        options.initial_guess.resize(m);
        for (int k = 0; k < m; ++k) options.initial_guess[k] = 0.2 + 0.6 * (k + 1) / (m + 1.0);
        const auto result = solve_mu_star(model, options);
        for (double mu : result.mu_star) worst = std::max(worst, std::abs(mu - 0.5));
      }
    }
  }
  out.require(worst <= 1e-6, "max |mu - 1/2| " + fmt(worst));
  if (out.passed) out.detail << "max |mu - 1/2| " << fmt(worst, 3) << " <= 1e-6";
}

// 5. Low-SNR rate ratio.
void low_snr(const VerificationOptions& opt, Outcome& out) {
  const double snr = db_to_linear(-20.0);
  for (int m : {1, 2, 5}) {
    const double target = m == 1 ? 3.0 : low_snr_ratio(m);
    const double closed = closed_form_rate_ba_iid_rayleigh(m, snr) /
                          closed_form_rate_conv_iid_rayleigh(m, snr);
    const auto model = FadingModel::iid(m, snr);
    const double simulated =
        run_simulation(make_config(model, ProtocolSpec::genie(SelectionWeights::uniform(m)),
                                   1'000'000, opt.seed))
            .avg_rate_sd /
        run_simulation(make_config(model, ProtocolSpec::conventional(), 1'000'000, opt.seed))
            .avg_rate_sd;
    out.require(relative_error(closed, target) <= 0.05,
                "M=" + std::to_string(m) + " closed-form ratio " + fmt(closed));
    out.require(relative_error(simulated, target) <= 0.05,
                "M=" + std::to_string(m) + " simulated ratio " + fmt(simulated));
    if (out.passed)
      out.detail << "M=" << m << ": " << fmt(closed) << "/" << fmt(simulated) << " vs "
                 << fmt(target) << "  ";
  }
}

// 6. High-SNR rate gap.
void high_snr(const VerificationOptions&, Outcome& out) {
  const double snr = db_to_linear(40.0);
  out.require(high_snr_gap(1) == 1.0, "high_snr_gap(1) = " + fmt(high_snr_gap(1), 17));
  for (int m : kGridRelays) {
    const double gap = closed_form_rate_ba_iid_rayleigh(m, snr) -
                       closed_form_rate_conv_iid_rayleigh(m, snr);
    const double diff = std::abs(gap - high_snr_gap(m));
    out.require(diff <= 0.05, "M=" + std::to_string(m) + " |gap error| " + fmt(diff));
    if (out.passed)
      out.detail << "M=" << m << ": " << fmt(gap) << " vs " << fmt(high_snr_gap(m)) << "  ";
  }
}

// 7. Flow balance of the genie protocol at the solved weights.
void flow_balance(const VerificationOptions& opt, Outcome& out) {
  for (double db : {0.0, 10.0, 20.0}) {
    const FadingModel model = five_relay_model(db);
    const auto mu = solve_mu_star(model).mu_star;
    const auto report = run_simulation(
        make_config(model, ProtocolSpec::genie(SelectionWeights(mu)), 1'000'000, opt.seed));
    const double largest =
        *std::max_element(report.per_relay_arrival.begin(), report.per_relay_arrival.end());
    const double ratio = report.max_abs_flow_residual() / largest;
    out.require(ratio <= 0.02, fmt(db) + " dB residual ratio " + fmt(ratio));
    if (out.passed) out.detail << fmt(db) << " dB: " << fmt(ratio, 3) << "  ";
  }
}

// 8. Adaptive weights converge to the solved weights.
void adaptive_convergence(const VerificationOptions& opt, Outcome& out) {
  const auto report = run_simulation(
      make_config(five_relay_model(0.0), ProtocolSpec::adaptive(), 100'000, opt.seed));
  double worst = 0.0;
  for (std::size_t k = 0; k < kFiveRelayMuStarAt0dB.size(); ++k)
    worst = std::max(worst, std::abs(report.final_mu_est[k] - kFiveRelayMuStarAt0dB[k]));
  out.require(worst <= 0.02, "max |mu_e - mu*| " + fmt(worst));
  if (out.passed) out.detail << "max |mu_e - mu*| " << fmt(worst, 3) << " <= 0.02";
}

// 9. Delay-limited protocol tracks T0 = 5 and stays below the genie rate.
void delay_limited(const VerificationOptions& opt, Outcome& out) {
  for (double db : {20.0, 25.0}) {
    const FadingModel model = five_relay_model(db);
    const auto limited =
        run_simulation(make_config(model, ProtocolSpec::delay_limited(5.0), 100'000, opt.seed));
    const auto mu = solve_mu_star(model).mu_star;
    const auto genie = run_simulation(
        make_config(model, ProtocolSpec::genie(SelectionWeights(mu)), 100'000, opt.seed));
    out.require(limited.avg_delay >= 4.5 && limited.avg_delay <= 5.5,
                fmt(db) + " dB delay " + fmt(limited.avg_delay));
    out.require(limited.avg_rate_sd < genie.avg_rate_sd,
                fmt(db) + " dB rate " + fmt(limited.avg_rate_sd) + " vs genie " +
                    fmt(genie.avg_rate_sd));
    if (out.passed)
      out.detail << fmt(db) << " dB: delay " << fmt(limited.avg_delay) << ", rate "
                 << fmt(limited.avg_rate_sd) << " < " << fmt(genie.avg_rate_sd) << "  ";
  }
}

// Drives a protocol slot by slot and checks the per-slot invariants.
void slot_invariants(const FadingModel& model, const ProtocolSpec& protocol,
                     std::uint64_t slots, std::uint64_t seed, Outcome& out) {
  const std::size_t m = model.num_relays();
  RandomStream stream(seed, m);
  NetworkState state(m);
  const StepFunction mu_step = default_mu_step();
  const StepFunction lambda_step = default_lambda_step(model.snr_ref());
  const std::string name = to_string(protocol.kind);
  for (std::uint64_t i = 1; i <= slots; ++i) {
    const auto caps = slot_capacities(sample_slot(model, stream));
    if (i > 1 && protocol.kind == ProtocolKind::BufferAidedAdaptive)
      update_mu_estimate(state, mu_step);
    if (i > 1 && protocol.kind == ProtocolKind::DelayLimited)
      update_lambda(state, protocol.delay_target, lambda_step);
    Decision d;
    switch (protocol.kind) {
      case ProtocolKind::BufferAidedGenie: d = select_buffer_aided(caps, *protocol.weights); break;
      case ProtocolKind::BufferAidedAdaptive:
        d = select_buffer_aided(caps, SelectionWeights(state.mu_est));
        break;
      case ProtocolKind::MaxLink: d = select_max_link(caps); break;
      case ProtocolKind::DelayLimited: d = select_delay_limited(caps, state); break;
      case ProtocolKind::Conventional: return;
    }
    const auto before = state.queues;
    const auto transfer = apply_decision(state, d, caps);
    update_rate_estimates(state, d, caps);

    bool ok = d.relay < m && std::isfinite(d.rate) && d.rate >= 0.0;
    int active = 0;
    double delta = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      ok = ok && state.queues[k] >= 0.0;
      if (state.queues[k] != before[k]) ++active;
      delta += state.queues[k] - before[k];
    }
    ok = ok && active <= 1;
    ok = ok && (transfer.bits_received == 0.0 || transfer.bits_delivered == 0.0);
    ok = ok && transfer.bits_delivered <= caps.rd[d.relay];
    ok = ok && std::abs(delta - (transfer.bits_received - transfer.bits_delivered)) <= 1e-9;
    if (!ok) {
      out.require(false, name + " slot invariant broken at slot " + std::to_string(i));
      return;
    }
  }
}

// 10. Property suite.
void properties(const VerificationOptions& opt, Outcome& out) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> gain(0.2, 3.0);
  std::uniform_real_distribution<double> weight(0.1, 0.9);

  std::vector<FadingModel> models{five_relay_model(10.0), FadingModel::iid(3, 10.0)};
  for (int trial = 0; trial < 3; ++trial) {
    const int m = 2 + trial;
    std::vector<double> sr(m), rd(m);
    for (int k = 0; k < m; ++k) {
      sr[k] = gain(rng);
      rd[k] = gain(rng);
    }
    models.emplace_back(db_to_linear(5.0 * trial), sr, rd);
  }

  int slot_checks = 0;
  for (const auto& model : models) {
    const std::size_t m = model.num_relays();
    std::vector<double> mu(m);
    for (auto& v : mu) v = weight(rng);
    const std::vector<ProtocolSpec> protocols{
        ProtocolSpec::genie(SelectionWeights(mu)), ProtocolSpec::adaptive(),
        ProtocolSpec::max_link(), ProtocolSpec::delay_limited(3.0)};
    for (const auto& protocol : protocols) {
      slot_invariants(model, protocol, 20'000, opt.seed + 11, out);
      ++slot_checks;
      const std::uint64_t n = 50'000;
      const auto report = run_simulation(make_config(model, protocol, n, opt.seed + 12));
      out.require(report.max_conservation_error <= 1e-9 * static_cast<double>(n),
                  to_string(protocol.kind) + " conservation error " +
                      fmt(report.max_conservation_error));
    }

    // Partition of unity over the 2M selection events.
    for (const auto& weights : {SelectionWeights(mu), SelectionWeights::uniform(m)}) {
      const EffectiveDensityContext ctx(model, weights);
      double total = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        total += selection_probability(ctx, LinkSide::Source, k);
        total += selection_probability(ctx, LinkSide::Destination, k);
      }
      out.require(std::abs(total - 1.0) <= 1e-6, "partition of unity " + fmt(total, 12));
    }
  }

  // Max-link equals the weighted rule at mu = 1/2 on i.i.d. links.
  for (int m : {1, 3, 6}) {
    for (double db : {0.0, 15.0}) {
      const auto model = FadingModel::iid(m, db_to_linear(db));
      auto genie_cfg = make_config(model, ProtocolSpec::genie(SelectionWeights::uniform(m)),
                                   20'000, opt.seed + 13);
      auto max_cfg = make_config(model, ProtocolSpec::max_link(), 20'000, opt.seed + 13);
      genie_cfg.record_decisions = max_cfg.record_decisions = true;
      out.require(run_simulation(genie_cfg).decisions == run_simulation(max_cfg).decisions,
                  "max-link trace differs from genie(1/2) for M=" + std::to_string(m));
    }
  }

  // Determinism under a fixed seed.
  for (const auto& protocol : {ProtocolSpec::adaptive(), ProtocolSpec::delay_limited(5.0),
                               ProtocolSpec::conventional()}) {
    const auto cfg = make_config(five_relay_model(10.0), protocol, 20'000, opt.seed + 14);
    out.require(run_simulation(cfg) == run_simulation(cfg),
                to_string(protocol.kind) + " is not deterministic");
  }

  if (out.passed)
    out.detail << slot_checks << " slot-invariant runs, conservation, partition of unity, "
               << "max-link trace equality, determinism";
}

// 11. Signalling overhead table.
void overhead(const VerificationOptions&, Outcome& out) {
  for (int m = 1; m <= 10; ++m) {
    for (auto family : {ProtocolFamily::Conventional, ProtocolFamily::BufferAided}) {
      const OverheadCount central{2 * m + 4, 2 * m + 5};
      const OverheadCount distributed{4, 4};
      out.require(signaling_overhead(m, Implementation::Centralized, family) == central,
                  "centralized M=" + std::to_string(m));
      out.require(signaling_overhead(m, Implementation::Distributed, family) == distributed,
                  "distributed M=" + std::to_string(m));
    }
  }
  if (out.passed) out.detail << "centralized (2M+4, 2M+5), distributed 4 for M = 1..10";
}

struct Criterion {
  const char* title;
  void (*check)(const VerificationOptions&, Outcome&);
};

constexpr Criterion kCriteria[kAcceptanceCriteria] = {
    {"closed-form match, buffer-aided (1%)", closed_form_buffer_aided},
    {"closed-form match, conventional (1%)", closed_form_conventional},
    {"quadrature vs closed form (1e-6)", dual_route},
    {"i.i.d. flow-balance fixed point mu=1/2 (1e-6)", iid_fixed_point},
    {"low-SNR rate ratio (5%)", low_snr},
    {"high-SNR rate gap (0.05 bit)", high_snr},
    {"flow balance at mu* (2%)", flow_balance},
    {"adaptive mu convergence (0.02)", adaptive_convergence},
    {"delay-limited convergence to T0=5", delay_limited},
    {"property suite", properties},
    {"signalling overhead table", overhead},
};

}  // namespace

CriterionResult run_criterion(int id, const VerificationOptions& options) {
  if (id < 1 || id > kAcceptanceCriteria)
    throw std::out_of_range("no acceptance criterion " + std::to_string(id));
  const Criterion& criterion = kCriteria[id - 1];
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    criterion.check(options, outcome);
  } catch (const std::exception& e) {
    outcome.require(false, std::string("exception: ") + e.what());
  }
  CriterionResult result;
  result.id = id;
  result.title = criterion.title;
  result.passed = outcome.passed;
  result.detail = outcome.detail.str();
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<CriterionResult> run_acceptance_suite(const VerificationOptions& options) {
  std::vector<CriterionResult> results;
  for (int id = 1; id <= kAcceptanceCriteria; ++id) results.push_back(run_criterion(id, options));
  return results;
}

void print_result(std::ostream& os, const CriterionResult& r) {
  os << (r.passed ? "[PASS] " : "[FAIL] ") << std::setw(2) << r.id << ' ' << r.title << " ("
     << std::fixed << std::setprecision(1) << r.seconds << " s): " << r.detail << '\n';
  os.unsetf(std::ios::fixed);
}

}  // namespace barelay
