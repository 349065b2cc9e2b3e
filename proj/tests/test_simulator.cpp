#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "barelay/analysis.hpp"
#include "barelay/simulator.hpp"
#include "barelay/verification.hpp"

using namespace barelay;

namespace {

SimulationConfig config(const FadingModel& model, ProtocolSpec protocol, std::uint64_t slots,
                        std::uint64_t seed = 1) {
  return SimulationConfig{.model = model,
                          .protocol = std::move(protocol),
                          .num_slots = slots,
                          .seed = seed,
                          .mu_step = std::nullopt,
                          .lambda_step = std::nullopt,
                          .metric_stride = 1000,
                          .burn_in = 0,
                          .record_decisions = false};
}

}  // namespace

TEST_CASE("conventional rate matches the closed form") {
  const auto report =
      run_simulation(config(FadingModel::iid(5, 10.0), ProtocolSpec::conventional(), 1'000'000));
  CHECK(report.avg_rate_sd ==
        doctest::Approx(closed_form_rate_conv_iid_rayleigh(5, 10.0)).epsilon(0.01));
  CHECK(report.avg_delay == 1.0);
}

TEST_CASE("buffer-aided rate at mu = 1/2 matches the closed form") {
  const auto report = run_simulation(config(
      FadingModel::iid(2, 10.0), ProtocolSpec::genie(SelectionWeights::uniform(2)), 1'000'000));
  CHECK(report.avg_rate_sd ==
        doctest::Approx(closed_form_rate_ba_iid_rayleigh(2, 10.0)).epsilon(0.01));
  CHECK(report.max_conservation_error <= 1e-9 * 1e6);
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(std::abs(report.flow_residuals[k]) < 0.02 * report.per_relay_arrival[k]);
}

TEST_CASE("delay-limited protocol holds its target") {
  const auto report =
      run_simulation(config(five_relay_model(20.0), ProtocolSpec::delay_limited(5.0), 100'000));
  CHECK(report.avg_delay >= 4.5);
  CHECK(report.avg_delay <= 5.5);
  CHECK(report.final_lambda_est.size() == 5);
}

TEST_CASE("genie delay exceeds a small delay target") {
  const auto model = five_relay_model(10.0);
  const auto mu = solve_mu_star(model).mu_star;
  const auto genie =
      run_simulation(config(model, ProtocolSpec::genie(SelectionWeights(mu)), 100'000, 3));
  const auto limited = run_simulation(config(model, ProtocolSpec::delay_limited(3.0), 100'000, 3));
  CHECK(genie.avg_delay > limited.avg_delay);
}

TEST_CASE("max-link coincides with equal weights on i.i.d. links") {
  auto a = config(FadingModel::iid(4, 3.0), ProtocolSpec::max_link(), 5000, 9);
  auto b = config(FadingModel::iid(4, 3.0), ProtocolSpec::genie(SelectionWeights::uniform(4)),
                  5000, 9);
  a.record_decisions = b.record_decisions = true;
  const auto ra = run_simulation(a), rb = run_simulation(b);
  CHECK(ra.decisions.size() == 5000);
  CHECK(ra.decisions == rb.decisions);
  CHECK(ra.avg_rate_sd == rb.avg_rate_sd);
}

TEST_CASE("reports are deterministic") {
  for (const auto& protocol : {ProtocolSpec::adaptive(), ProtocolSpec::delay_limited(4.0),
                               ProtocolSpec::max_link(), ProtocolSpec::conventional()}) {
    const auto c = config(five_relay_model(5.0), protocol, 20'000, 4);
    CHECK(run_simulation(c) == run_simulation(c));
  }
  const auto x = run_simulation(config(five_relay_model(5.0), ProtocolSpec::adaptive(), 20'000, 4));
  const auto y = run_simulation(config(five_relay_model(5.0), ProtocolSpec::adaptive(), 20'000, 5));
  CHECK(x.avg_rate_sd != y.avg_rate_sd);
}

TEST_CASE("conservation and trajectory") {
  auto c = config(five_relay_model(0.0), ProtocolSpec::adaptive(), 10'000);
  c.metric_stride = 1000;
  const auto report = run_simulation(c);
  CHECK(report.trajectory.size() == 10);
  CHECK(report.trajectory.back().slot == 10'000);
  double queued = 0.0;
  for (double q : report.final_queues) {
    CHECK(q >= 0.0);
    queued += q;
  }
  CHECK(std::abs(report.total_received - report.total_delivered - queued) <= 1e-9 * 1e4);
  for (double mu : report.final_mu_est) {
    CHECK(mu >= kMuClampLow);
    CHECK(mu <= kMuClampHigh);
  }
  CHECK_FALSE(report.estimator_pinned);
}

TEST_CASE("burn-in shortens the averaging window") {
  auto c = config(FadingModel::iid(2, 10.0), ProtocolSpec::max_link(), 10'000);
  c.burn_in = 2000;
  CHECK(run_simulation(c).slots_averaged == 8000);
}

TEST_CASE("configuration validation") {
  auto c = config(FadingModel::iid(2, 10.0), ProtocolSpec::max_link(), 0);
  CHECK_THROWS_AS(run_simulation(c), std::invalid_argument);
  c = config(FadingModel::iid(2, 10.0), ProtocolSpec::genie(SelectionWeights::uniform(3)), 10);
  CHECK_THROWS_AS(run_simulation(c), std::invalid_argument);
  c = config(FadingModel::iid(2, 10.0), ProtocolSpec::delay_limited(0.0), 10);
  CHECK_THROWS_AS(run_simulation(c), std::invalid_argument);
  c = config(FadingModel::iid(2, 10.0), ProtocolSpec::max_link(), 10);
  c.burn_in = 10;
  CHECK_THROWS_AS(run_simulation(c), std::invalid_argument);
}

TEST_CASE("parallel runs keep input order") {
  std::vector<SimulationConfig> configs;
  for (int m = 1; m <= 6; ++m)
    configs.push_back(config(FadingModel::iid(m, 10.0), ProtocolSpec::max_link(), 5000, m));
  const auto reports = run_simulations(configs, 3);
  REQUIRE(reports.size() == configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    CHECK(reports[i].per_relay_arrival.size() == i + 1);
    CHECK(reports[i] == run_simulation(configs[i]));
  }
}

TEST_CASE("average delay") {
  CHECK(average_delay(5.0, 1.0) == 5.0);
  CHECK(average_delay(10.0, 1.0) == 2.0 * average_delay(5.0, 1.0));
  CHECK_THROWS_AS(average_delay(1.0, 0.0), std::domain_error);
}

TEST_CASE("signalling overhead") {
  CHECK(signaling_overhead(5, Implementation::Centralized, ProtocolFamily::BufferAided) ==
        OverheadCount{14, 15});
  CHECK(signaling_overhead(1, Implementation::Centralized, ProtocolFamily::Conventional) ==
        OverheadCount{6, 7});
  for (int m = 1; m <= 20; ++m)
    CHECK(signaling_overhead(m, Implementation::Distributed, ProtocolFamily::BufferAided) ==
          OverheadCount{4, 4});
  CHECK_THROWS(signaling_overhead(0, Implementation::Distributed, ProtocolFamily::BufferAided));
}

TEST_CASE("protocol names") {
  CHECK(to_string(ProtocolKind::Conventional) == "conventional");
  CHECK(to_string(ProtocolKind::BufferAidedGenie) == "genie");
  CHECK(to_string(ProtocolKind::BufferAidedAdaptive) == "adaptive");
  CHECK(to_string(ProtocolKind::MaxLink) == "max-link");
  CHECK(to_string(ProtocolKind::DelayLimited) == "delay-limited");
}
