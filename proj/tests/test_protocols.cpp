#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "barelay/protocols.hpp"

using namespace barelay;

namespace {

SlotCapacities caps_from_snr(std::vector<double> sr, std::vector<double> rd) {
  SlotRealization slot{std::move(sr), std::move(rd), 0};
  return slot_capacities(slot);
}

}  // namespace

TEST_CASE("conventional selection") {
  const SlotRealization one{{3.0}, {1.0}, 0};
  const auto c = select_conventional(one);
  CHECK(c.relay == 0);
  CHECK(c.rate == doctest::Approx(0.5));

  const SlotCapacities two{{1.0, 3.0}, {2.0, 1.4}};
  CHECK(select_conventional(two).relay == 1);
  CHECK(select_conventional(two).rate == doctest::Approx(0.7));
}

TEST_CASE("buffer-aided selection") {
  const SlotRealization slot{{3.0}, {1.0}, 0};
  const auto d = select_buffer_aided(slot, SelectionWeights::uniform(1));
  CHECK(d.relay == 0);
  CHECK(d.mode == Mode::Receive);

  const auto tie = select_buffer_aided(caps_from_snr({2.0, 2.0}, {2.0, 2.0}),
                                       SelectionWeights::uniform(2));
  CHECK(tie.relay == 0);
  CHECK(tie.mode == Mode::Receive);

  // A small mu suppresses reception.
  const auto t = select_buffer_aided(caps_from_snr({3.0}, {1.0}), SelectionWeights({0.2}));
  CHECK(t.mode == Mode::Transmit);
}

TEST_CASE("selection weights are validated") {
  CHECK_THROWS_AS(SelectionWeights({0.0}), std::invalid_argument);
  CHECK_THROWS_AS(SelectionWeights({0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SelectionWeights({}), std::invalid_argument);
  CHECK(SelectionWeights::uniform(3, 0.25)[2] == 0.25);
}

TEST_CASE("equal weights pick the strongest link") {
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> gain(0.1);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t m = 1 + trial % 6;
    SlotCapacities caps;
    for (std::size_t k = 0; k < m; ++k) {
      caps.sr.push_back(capacity(gain(rng)));
      caps.rd.push_back(capacity(gain(rng)));
    }
    double best = -1.0;
    Decision expected;
    for (std::size_t k = 0; k < m; ++k) {
      if (caps.sr[k] > best) {
        best = caps.sr[k];
        expected = {k, Mode::Receive, 0.0};
      }
      if (caps.rd[k] > best) {
        best = caps.rd[k];
        expected = {k, Mode::Transmit, 0.0};
      }
    }
    CHECK(select_buffer_aided(caps, SelectionWeights::uniform(m)) == expected);
    CHECK(select_max_link(caps) == expected);
  }
}

TEST_CASE("scaling every capacity keeps the decision") {
  const auto caps = caps_from_snr({1.0, 5.0, 2.0}, {4.0, 0.3, 9.0});
  SlotCapacities scaled = caps;
  for (auto& c : scaled.sr) c *= 3.5;
  for (auto& c : scaled.rd) c *= 3.5;
  const SelectionWeights mu({0.3, 0.6, 0.45});
  CHECK(select_buffer_aided(caps, mu) == select_buffer_aided(scaled, mu));
}

TEST_CASE("delay-limited selection") {
  NetworkState state(1);
  state.lambda_est = {1.0};
  state.queues = {0.0};
  const SlotCapacities caps{{1.0}, {2.0}};
  CHECK(select_delay_limited(caps, state).mode == Mode::Receive);

  state.lambda_est = {1e-3};
  state.queues = {50.0};
  CHECK(select_delay_limited(caps, state).mode == Mode::Transmit);

  NetworkState two(2);
  two.lambda_est = {1.0, 1.0};
  two.queues = {0.0, 3.0};
  const SlotCapacities caps2{{1.0, 0.5}, {1.0, 2.0}};
  const auto d = select_delay_limited(caps2, two);
  CHECK(d.relay == 1);
  CHECK(d.mode == Mode::Transmit);
}

TEST_CASE("apply_decision moves bits") {
  NetworkState state(2);
  const SlotCapacities caps{{2.0, 1.0}, {2.0, 1.0}};

  state.queues = {5.0, 0.0};
  Decision rx{0, Mode::Receive, 0.0};
  auto t = apply_decision(state, rx, caps);
  CHECK(state.queues[0] == 7.0);
  CHECK(t.bits_received == 2.0);
  CHECK(t.bits_delivered == 0.0);
  CHECK(rx.rate == 2.0);

  state.queues = {1.5, 0.0};
  Decision tx{0, Mode::Transmit, 0.0};
  t = apply_decision(state, tx, caps);
  CHECK(t.bits_delivered == 1.5);
  CHECK(state.queues[0] == 0.0);
  CHECK(state.queues[1] == 0.0);

  Decision empty{1, Mode::Transmit, 0.0};
  t = apply_decision(state, empty, caps);
  CHECK(t.bits_delivered == 0.0);
  CHECK(state.queues[1] == 0.0);

  Decision bad{2, Mode::Receive, 0.0};
  CHECK_THROWS_AS(apply_decision(state, bad, caps), std::out_of_range);
}

TEST_CASE("running rate estimates") {
  NetworkState state(2);
  const SlotCapacities caps{{2.0, 1.0}, {3.0, 1.0}};
  Decision d{0, Mode::Receive, 0.0};
  update_rate_estimates(state, d, caps);
  CHECK(state.slot_count == 1);
  CHECK(state.arrival_rate_est[0] == 2.0);
  CHECK(state.arrival_rate_est[1] == 0.0);

  Decision other{1, Mode::Transmit, 0.0};
  update_rate_estimates(state, other, caps);
  CHECK(state.arrival_rate_est[0] == 1.0);
  CHECK(state.departure_rate_est[1] == 0.5);
}

TEST_CASE("mu estimate moves toward flow balance") {
  NetworkState state(3);
  state.slot_count = 3;
  state.arrival_rate_est = {1.0, 2.0, 1.0};
  state.departure_rate_est = {1.0, 1.0, 2.0};
  update_mu_estimate(state, default_mu_step());
  CHECK(state.mu_est[0] == kMuInitial);
  CHECK(state.mu_est[1] < kMuInitial);
  CHECK(state.mu_est[2] > kMuInitial);
  CHECK(state.mu_est[2] == doctest::Approx(0.5 + 0.1 / 2.0));

  state.departure_rate_est = {1.0, 1.0, 1e6};
  update_mu_estimate(state, default_mu_step());
  CHECK(state.mu_est[2] == kMuClampHigh);
}

TEST_CASE("lambda feedback") {
  const auto step = [](std::uint64_t) { return 0.1; };
  NetworkState state(3);
  state.arrival_rate_est = {1.0, 1.0, 0.0};
  state.queues = {5.0, 8.0, 2.0};
  update_lambda(state, 5.0, step);
  CHECK(state.lambda_est[0] == kLambdaInitial);
  CHECK(state.lambda_est[1] < kLambdaInitial);
  CHECK(state.lambda_est[2] == doctest::Approx(kLambdaInitial + 0.1 * 5.0));

  state.queues = {5.0, 1e9, 0.0};
  update_lambda(state, 5.0, step);
  CHECK(state.lambda_est[1] == kLambdaFloor);
}

TEST_CASE("default step sizes") {
  CHECK(default_mu_step()(4) == doctest::Approx(0.05));
  CHECK(default_lambda_step(3.0)(1) == doctest::Approx(0.0025));
}

TEST_CASE("initial network state") {
  const NetworkState state(4);
  CHECK(state.num_relays() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(state.queues[k] == 0.0);
    CHECK(state.mu_est[k] == kMuInitial);
    CHECK(state.lambda_est[k] == kLambdaInitial);
  }
}
