#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "barelay/channel.hpp"

using namespace barelay;

namespace {

std::vector<double> draw_sr(const FadingModel& model, std::uint64_t seed, std::size_t k,
                            int slots) {
  RandomStream stream(seed, model.num_relays());
  std::vector<double> out;
  out.reserve(slots);
  for (int i = 0; i < slots; ++i) out.push_back(sample_slot(model, stream).gamma_sr[k]);
  return out;
}

}  // namespace

TEST_CASE("model construction") {
  CHECK_THROWS_AS(FadingModel(1.0, {0.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(FadingModel(1.0, {1.0, 2.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(FadingModel(-1.0, {1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(FadingModel(1.0, {}, {}), std::invalid_argument);
  const FadingModel model(2.0, {0.5, 1.5}, {3.0, 1.0});
  CHECK(model.num_relays() == 2);
  CHECK(model.avg_snr_sr(1) == doctest::Approx(3.0));
  CHECK(model.avg_snr_rd(0) == doctest::Approx(6.0));
  CHECK_FALSE(model.is_iid());
  CHECK(FadingModel::iid(3, 10.0).is_iid());
  CHECK(model.with_snr_ref(4.0).avg_snr_rd(0) == doctest::Approx(12.0));
}

TEST_CASE("sample mean matches configured mean") {
  const FadingModel model(10.0, {1.0}, {1.0});
  const auto x = draw_sr(model, 42, 0, 1'000'000);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  CHECK(std::abs(mean - 10.0) / 10.0 < 0.01);
}

TEST_CASE("empirical CDF is close to the exponential law") {
  const FadingModel model(1.0, {2.5, 0.7}, {1.0, 1.0});
  auto x = draw_sr(model, 5, 1, 100'000);
  std::sort(x.begin(), x.end());
  const double mean = 0.7;
  double ks = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 1.0 - std::exp(-x[i] / mean);
    ks = std::max({ks, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  CHECK(ks < 0.01);
}

TEST_CASE("links are uncorrelated") {
  const FadingModel model(10.0, {1.0, 1.0}, {1.0, 1.0});
  RandomStream stream(9, 2);
  const int n = 100'000;
  std::vector<double> a(n), b(n), c(n);
  for (int i = 0; i < n; ++i) {
    const auto slot = sample_slot(model, stream);
    a[i] = slot.gamma_sr[0];
    b[i] = slot.gamma_rd[1];
    c[i] = slot.gamma_rd[0];
  }
  auto corr = [n](const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
  };
  CHECK(std::abs(corr(a, b)) < 0.02);
  CHECK(std::abs(corr(a, c)) < 0.02);
}

TEST_CASE("streams are reproducible") {
  const FadingModel model(3.0, {1.0, 2.0}, {0.5, 1.0});
  RandomStream s1(7, 2), s2(7, 2), s3(8, 2);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto a = sample_slot(model, s1);
    const auto b = sample_slot(model, s2);
    const auto c = sample_slot(model, s3);
    CHECK(a.gamma_sr == b.gamma_sr);
    CHECK(a.gamma_rd == b.gamma_rd);
    CHECK(a.slot_index == b.slot_index);
    differs = differs || a.gamma_sr != c.gamma_sr;
  }
  CHECK(differs);
}

TEST_CASE("adding a relay keeps the existing links' fading") {
  const FadingModel small(3.0, {1.0, 2.0}, {0.5, 1.0});
  const FadingModel large(3.0, {1.0, 2.0, 4.0}, {0.5, 1.0, 1.0});
  RandomStream a(11, 2), b(11, 3);
  SlotRealization x, y;
  for (int i = 0; i < 500; ++i) {
    sample_slot_into(small, a, x);
    sample_slot_into(large, b, y);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(x.gamma_sr[k] == y.gamma_sr[k]);
      CHECK(x.gamma_rd[k] == y.gamma_rd[k]);
    }
  }
}

TEST_CASE("uniforms lie in [0, 1)") {
  RandomStream stream(1, 1);
  for (int i = 0; i < 10000; ++i) {
    const double u = stream.uniform_sr(0);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("capacity") {
  CHECK(capacity(0.0) == 0.0);
  CHECK(capacity(1.0) == 1.0);
  CHECK(capacity(3.0) == 2.0);
  CHECK_THROWS_AS(capacity(-1e-12), std::domain_error);
  CHECK_THROWS_AS(capacity(std::numeric_limits<double>::infinity()), std::domain_error);
  CHECK_THROWS_AS(capacity(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
}

TEST_CASE("capacity is increasing and concave") {
  for (double a : {0.0, 0.01, 0.5, 3.0, 40.0, 1e4}) {
    for (double h : {1e-3, 0.3, 7.0}) {
      const double b = a + h, c = a + 2 * h;
      CHECK(capacity(b) > capacity(a));
      CHECK(capacity(b) >= 0.5 * (capacity(a) + capacity(c)));
    }
  }
}

TEST_CASE("dB conversion") {
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(db_to_linear(-20.0) == doctest::Approx(0.01));
  CHECK(linear_to_db(db_to_linear(13.7)) == doctest::Approx(13.7));
}
