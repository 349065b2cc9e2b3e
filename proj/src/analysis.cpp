#include "barelay/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "barelay/special_functions.hpp"
#include "detail/expint_impl.hpp"

namespace barelay {

namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;

// (1 + x)^exponent - 1 without cancellation for small arguments.
double warp(double x, double exponent) {
  return std::expm1(exponent * std::log1p(x));
}

void require_relays(int num_relays) {
  if (num_relays < 1) throw std::invalid_argument("relay count must be at least 1");
}

void require_closed_form_range(int num_relays, double avg_snr) {
  require_relays(num_relays);
  if (num_relays > kMaxClosedFormRelays)
    throw std::range_error("closed-form rate supports at most " +
                           std::to_string(kMaxClosedFormRelays) + " relays");
  if (!(avg_snr > 0.0) || !std::isfinite(avg_snr))
    throw std::domain_error("average SNR must be positive and finite");
}

// sum_{k=0}^{n} C(n, k) (-1)^k / (1 + k) * term(1 + k), accumulated in Wide.
template <typename Term>
Wide alternating_binomial_sum(int n, Term term) {
  Wide binomial = 1;
  Wide sum = 0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) binomial = binomial * (n - k + 1) / k;
    const Wide signed_weight = (k % 2 == 0 ? binomial : -binomial) / (k + 1);
    sum += signed_weight * term(k + 1);
  }
  return sum;
}

double harmonic(int n) {
  double h = 0.0;
  for (int k = n; k >= 1; --k) h += 1.0 / k;
  return h;
}

// sum_{k=0}^{n} C(n,k) (-1)^k log2(1+k) / (1+k)
Wide log_weighted_alternating_sum(int n) {
  const Wide ln2 = boost::multiprecision::log(Wide(2));
  return alternating_binomial_sum(
      n, [&](int j) { return Wide(boost::multiprecision::log(Wide(j)) / ln2); });
}

}  // namespace

double LinkDistribution::pdf(double x) const {
  if (x < 0.0) return 0.0;
  return std::exp(-x / mean) / mean;
}

double LinkDistribution::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  return -std::expm1(-x / mean);
}

EffectiveDensityContext::EffectiveDensityContext(const FadingModel& model,
                                                 SelectionWeights mu)
    : mu_(std::move(mu)) {
  if (mu_.size() != model.num_relays())
    throw std::invalid_argument("selection weights do not match the relay count");
  for (std::size_t k = 0; k < model.num_relays(); ++k) {
    sr_.push_back({model.avg_snr_sr(k)});
    rd_.push_back({model.avg_snr_rd(k)});
  }
}

double effective_pdf_source(double x, std::size_t k, const EffectiveDensityContext& ctx) {
  const auto& mu = ctx.weights();
  const double mk = mu[k];
  double value = ctx.source_link(k).pdf(x) *
                 ctx.relay_link(k).cdf(warp(x, mk / (1.0 - mk)));
  for (std::size_t j = 0; j < ctx.num_relays() && value > 0.0; ++j) {
    if (j == k) continue;
    value *= ctx.source_link(j).cdf(warp(x, mk / mu[j])) *
             ctx.relay_link(j).cdf(warp(x, mk / (1.0 - mu[j])));
  }
  return value;
}

double effective_pdf_relay(double x, std::size_t k, const EffectiveDensityContext& ctx) {
  const auto& mu = ctx.weights();
  const double wk = 1.0 - mu[k];
  double value = ctx.relay_link(k).pdf(x) * ctx.source_link(k).cdf(warp(x, wk / mu[k]));
  for (std::size_t j = 0; j < ctx.num_relays() && value > 0.0; ++j) {
    if (j == k) continue;
    value *= ctx.source_link(j).cdf(warp(x, wk / mu[j])) *
             ctx.relay_link(j).cdf(warp(x, wk / (1.0 - mu[j])));
  }
  return value;
}

double integration_upper_limit(double mean_snr) {
  static const double kTailDecades = std::log(1e16);
  return mean_snr * kTailDecades;
}

double expected_log_rate(const Density& density, double upper_limit,
                         const QuadratureOptions& options) {
  return integrate([&](double x) { return std::log2(1.0 + x) * density(x); }, 0.0,
                   upper_limit, options)
      .value;
}

namespace {

Density bind_density(const EffectiveDensityContext& ctx, LinkSide side, std::size_t k) {
  if (k >= ctx.num_relays()) throw std::out_of_range("relay index out of range");
  if (side == LinkSide::Source)
    return [&ctx, k](double x) { return effective_pdf_source(x, k, ctx); };
  return [&ctx, k](double x) { return effective_pdf_relay(x, k, ctx); };
}

double link_mean(const EffectiveDensityContext& ctx, LinkSide side, std::size_t k) {
  return side == LinkSide::Source ? ctx.source_link(k).mean : ctx.relay_link(k).mean;
}

}  // namespace

double expected_log_rate(const EffectiveDensityContext& ctx, LinkSide side, std::size_t k,
                         const QuadratureOptions& options) {
  return expected_log_rate(bind_density(ctx, side, k),
                           integration_upper_limit(link_mean(ctx, side, k)), options);
}

double selection_probability(const EffectiveDensityContext& ctx, LinkSide side,
                             std::size_t k, const QuadratureOptions& options) {
  return integrate(bind_density(ctx, side, k), 0.0,
                   integration_upper_limit(link_mean(ctx, side, k)), options)
      .value;
}

std::vector<double> flow_residuals(const FadingModel& model, const SelectionWeights& mu,
                                   const QuadratureOptions& options) {
  const EffectiveDensityContext ctx(model, mu);
  std::vector<double> residuals(model.num_relays());
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    residuals[k] = expected_log_rate(ctx, LinkSide::Source, k, options) -
                   expected_log_rate(ctx, LinkSide::Destination, k, options);
  }
  return residuals;
}

double max_rate_analytical(const FadingModel& model, const SelectionWeights& mu_star,
                           const QuadratureOptions& options) {
  const EffectiveDensityContext ctx(model, mu_star);
  double rate = 0.0;
  for (std::size_t k = 0; k < model.num_relays(); ++k)
    rate += expected_log_rate(ctx, LinkSide::Destination, k, options);
  return rate;
}

double iid_rate_quadrature(int num_relays, double avg_snr, const QuadratureOptions& options) {
  require_relays(num_relays);
  const LinkDistribution link{avg_snr};
  const int power = 2 * num_relays - 1;
  const double integral = expected_log_rate(
      [&](double x) { return link.pdf(x) * std::pow(link.cdf(x), power); },
      integration_upper_limit(avg_snr), options);
  return num_relays * integral;
}

double conventional_rate_analytical(const FadingModel& model,
                                    const QuadratureOptions& options) {
  // The bottleneck min{gamma_Sk, gamma_kD} is exponential with this mean.
  std::vector<double> bottleneck_mean(model.num_relays());
  double largest = 0.0;
  for (std::size_t k = 0; k < model.num_relays(); ++k) {
    bottleneck_mean[k] = 1.0 / (1.0 / model.avg_snr_sr(k) + 1.0 / model.avg_snr_rd(k));
    largest = std::max(largest, bottleneck_mean[k]);
  }
  // E[log2(1+X)] = (1/ln 2) integral (1 - F_X(x)) / (1 + x) dx
  auto survival = [&](double x) {
    double log_cdf = 0.0;
    for (double mean : bottleneck_mean) log_cdf += std::log(-std::expm1(-x / mean));
    return -std::expm1(log_cdf) / (1.0 + x);
  };
  const double integral =
      integrate(survival, 0.0, integration_upper_limit(largest), options).value;
  return 0.5 * integral / std::numbers::ln2;
}

double closed_form_rate_ba_iid_rayleigh(int num_relays, double avg_snr) {
  require_closed_form_range(num_relays, avg_snr);
  const Wide inv_snr = Wide(1) / Wide(avg_snr);
  const Wide sum = alternating_binomial_sum(2 * num_relays - 1, [&](int j) {
    return detail::scaled_e1(Wide(j) * inv_snr);
  });
  return static_cast<double>(Wide(num_relays) * sum / boost::multiprecision::log(Wide(2)));
}

double closed_form_rate_conv_iid_rayleigh(int num_relays, double avg_snr) {
  require_closed_form_range(num_relays, avg_snr);
  const Wide inv_snr = Wide(1) / Wide(avg_snr);
  const Wide sum = alternating_binomial_sum(num_relays - 1, [&](int j) {
    return detail::scaled_e1(Wide(2 * j) * inv_snr);
  });
  return static_cast<double>(Wide(num_relays) / 2 * sum /
                             boost::multiprecision::log(Wide(2)));
}

double low_snr_ratio(int num_relays) {
  require_relays(num_relays);
  return 2.0 * harmonic(2 * num_relays) / harmonic(num_relays);
}

double high_snr_gap(int num_relays) {
  require_relays(num_relays);
  if (num_relays > kMaxClosedFormRelays)
    throw std::range_error("high-SNR gap supports at most " +
                           std::to_string(kMaxClosedFormRelays) + " relays");
  const Wide m = num_relays;
  const Wide gap = Wide(1) / 2 + m / 2 * log_weighted_alternating_sum(num_relays - 1) -
                   m * log_weighted_alternating_sum(2 * num_relays - 1);
  return static_cast<double>(gap);
}

double asymptotic_rate(int num_relays, double avg_snr, SnrRegime regime,
                       ProtocolFamily protocol) {
  require_closed_form_range(num_relays, avg_snr);
  const double ln2 = std::numbers::ln2;
  const double m = num_relays;
  if (regime == SnrRegime::Low) {
    return protocol == ProtocolFamily::BufferAided
               ? avg_snr / (2.0 * ln2) * harmonic(2 * num_relays)
               : avg_snr / (4.0 * ln2) * harmonic(num_relays);
  }
  const double leading = (std::log(avg_snr) - kEulerMascheroni) / (2.0 * ln2);
  if (protocol == ProtocolFamily::BufferAided) {
    return leading -
           m * static_cast<double>(log_weighted_alternating_sum(2 * num_relays - 1));
  }
  return leading - m / 2.0 * static_cast<double>(log_weighted_alternating_sum(num_relays - 1)) -
         0.5;
}

}  // namespace barelay
