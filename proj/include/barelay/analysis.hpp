#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "barelay/channel.hpp"
#include "barelay/protocols.hpp"
#include "barelay/quadrature.hpp"

namespace barelay {

// Exponential SNR law of a Rayleigh-faded link.
struct LinkDistribution {
  double mean = 1.0;
  double pdf(double x) const;
  double cdf(double x) const;
};

enum class LinkSide { Source, Destination };

// Everything needed to evaluate the densities of the SNR seen on a link in
// the slots where that link wins the weighted selection.
class EffectiveDensityContext {
 public:
  EffectiveDensityContext(const FadingModel& model, SelectionWeights mu);

  std::size_t num_relays() const { return sr_.size(); }
  const SelectionWeights& weights() const { return mu_; }
  const LinkDistribution& source_link(std::size_t k) const { return sr_.at(k); }
  const LinkDistribution& relay_link(std::size_t k) const { return rd_.at(k); }

 private:
  SelectionWeights mu_;
  std::vector<LinkDistribution> sr_;
  std::vector<LinkDistribution> rd_;
};

// Density of gamma_Sk restricted to slots where mu_k C_Sk is the maximum.
double effective_pdf_source(double x, std::size_t k, const EffectiveDensityContext& ctx);
// Density of gamma_kD restricted to slots where (1 - mu_k) C_kD is the maximum.
double effective_pdf_relay(double x, std::size_t k, const EffectiveDensityContext& ctx);

// Upper integration limit for a density dominated by an exponential with the
// given mean: the tail mass beyond it is below 1e-16.
double integration_upper_limit(double mean_snr);

using Density = std::function<double(double)>;

// Integral of log2(1 + x) density(x) over [0, upper_limit].
double expected_log_rate(const Density& density, double upper_limit,
                         const QuadratureOptions& options = {});
double expected_log_rate(const EffectiveDensityContext& ctx, LinkSide side,
                         std::size_t k, const QuadratureOptions& options = {});

// Integral of the effective density itself: the probability that the link
// is selected.
double selection_probability(const EffectiveDensityContext& ctx, LinkSide side,
                             std::size_t k, const QuadratureOptions& options = {});

// Per-relay imbalance E[log2(1+Gamma_Sk)] - E[log2(1+Gamma_kD)].
std::vector<double> flow_residuals(const FadingModel& model, const SelectionWeights& mu,
                                   const QuadratureOptions& options = {});

struct MuSolverOptions {
  double tolerance = 1e-8;
  int max_iterations = 100;
  double jacobian_step = 1e-4;
  int max_step_halvings = 20;
  double boundary_margin = 1e-6;
  QuadratureOptions quadrature{};
  // Starting point; empty means 1/2 for every relay.
  std::vector<double> initial_guess;
};

struct MuSolverResult {
  std::vector<double> mu_star;
  double residual_norm = 0.0;
  int iterations = 0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> last_iterate,
              double residual_norm)
      : std::runtime_error(what),
        last_iterate_(std::move(last_iterate)),
        residual_norm_(residual_norm) {}
  const std::vector<double>& last_iterate() const { return last_iterate_; }
  double residual_norm() const { return residual_norm_; }

 private:
  std::vector<double> last_iterate_;
  double residual_norm_;
};

// Damped Newton iteration on the flow-balance system, starting from
// mu_k = 1/2 with a central-difference Jacobian. Throws SolverError when the
// residual cannot be driven below the tolerance.
MuSolverResult solve_mu_star(const FadingModel& model, const MuSolverOptions& options = {});

// Sum over relays of E[log2(1 + Gamma_kD)] at the given weights.
double max_rate_analytical(const FadingModel& model, const SelectionWeights& mu_star,
                           const QuadratureOptions& options = {});

// M * integral log2(1+x) f(x) F(x)^(2M-1) dx for i.i.d. Rayleigh links.
double iid_rate_quadrature(int num_relays, double avg_snr,
                           const QuadratureOptions& options = {});

// (1/2) E[log2(1 + max_k min{gamma_Sk, gamma_kD})] for any Rayleigh model.
double conventional_rate_analytical(const FadingModel& model,
                                    const QuadratureOptions& options = {});

// Largest relay count accepted by the alternating-sum closed forms.
inline constexpr int kMaxClosedFormRelays = 60;

// Closed-form buffer-aided rate over i.i.d. Rayleigh links. The alternating
// binomial sum is evaluated in 50-digit arithmetic.
double closed_form_rate_ba_iid_rayleigh(int num_relays, double avg_snr);
// Closed-form conventional selection rate over i.i.d. Rayleigh links.
double closed_form_rate_conv_iid_rayleigh(int num_relays, double avg_snr);

// Low-SNR ratio of buffer-aided to conventional rate: 2 H_{2M} / H_M.
double low_snr_ratio(int num_relays);
// High-SNR gap between buffer-aided and conventional rates in bits/symbol.
double high_snr_gap(int num_relays);

enum class SnrRegime { Low, High };
enum class ProtocolFamily { BufferAided, Conventional };

double asymptotic_rate(int num_relays, double avg_snr, SnrRegime regime,
                       ProtocolFamily protocol);

}  // namespace barelay
