#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "barelay/analysis.hpp"

namespace barelay {

namespace {

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

class FlowBalanceSystem {
 public:
  FlowBalanceSystem(const FadingModel& model, const MuSolverOptions& options)
      : model_(model), options_(options) {}

  Eigen::VectorXd residual(const Eigen::VectorXd& mu) const {
    const auto r = flow_residuals(model_, SelectionWeights(to_std(mu)), options_.quadrature);
    return Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  }

  Eigen::VectorXd project(Eigen::VectorXd mu) const {
    const double lo = options_.boundary_margin;
    const double hi = 1.0 - options_.boundary_margin;
    for (Eigen::Index k = 0; k < mu.size(); ++k) mu[k] = std::clamp(mu[k], lo, hi);
    return mu;
  }

  // Central differences, one-sided near the projection boundary.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& mu) const {
    const Eigen::Index m = mu.size();
    Eigen::MatrixXd jac(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::VectorXd up = mu;
      Eigen::VectorXd down = mu;
      up[j] = std::min(mu[j] + options_.jacobian_step, 1.0 - options_.boundary_margin);
      down[j] = std::max(mu[j] - options_.jacobian_step, options_.boundary_margin);
      jac.col(j) = (residual(up) - residual(down)) / (up[j] - down[j]);
    }
    return jac;
  }

 private:
  const FadingModel& model_;
  const MuSolverOptions& options_;
};

}  // namespace

MuSolverResult solve_mu_star(const FadingModel& model, const MuSolverOptions& options) {
  const FlowBalanceSystem system(model, options);
  const auto m = static_cast<Eigen::Index>(model.num_relays());

  Eigen::VectorXd mu = Eigen::VectorXd::Constant(m, 0.5);
  if (!options.initial_guess.empty()) {
    if (options.initial_guess.size() != model.num_relays())
      throw std::invalid_argument("initial_guess size differs from relay count");
    mu = system.project(Eigen::Map<const Eigen::VectorXd>(options.initial_guess.data(), m));
  }
  Eigen::VectorXd g = system.residual(mu);
  double norm = max_abs(g);

  for (int iteration = 0; iteration <= options.max_iterations; ++iteration) {
    if (norm <= options.tolerance) return {to_std(mu), norm, iteration};
    if (iteration == options.max_iterations) break;

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(system.jacobian(mu));
    if (!lu.isInvertible())
      throw SolverError("flow-balance Jacobian is singular", to_std(mu), norm);
    const Eigen::VectorXd step = -lu.solve(g);

    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.max_step_halvings; ++halving) {
      const Eigen::VectorXd candidate = system.project(mu + scale * step);
      const Eigen::VectorXd g_candidate = system.residual(candidate);
      const double candidate_norm = max_abs(g_candidate);
      if (candidate_norm < norm) {
        mu = candidate;
        g = g_candidate;
        norm = candidate_norm;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted)
      throw SolverError("damped Newton step failed to reduce the flow-balance residual",
                        to_std(mu), norm);
  }
  throw SolverError("damped Newton did not converge within the iteration limit",
                    to_std(mu), norm);
}

}  // namespace barelay
