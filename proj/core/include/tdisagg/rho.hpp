#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdisagg/conversion.hpp"

namespace tdisagg {

enum class RhoObjective { maxlog, minrss };
enum class QBuilder { chow_lin, litterman };

RhoObjective parse_rho_objective(std::string_view name);
std::string_view rho_objective_name(RhoObjective objective);

// P[i][j] = |i - j|: the lag structure behind the AR(1) covariance.
struct PowerMatrix {
  Eigen::MatrixXi P;
  static PowerMatrix build(std::size_t n);
};

// chow_lin: Q = rho^P / (1 - rho^2); litterman: Q = (D' H' H D)^{-1} with
// H = I - rho L and D the full-rank first-difference operator.
Eigen::MatrixXd build_Q(double rho, const PowerMatrix& p, QBuilder builder);

struct RhoBounds {
  double lo = -0.9;
  double hi = 0.99;
};

struct Inference {
  Eigen::VectorXd se;
  Eigen::VectorXd t_stats;
  Eigen::VectorXd p_values;
  std::vector<std::string> stars;
};

// Normal-approximation inference: se = sqrt(diag vcov), t = beta/se,
// p = 2 (1 - Phi(|t|)). Stars: *** p<0.01, ** p<0.05, * p<0.1.
Inference inference(const Eigen::VectorXd& beta, const Eigen::MatrixXd& vcov, int dof);

double normal_cdf(double z);

struct RhoOptions {
  RhoObjective objective = RhoObjective::maxlog;
  QBuilder builder = QBuilder::chow_lin;
  RhoBounds bounds;
  bool intercept = true;
};

struct RhoResult {
  double rho_hat = 0.0;
  double objective_at_opt = 0.0;  // minimised value (-loglik for maxlog, rss for minrss)
  Eigen::VectorXd beta_hat;
  Eigen::VectorXd residuals_low;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd V;
  Eigen::MatrixXd vcov;
  Inference infer;
  std::vector<std::pair<double, double>> objective_trace;  // every (rho, objective) evaluated
};

// Scalar bounded optimisation of rho: a 381-point pre-scan of [lo, hi]
// followed by golden-section refinement (tolerance 1e-6, <= 200 iterations).
// Singular candidates are skipped; all inference fields are populated at the
// optimum.
RhoResult optimize(const Eigen::VectorXd& y_low, const Eigen::VectorXd& x,
                   const ConversionMatrix& cm, const RhoOptions& options = {});

}  // namespace tdisagg
