#include "tdisagg/rho.hpp"

#include <cmath>
#include <limits>

#include "gls_detail.hpp"

namespace tdisagg {

RhoObjective parse_rho_objective(std::string_view name) {
  if (name == "maxlog") return RhoObjective::maxlog;
  if (name == "minrss") return RhoObjective::minrss;
  raise(ErrorCode::InvalidArgument, "unknown rho objective '" + std::string(name) + "'");
}

std::string_view rho_objective_name(RhoObjective objective) {
  return objective == RhoObjective::maxlog ? "maxlog" : "minrss";
}

PowerMatrix PowerMatrix::build(std::size_t n) {
  PowerMatrix pm;
  pm.P.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      pm.P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<int>(i > j ? i - j : j - i);
  return pm;
}

Eigen::MatrixXd build_Q(double rho, const PowerMatrix& p, QBuilder builder) {
  if (!(std::abs(rho) < 1.0))
    raise(ErrorCode::RhoOutOfRange, "rho must satisfy |rho| < 1, got " + format_number(rho));
  const std::size_t n = static_cast<std::size_t>(p.P.rows());
  if (builder == QBuilder::chow_lin) return detail::chow_lin_Q(rho, n);
  detail::LittermanBand band{rho, n};
  return band.q_dense();
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

Inference inference(const Eigen::VectorXd& beta, const Eigen::MatrixXd& vcov, int dof) {
  if (dof < 1) raise(ErrorCode::InvalidArgument, "degrees of freedom must be >= 1");
  const Eigen::Index k = beta.size();
  if (vcov.rows() != k || vcov.cols() != k)
    raise(ErrorCode::LengthMismatch, "vcov shape does not match beta");
  Inference out;
  out.se.resize(k);
  out.t_stats.resize(k);
  out.p_values.resize(k);
  out.stars.resize(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const double var = vcov(i, i);
    if (!(var > 0.0))
      raise(ErrorCode::NonPositiveVariance,
            "variance of coefficient " + std::to_string(i) + " is not positive");
    out.se[i] = std::sqrt(var);
    out.t_stats[i] = beta[i] / out.se[i];
    const double p = 2.0 * (1.0 - normal_cdf(std::abs(out.t_stats[i])));
    out.p_values[i] = std::min(1.0, std::max(0.0, p));
    const double pv = out.p_values[i];
    out.stars[static_cast<std::size_t>(i)] = pv < 0.01 ? "***" : pv < 0.05 ? "**" : pv < 0.1 ? "*" : "";
  }
  return out;
}

namespace {

struct Candidate {
  bool ok = false;
  double objective = std::numeric_limits<double>::infinity();
  detail::GlsSolution gls;
  double log_det_v = 0.0;
};

// Builds V(rho), runs GLS, and returns the minimised objective
// (-profile-loglik for maxlog, u'V^{-1}u for minrss).
class ObjectiveEval {
 public:
  ObjectiveEval(const Eigen::VectorXd& y_low, const Eigen::MatrixXd& x_low,
                const ConversionMatrix& cm, const RhoOptions& options)
      : y_low_(y_low), x_low_(x_low), cm_(cm), options_(options) {}

  Candidate operator()(double rho) const {
    Candidate c;
    try {
      Eigen::MatrixXd v;
      if (options_.builder == QBuilder::chow_lin) {
        detail::chow_lin_low_covariance(rho, cm_, v);
      } else {
        detail::LittermanBand band{rho, cm_.n_high()};
        v = band.low_covariance(cm_);
      }
      detail::SpdFactor vf(v);
      c.gls = detail::gls_solve(vf, x_low_, y_low_);
      c.log_det_v = vf.log_det();
      const double nl = static_cast<double>(y_low_.size());
      if (options_.objective == RhoObjective::minrss) {
        c.objective = c.gls.rss;
      } else {
        // profile log-likelihood with sigma^2 = rss / n_l concentrated out
        const double rss = std::max(c.gls.rss, 1e-300);
        const double loglik = -0.5 * (nl * std::log(2.0 * M_PI) + nl * std::log(rss / nl) +
                                      c.log_det_v + nl);
        c.objective = -loglik;
      }
      c.ok = std::isfinite(c.objective);
    } catch (const Error&) {
      c.ok = false;
    }
    if (!c.ok) c.objective = std::numeric_limits<double>::infinity();
    return c;
  }

 private:
  const Eigen::VectorXd& y_low_;
  const Eigen::MatrixXd& x_low_;
  const ConversionMatrix& cm_;
  const RhoOptions& options_;
};

}  // namespace

RhoResult optimize(const Eigen::VectorXd& y_low, const Eigen::VectorXd& x,
                   const ConversionMatrix& cm, const RhoOptions& options) {
  const double lo = options.bounds.lo;
  const double hi = options.bounds.hi;
  if (!(lo < hi) || !(std::abs(lo) < 1.0) || !(std::abs(hi) < 1.0))
    raise(ErrorCode::RhoOutOfRange,
          "bounds must satisfy -1 < lo < hi < 1, got [" + format_number(lo) + ", " +
              format_number(hi) + "]");

  const Eigen::MatrixXd x_high = detail::design_high(x, options.intercept);
  const Eigen::MatrixXd x_low = cm.aggregate_columns(x_high);
  ObjectiveEval eval(y_low, x_low, cm, options);

  RhoResult result;
  double best_rho = lo;
  double best_obj = std::numeric_limits<double>::infinity();
  bool any_ok = false;

  auto probe = [&](double rho) {
    Candidate c = eval(rho);
    result.objective_trace.emplace_back(rho, c.objective);
    if (c.ok) {
      any_ok = true;
      if (c.objective < best_obj) {
        best_obj = c.objective;
        best_rho = rho;
      }
    }
    return c;
  };

  // dense pre-scan to pick the bracketing region (objectives may be multimodal)
  constexpr int kGridPoints = 381;
  int best_idx = -1;
  for (int i = 0; i < kGridPoints; ++i) {
    const double rho = lo + (hi - lo) * static_cast<double>(i) / (kGridPoints - 1);
    Candidate c = probe(rho);
    if (c.ok && c.objective <= best_obj) best_idx = i;
  }
  if (!any_ok) raise(ErrorCode::NoFiniteCandidate, "objective failed at every candidate rho");

  const double step = (hi - lo) / (kGridPoints - 1);
  double a = std::max(lo, lo + step * (best_idx - 1));
  double b = std::min(hi, lo + step * (best_idx + 1));

  // golden-section refinement inside the bracket
  constexpr double kInvPhi = 0.6180339887498949;
  constexpr double kTol = 1e-6;
  constexpr int kMaxIter = 200;
  double c_pt = b - kInvPhi * (b - a);
  double d_pt = a + kInvPhi * (b - a);
  double fc = probe(c_pt).objective;
  double fd = probe(d_pt).objective;
  for (int it = 0; it < kMaxIter && (b - a) > kTol; ++it) {
    if (fc < fd) {
      b = d_pt;
      d_pt = c_pt;
      fd = fc;
      c_pt = b - kInvPhi * (b - a);
      fc = probe(c_pt).objective;
    } else {
      a = c_pt;
      c_pt = d_pt;
      fc = fd;
      d_pt = a + kInvPhi * (b - a);
      fd = probe(d_pt).objective;
    }
  }

  // final fit at the best rho seen anywhere
  Candidate final = eval(best_rho);
  if (!final.ok) raise(ErrorCode::NoFiniteCandidate, "objective failed at the optimum");

  result.rho_hat = best_rho;
  result.objective_at_opt = best_obj;
  result.beta_hat = final.gls.beta;
  result.residuals_low = final.gls.residuals;
  const PowerMatrix pm = PowerMatrix::build(cm.n_high());
  result.Q = build_Q(best_rho, pm, options.builder);
  if (options.builder == QBuilder::chow_lin) {
    detail::chow_lin_low_covariance(best_rho, cm, result.V);
  } else {
    detail::LittermanBand band{best_rho, cm.n_high()};
    result.V = band.low_covariance(cm);
  }
  const int nl = static_cast<int>(y_low.size());
  const int k = static_cast<int>(x_low.cols());
  const int dof = nl - k;
  if (dof >= 1) {
    const double sigma2 = final.gls.rss / dof;
    result.vcov = sigma2 * final.gls.xtvix_inv;
    // exact fits leave zero residual variance; no inference to report then
    bool positive = true;
    for (Eigen::Index i = 0; i < result.vcov.rows(); ++i)
      if (!(result.vcov(i, i) > 0.0)) positive = false;
    if (positive) result.infer = inference(result.beta_hat, result.vcov, dof);
  }
  return result;
}

}  // namespace tdisagg
