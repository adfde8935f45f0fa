#include "tdisagg/models.hpp"

#include <cmath>

#include "gls_detail.hpp"

namespace tdisagg {

MethodId parse_method(std::string_view name) {
  if (name == "ols") return MethodId::ols;
  if (name == "denton") return MethodId::denton;
  if (name == "denton-cholette") return MethodId::denton_cholette;
  if (name == "chow-lin") return MethodId::chow_lin;
  if (name == "chow-lin-opt") return MethodId::chow_lin_opt;
  if (name == "chow-lin-ecotrim") return MethodId::chow_lin_ecotrim;
  if (name == "chow-lin-quilis") return MethodId::chow_lin_quilis;
  if (name == "litterman") return MethodId::litterman;
  if (name == "litterman-opt") return MethodId::litterman_opt;
  if (name == "fernandez") return MethodId::fernandez;
  if (name == "fast") return MethodId::fast;
  if (name == "uniform") return MethodId::uniform;
  if (name == "ensemble") return MethodId::ensemble;
  raise(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::string_view method_name(MethodId method) {
  switch (method) {
    case MethodId::ols: return "ols";
    case MethodId::denton: return "denton";
    case MethodId::denton_cholette: return "denton-cholette";
    case MethodId::chow_lin: return "chow-lin";
    case MethodId::chow_lin_opt: return "chow-lin-opt";
    case MethodId::chow_lin_ecotrim: return "chow-lin-ecotrim";
    case MethodId::chow_lin_quilis: return "chow-lin-quilis";
    case MethodId::litterman: return "litterman";
    case MethodId::litterman_opt: return "litterman-opt";
    case MethodId::fernandez: return "fernandez";
    case MethodId::fast: return "fast";
    case MethodId::uniform: return "uniform";
    case MethodId::ensemble: return "ensemble";
  }
  return "?";
}

bool method_uses_regression(MethodId method) {
  switch (method) {
    case MethodId::ols:
    case MethodId::chow_lin:
    case MethodId::chow_lin_opt:
    case MethodId::chow_lin_ecotrim:
    case MethodId::chow_lin_quilis:
    case MethodId::litterman:
    case MethodId::litterman_opt:
    case MethodId::fernandez:
    case MethodId::fast:
      return true;
    default:
      return false;
  }
}

const std::vector<MethodId>& fittable_methods() {
  static const std::vector<MethodId> methods = {
      MethodId::ols,           MethodId::denton,       MethodId::denton_cholette,
      MethodId::chow_lin,      MethodId::chow_lin_opt, MethodId::chow_lin_ecotrim,
      MethodId::chow_lin_quilis, MethodId::litterman,  MethodId::litterman_opt,
      MethodId::fernandez,     MethodId::fast,         MethodId::uniform,
  };
  return methods;
}

bool aggregation_consistent(const ConversionMatrix& cm, const Eigen::VectorXd& y_hat,
                            const Eigen::VectorXd& y_low) {
  const Eigen::VectorXd agg = cm.aggregate(y_hat);
  const double err = (agg - y_low).lpNorm<Eigen::Infinity>();
  return err <= 1e-6 * (1.0 + y_low.lpNorm<Eigen::Infinity>());
}

namespace {

void check_sizes(const Eigen::VectorXd& y_low, const Eigen::VectorXd& x,
                 const ConversionMatrix& cm) {
  if (static_cast<std::size_t>(y_low.size()) != cm.n_low())
    raise(ErrorCode::LengthMismatch, "y_l length does not match the conversion matrix");
  if (static_cast<std::size_t>(x.size()) != cm.n_high())
    raise(ErrorCode::LengthMismatch, "X length does not match the conversion matrix");
  if (!y_low.allFinite() || !x.allFinite())
    raise(ErrorCode::InvalidArgument, "inputs must be finite");
}

void finalize(FitResult& r, const ConversionMatrix& cm, const Eigen::VectorXd& y_low) {
  if (!r.y_hat.allFinite())
    raise(ErrorCode::SingularSystem, "prediction is not finite");
  r.aggregation_consistent =
      r.method == MethodId::ols ? false : aggregation_consistent(cm, r.y_hat, y_low);
}

// h-order difference matrix, (n-h) x n, rows of signed binomial coefficients
Eigen::MatrixXd difference_matrix(std::size_t n, int h) {
  std::vector<double> coef(static_cast<std::size_t>(h) + 1);
  for (int j = 0; j <= h; ++j) {
    double binom = 1.0;
    for (int t = 0; t < j; ++t) binom = binom * (h - t) / (t + 1);
    coef[static_cast<std::size_t>(j)] = ((h - j) % 2 == 0 ? 1.0 : -1.0) * binom;
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n - h),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i + h < n; ++i)
    for (int j = 0; j <= h; ++j)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + j)) =
          coef[static_cast<std::size_t>(j)];
  return d;
}

// smooth distribution y = S C' (C S C')^{-1} target with S = penalty^{-1};
// shared by denton and denton-cholette
struct SmoothDistribution {
  Eigen::MatrixXd weights;  // S C'
  Eigen::MatrixXd v;        // C S C'
  Eigen::MatrixXd s;        // penalty^{-1}, dense
  Eigen::VectorXd apply(const ConversionMatrix& cm, const Eigen::VectorXd& target,
                        ErrorCode failure) const {
    detail::SpdFactor vf(v, failure);
    return weights * vf.solve(target);
  }
};

SmoothDistribution smooth_distribution(const Eigen::MatrixXd& penalty,
                                       const ConversionMatrix& cm, ErrorCode failure) {
  const std::size_t n = cm.n_high();
  Eigen::MatrixXd reg = penalty;
  const double eps = 1e-8 * (penalty.trace() / static_cast<double>(n));
  reg.diagonal().array() += eps;
  detail::SpdFactor sf(reg, failure);
  SmoothDistribution sd;
  sd.s = sf.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n)));
  sd.weights = sf.solve(cm.dense().transpose());
  sd.v = cm.aggregate_columns(sd.weights);
  return sd;
}

FitResult fit_uniform(const Eigen::VectorXd& y_low, const ConversionMatrix& cm) {
  FitResult r;
  r.method = MethodId::uniform;
  r.y_hat.resize(static_cast<Eigen::Index>(cm.n_high()));
  const auto& spans = cm.group_spans();
  for (std::size_t g = 0; g < spans.size(); ++g) {
    double d = 0.0;
    for (std::size_t k = 0; k < spans[g].size; ++k) {
      const double w = cm.weight(g, k);
      d += w * w;
    }
    for (std::size_t k = 0; k < spans[g].size; ++k)
      r.y_hat[static_cast<Eigen::Index>(spans[g].start + k)] =
          cm.weight(g, k) * y_low[static_cast<Eigen::Index>(g)] / d;
  }
  return r;
}

FitResult fit_ols(const Eigen::VectorXd& y_low, const Eigen::VectorXd& x,
                  const ConversionMatrix& cm, const FitOptions& options) {
  FitResult r;
  r.method = MethodId::ols;
  r.intercept_used = options.intercept;
  const Eigen::MatrixXd x_high = detail::design_high(x, options.intercept);
  const Eigen::MatrixXd x_low = cm.aggregate_columns(x_high);
  const Eigen::Index k = x_low.cols();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x_low);
  if (qr.rank() < k)
    raise(ErrorCode::RankDeficient,
          "aggregated design has rank " + std::to_string(qr.rank()) + " < " + std::to_string(k));
  Eigen::VectorXd beta = qr.solve(y_low);
  r.beta = beta;
  r.y_hat = x_high * beta;
  Eigen::VectorXd u = y_low - x_low * beta;
  r.residuals_low = u;

  const int dof = static_cast<int>(y_low.size()) - static_cast<int>(k);
  if (dof >= 1) {
    Eigen::MatrixXd re = qr.matrixR().topRows(k).triangularView<Eigen::Upper>();
    Eigen::MatrixXd rinv =
        re.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd xtx_inv =
        qr.colsPermutation() * (rinv * rinv.transpose()) * qr.colsPermutation().transpose();
    r.vcov = (u.squaredNorm() / dof) * xtx_inv;
  }
  return r;
}

FitResult fit_gls_family(MethodId method, double rho, QBuilder builder,
                         const Eigen::VectorXd& y_low, const Eigen::VectorXd& x,
                         const ConversionMatrix& cm, const FitOptions& options) {
  if (!(std::abs(rho) < 1.0))
    raise(ErrorCode::RhoOutOfRange, "rho must satisfy |rho| < 1, got " + format_number(rho));
  FitResult r;
  r.method = method;
  r.rho = rho;
  r.intercept_used = options.intercept;

  const Eigen::MatrixXd x_high = detail::design_high(x, options.intercept);
  const Eigen::MatrixXd x_low = cm.aggregate_columns(x_high);

  Eigen::MatrixXd v;
  if (builder == QBuilder::chow_lin) {
    detail::chow_lin_low_covariance(rho, cm, v);
  } else {
    detail::LittermanBand band{rho, cm.n_high()};
    v = band.low_covariance(cm);
  }
  detail::SpdFactor vf(v);
  detail::GlsSolution gls = detail::gls_solve(vf, x_low, y_low);

  Eigen::VectorXd distribution;
  if (builder == QBuilder::chow_lin) {
    Eigen::MatrixXd q = detail::chow_lin_Q(rho, cm.n_high());
    distribution = q * cm.apply_transposed(gls.vinv_u);
    r.Q = std::move(q);
  } else {
    detail::LittermanBand band{rho, cm.n_high()};
    distribution = band.q_apply(cm, gls.vinv_u);
    r.Q = band.q_dense();
  }
  r.y_hat = x_high * gls.beta + distribution;
  r.beta = gls.beta;
  r.residuals_low = gls.residuals;
  r.V = std::move(v);

  const int dof = static_cast<int>(y_low.size()) - static_cast<int>(x_low.cols());
  if (dof >= 1) r.vcov = (gls.rss / dof) * gls.xtvix_inv;
  return r;
}

FitResult fit_denton(const Eigen::VectorXd& y_low, const ConversionMatrix& cm, int h) {
  if (h < 1 || h > 3)
    raise(ErrorCode::InvalidArgument, "denton difference order must be 1, 2, or 3");
  const std::size_t n = cm.n_high();
  if (n <= static_cast<std::size_t>(h))
    raise(ErrorCode::InvalidArgument, "series too short for difference order");
  const Eigen::MatrixXd d = difference_matrix(n, h);
  SmoothDistribution sd = smooth_distribution(d.transpose() * d, cm, ErrorCode::SingularSystem);

  FitResult r;
  r.method = MethodId::denton;
  r.y_hat = sd.apply(cm, y_low, ErrorCode::SingularSystem);
  r.Q = std::move(sd.s);
  r.V = std::move(sd.v);
  return r;
}

FitResult fit_denton_cholette(const Eigen::VectorXd& y_low, const Eigen::VectorXd& x,
                              const ConversionMatrix& cm, const FitOptions& options) {
  const std::size_t n = cm.n_high();
  if (n < 2) raise(ErrorCode::InvalidArgument, "series too short");
  Eigen::MatrixXd penalty;
  {
    const Eigen::MatrixXd d = difference_matrix(n, 1);
    penalty = d.transpose() * d;
  }
  if (options.cholette_weights) {
    const Eigen::VectorXd& w = *options.cholette_weights;
    if (static_cast<std::size_t>(w.size()) != n)
      raise(ErrorCode::LengthMismatch, "weights length does not match n");
    if ((w.array() <= 0.0).any())
      raise(ErrorCode::InvalidArgument, "weights must be positive");
    penalty.diagonal() += w;
  }
  SmoothDistribution sd = smooth_distribution(penalty, cm, ErrorCode::SingularSystem);

  FitResult r;
  r.method = MethodId::denton_cholette;
  const Eigen::VectorXd discrepancy = y_low - cm.aggregate(x);
  r.y_hat = x + sd.apply(cm, discrepancy, ErrorCode::SingularSystem);
  r.Q = std::move(sd.s);
  r.V = std::move(sd.v);
  return r;
}

FitResult fit_opt(MethodId method, QBuilder builder, RhoObjective default_objective,
                  const Eigen::VectorXd& y_low, const Eigen::VectorXd& x,
                  const ConversionMatrix& cm, const FitOptions& options) {
  RhoOptions ro;
  ro.objective = options.rho_objective.value_or(default_objective);
  ro.builder = builder;
  ro.bounds = options.rho_bounds;
  ro.intercept = options.intercept;
  RhoResult rr = optimize(y_low, x, cm, ro);
  FitResult r = fit_gls_family(method, rr.rho_hat, builder, y_low, x, cm, options);
  r.rho_details = std::move(rr);
  return r;
}

}  // namespace

FitResult fit(MethodId method, const Eigen::VectorXd& y_low, const Eigen::VectorXd& x,
              const ConversionMatrix& cm, const FitOptions& options) {
  check_sizes(y_low, x, cm);
  FitResult r;
  switch (method) {
    case MethodId::ols:
      r = fit_ols(y_low, x, cm, options);
      break;
    case MethodId::uniform:
      r = fit_uniform(y_low, cm);
      break;
    case MethodId::denton:
      r = fit_denton(y_low, cm, options.denton_h);
      break;
    case MethodId::denton_cholette:
      r = fit_denton_cholette(y_low, x, cm, options);
      break;
    case MethodId::chow_lin:
      r = fit_gls_family(method, options.rho, QBuilder::chow_lin, y_low, x, cm, options);
      break;
    case MethodId::chow_lin_ecotrim:
      r = fit_gls_family(method, 0.75, QBuilder::chow_lin, y_low, x, cm, options);
      break;
    case MethodId::chow_lin_quilis:
      r = fit_gls_family(method, 0.15, QBuilder::chow_lin, y_low, x, cm, options);
      break;
    case MethodId::litterman:
      r = fit_gls_family(method, options.rho, QBuilder::litterman, y_low, x, cm, options);
      break;
    case MethodId::fernandez:
      r = fit_gls_family(method, 0.0, QBuilder::litterman, y_low, x, cm, options);
      break;
    case MethodId::fast:
      r = fit_gls_family(method, 0.9, QBuilder::litterman, y_low, x, cm, options);
      break;
    case MethodId::chow_lin_opt:
      r = fit_opt(method, QBuilder::chow_lin, RhoObjective::maxlog, y_low, x, cm, options);
      break;
    case MethodId::litterman_opt:
      r = fit_opt(method, QBuilder::litterman, RhoObjective::minrss, y_low, x, cm, options);
      break;
    case MethodId::ensemble:
      raise(ErrorCode::InvalidArgument, "ensemble is not a fittable method; use run_ensemble");
  }
  finalize(r, cm, y_low);
  return r;
}

}  // namespace tdisagg
