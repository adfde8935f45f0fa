#include "tdisagg/ensemble.hpp"

#include <cmath>
#include <limits>

#include "gls_detail.hpp"

namespace tdisagg {

namespace {

// Lawson-Hanson active-set NNLS: argmin ||A x - b||^2 over x >= 0.
// `tol` is the dual-feasibility threshold; it must reflect the scale of the
// caller's gradients, not of any penalty rows embedded in `a`.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol) {
  const Eigen::Index m = a.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  Eigen::Index n_passive = 0;

  const int max_outer = 6 * static_cast<int>(m) + 10;

  auto solve_passive = [&](Eigen::VectorXd& z) {
    Eigen::MatrixXd ap(a.rows(), n_passive);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < m; ++j)
      if (passive[static_cast<std::size_t>(j)]) ap.col(c++) = a.col(j);
    Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
    z.setZero();
    c = 0;
    for (Eigen::Index j = 0; j < m; ++j)
      if (passive[static_cast<std::size_t>(j)]) z[j] = zp[c++];
  };

  for (int outer = 0; outer < max_outer; ++outer) {
    Eigen::VectorXd gradient = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_g = tol;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && gradient[j] > best_g) {
        best_g = gradient[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    ++n_passive;

    Eigen::VectorXd z(m);
    solve_passive(z);
    int inner_guard = 0;
    while (true) {
      bool feasible = true;
      for (Eigen::Index j = 0; j < m; ++j)
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) feasible = false;
      if (feasible) break;
      if (++inner_guard > 2 * m + 10) break;
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < m; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
          double step = x[j] / (x[j] - z[j]);
          alpha = std::min(alpha, step);
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < m; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= 1e-14) {
          x[j] = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
          --n_passive;
        }
      }
      if (n_passive == 0) break;
      solve_passive(z);
    }
    if (n_passive == 0) continue;
    x = z;
  }
  return x.cwiseMax(0.0);
}

double column_sse(const Eigen::VectorXd& column, const Eigen::VectorXd& y_low) {
  return (column - y_low).squaredNorm();
}

}  // namespace

Eigen::VectorXd nnls_simplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index m = a.cols();
  if (m == 0) raise(ErrorCode::EmptyMemberSet, "no columns to weight");
  if (!a.allFinite() || !b.allFinite())
    raise(ErrorCode::InvalidArgument, "inputs must be finite");
  if (m == 1) return Eigen::VectorXd::Ones(1);

  const double lambda = 1e6 * (1.0 + b.lpNorm<Eigen::Infinity>());
  Eigen::MatrixXd augmented(a.rows() + 1, m);
  augmented.topRows(a.rows()) = a;
  augmented.row(a.rows()).setConstant(lambda);
  Eigen::VectorXd rhs(b.size() + 1);
  rhs.head(b.size()) = b;
  rhs[b.size()] = lambda;

  // dual tolerance from the unpenalised problem; the lambda row would
  // otherwise swamp the entering test
  const double tol = 1e-10 * std::max(1.0, (a.transpose() * b).lpNorm<Eigen::Infinity>());
  Eigen::VectorXd w = nnls(augmented, rhs, tol);
  const double total = w.sum();
  if (!(total > 0.0))
    raise(ErrorCode::SingularSystem, "NNLS returned an all-zero weight vector");
  return w / total;
}

const std::vector<MethodId>& default_ensemble_methods() {
  static const std::vector<MethodId> methods = {
      MethodId::ols,       MethodId::denton,        MethodId::fernandez,
      MethodId::chow_lin_opt, MethodId::litterman_opt, MethodId::fast,
      MethodId::uniform,
  };
  return methods;
}

EnsembleResult run_ensemble(const Frame& frame, AggregationRule rule,
                            const std::vector<MethodId>& methods,
                            const FitOptions& options) {
  if (methods.empty()) raise(ErrorCode::EmptyMemberSet, "method list is empty");

  const ConversionMatrix cm = build_C(frame, rule);
  const auto targets = frame.group_targets();
  const auto x_opt = frame.indicator();
  Eigen::VectorXd y_low(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t g = 0; g < targets.size(); ++g) {
    if (!targets[g])
      raise(ErrorCode::InvalidArgument,
            "group " + frame.groups()[g].index.text() + " has no y; retropolate first");
    y_low[static_cast<Eigen::Index>(g)] = *targets[g];
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(x_opt.size()));
  for (std::size_t i = 0; i < x_opt.size(); ++i) {
    if (!x_opt[i])
      raise(ErrorCode::InvalidArgument, "indicator X has missing values; complete first");
    x[static_cast<Eigen::Index>(i)] = *x_opt[i];
  }

  EnsembleResult er;
  er.y_low = y_low;
  std::vector<Eigen::VectorXd> columns;
  for (MethodId id : methods) {
    try {
      FitResult fr = fit(id, y_low, x, cm, options);
      Eigen::VectorXd column;
      if (fr.beta) {
        const Eigen::MatrixXd x_high = detail::design_high(x, fr.intercept_used);
        column = cm.aggregate(x_high * (*fr.beta));
      } else {
        column = cm.aggregate(fr.y_hat);
      }
      er.member_ids.push_back(id);
      er.member_fits.push_back(std::move(fr));
      columns.push_back(std::move(column));
    } catch (const Error& e) {
      er.dropped.push_back(std::string(method_name(id)) + ": " + e.what());
    }
  }
  if (er.member_ids.empty())
    raise(ErrorCode::AllMembersFailed, "every ensemble member failed to fit");

  const Eigen::Index m = static_cast<Eigen::Index>(columns.size());
  er.columns.resize(y_low.size(), m);
  for (Eigen::Index j = 0; j < m; ++j) er.columns.col(j) = columns[static_cast<std::size_t>(j)];

  er.weights = nnls_simplex(er.columns, y_low);
  er.objective = (er.columns * er.weights - y_low).squaredNorm();

  er.y_hat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cm.n_high()));
  for (Eigen::Index j = 0; j < m; ++j)
    er.y_hat += er.weights[j] * er.member_fits[static_cast<std::size_t>(j)].y_hat;
  er.combined_low = cm.aggregate(er.y_hat);

  const double nl = static_cast<double>(y_low.size());
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::VectorXd err = er.columns.col(j) - y_low;
    MemberScore score;
    score.mae = err.cwiseAbs().sum() / nl;
    score.rmse = std::sqrt(err.squaredNorm() / nl);
    er.scores.push_back(score);
  }
  return er;
}

FitResult to_model(const EnsembleResult& er) {
  FitResult r;
  r.method = MethodId::ensemble;
  r.y_hat = er.y_hat;
  const double err = (er.combined_low - er.y_low).lpNorm<Eigen::Infinity>();
  r.aggregation_consistent = err <= 1e-6 * (1.0 + er.y_low.lpNorm<Eigen::Infinity>());
  return r;
}

}  // namespace tdisagg
