#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "tdisagg/conversion.hpp"
#include "tdisagg/error.hpp"

namespace tdisagg::detail {

// High-frequency design matrix [x 1] (or just [x]).
inline Eigen::MatrixXd design_high(const Eigen::VectorXd& x, bool intercept) {
  Eigen::MatrixXd d(x.size(), intercept ? 2 : 1);
  d.col(0) = x;
  if (intercept) d.col(1).setOnes();
  return d;
}

// Cholesky of a symmetric positive-definite matrix with a deterministic
// ridge fallback when the factor looks numerically singular
// (condition estimate > 1e12 -> add 1e-10 * mean(diag)).
class SpdFactor {
 public:
  explicit SpdFactor(const Eigen::MatrixXd& v, ErrorCode failure = ErrorCode::SingularV) {
    llt_.compute(v);
    if (!usable()) {
      double ridge = 1e-10 * v.diagonal().mean();
      if (!(ridge > 0)) ridge = 1e-300;
      Eigen::MatrixXd vr = v;
      vr.diagonal().array() += ridge;
      llt_.compute(vr);
      if (!usable()) raise(failure, "covariance matrix is not positive definite");
    }
    const auto& l = llt_.matrixLLT();
    log_det_ = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) log_det_ += 2.0 * std::log(l(i, i));
  }

  template <typename Rhs>
  auto solve(const Rhs& rhs) const {
    return llt_.solve(rhs);
  }

  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
  double log_det() const { return log_det_; }

  // L^{-1} m (whitening transform)
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& m) const {
    return llt_.matrixL().solve(m);
  }

 private:
  bool usable() const {
    if (llt_.info() != Eigen::Success) return false;
    const auto& l = llt_.matrixLLT();
    double dmin = l(0, 0), dmax = l(0, 0);
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      double d = l(i, i);
      if (!(d > 0) || !std::isfinite(d)) return false;
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    return dmax / dmin <= 1e6;  // cond(V) ~ (dmax/dmin)^2 <= 1e12
  }

  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
};

struct GlsSolution {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;  // u = y_l - X_l beta
  Eigen::VectorXd vinv_u;     // V^{-1} u
  double rss = 0.0;           // u' V^{-1} u
  Eigen::MatrixXd xtvix_inv;  // (X_l' V^{-1} X_l)^{-1}
};

// GLS via whitening: beta = argmin (y - X b)' V^{-1} (y - X b).
inline GlsSolution gls_solve(const SpdFactor& v, const Eigen::MatrixXd& x_low,
                             const Eigen::VectorXd& y_low) {
  const Eigen::Index k = x_low.cols();
  Eigen::MatrixXd xw = v.whiten(x_low);
  Eigen::VectorXd yw = v.whiten(y_low);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
  if (qr.rank() < k)
    raise(ErrorCode::RankDeficient, "design matrix has rank " + std::to_string(qr.rank()) +
                                        " < " + std::to_string(k));
  GlsSolution s;
  s.beta = qr.solve(yw);
  s.residuals = y_low - x_low * s.beta;
  s.vinv_u = v.solve(s.residuals);
  s.rss = std::max(0.0, s.residuals.dot(s.vinv_u));

  Eigen::MatrixXd r = qr.matrixR().topRows(k).template triangularView<Eigen::Upper>();
  Eigen::MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  s.xtvix_inv = qr.colsPermutation() * (rinv * rinv.transpose()) *
                qr.colsPermutation().transpose();
  return s;
}

// V = C Q_rho C' for the AR(1) covariance Q_rho = rho^|i-j| / (1 - rho^2),
// accumulated over group spans without materialising Q.
inline void chow_lin_low_covariance(double rho, const ConversionMatrix& cm,
                                    Eigen::MatrixXd& v_out) {
  const std::size_t n = cm.n_high();
  const std::size_t nl = cm.n_low();
  std::vector<double> powers(n);
  powers[0] = 1.0;
  for (std::size_t k = 1; k < n; ++k) powers[k] = powers[k - 1] * rho;
  const double scale = 1.0 / (1.0 - rho * rho);

  const auto& spans = cm.group_spans();
  v_out.resize(static_cast<Eigen::Index>(nl), static_cast<Eigen::Index>(nl));
  for (std::size_t g = 0; g < nl; ++g) {
    for (std::size_t h = g; h < nl; ++h) {
      double acc = 0.0;
      const GroupSpan& sg = spans[g];
      const GroupSpan& sh = spans[h];
      for (std::size_t a = 0; a < sg.size; ++a) {
        const double wg = cm.weight(g, a);
        if (wg == 0.0) continue;
        const std::size_t ia = sg.start + a;
        for (std::size_t b = 0; b < sh.size; ++b) {
          const double wh = cm.weight(h, b);
          if (wh == 0.0) continue;
          const std::size_t jb = sh.start + b;
          const std::size_t lag = ia > jb ? ia - jb : jb - ia;
          acc += wg * wh * powers[lag];
        }
      }
      v_out(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h)) = scale * acc;
      v_out(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(g)) = scale * acc;
    }
  }
}

inline Eigen::MatrixXd chow_lin_Q(double rho, std::size_t n) {
  std::vector<double> powers(n);
  powers[0] = 1.0;
  for (std::size_t k = 1; k < n; ++k) powers[k] = powers[k - 1] * rho;
  const double scale = 1.0 / (1.0 - rho * rho);
  Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          scale * powers[i > j ? i - j : j - i];
  return q;
}

// B = H_rho D with H_rho = I - rho L and D the full-rank first-difference
// operator (first row e1'). B is unit lower triangular with bandwidth 2:
//   B[0,0] = 1
//   B[i,i] = 1, B[i,i-1] = -(1+rho), B[i,i-2] = rho
// The Litterman prior is Q = (B' B)^{-1}; all uses go through triangular
// solves instead of forming Q.
struct LittermanBand {
  double rho;
  std::size_t n;

  // solves B' Z = M in place (M is n x k)
  void solve_transposed_in_place(Eigen::MatrixXd& m) const {
    const double c1 = -(1.0 + rho);
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      for (Eigen::Index i = static_cast<Eigen::Index>(n) - 1; i >= 0; --i) {
        double v = m(i, col);
        if (i + 1 < static_cast<Eigen::Index>(n)) v -= c1 * m(i + 1, col);
        if (i + 2 < static_cast<Eigen::Index>(n)) v -= rho * m(i + 2, col);
        m(i, col) = v;
      }
    }
  }

  // solves B Z = M in place
  void solve_in_place(Eigen::MatrixXd& m) const {
    const double c1 = -(1.0 + rho);
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        double v = m(i, col);
        if (i >= 1) v -= c1 * m(i - 1, col);
        if (i >= 2) v -= rho * m(i - 2, col);
        m(i, col) = v;
      }
    }
  }

  // V = C Q C' = Z' Z with Z = B^{-T} C'
  Eigen::MatrixXd low_covariance(const ConversionMatrix& cm) const {
    Eigen::MatrixXd z = cm.dense().transpose();
    solve_transposed_in_place(z);
    return z.transpose() * z;
  }

  Eigen::MatrixXd q_dense() const {
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(n));
    solve_transposed_in_place(q);  // B^{-T}
    solve_in_place(q);             // B^{-1} B^{-T}
    return q;
  }

  // Q C' w computed as B^{-1} B^{-T} (C' w)
  Eigen::VectorXd q_apply(const ConversionMatrix& cm, const Eigen::VectorXd& w) const {
    Eigen::MatrixXd t = cm.apply_transposed(w);
    solve_transposed_in_place(t);
    solve_in_place(t);
    return t.col(0);
  }
};

}  // namespace tdisagg::detail
