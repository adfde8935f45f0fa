#include <chrono>
#include <limits>

#include "doctest.h"
#include "tdisagg/models.hpp"
#include "test_util.hpp"

using namespace tdisagg;

namespace {

// equality-constrained QP oracle: min y'Ay s.t. Cy = t, solved via the KKT
// system with a full-pivot LU
Eigen::VectorXd qp_oracle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
                          const Eigen::VectorXd& t) {
  const Eigen::Index n = a.rows();
  const Eigen::Index l = c.rows();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + l, n + l);
  kkt.topLeftCorner(n, n) = 2.0 * a;
  kkt.topRightCorner(n, l) = c.transpose();
  kkt.bottomLeftCorner(l, n) = c;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + l);
  rhs.tail(l) = t;
  return kkt.fullPivLu().solve(rhs).head(n);
}

Eigen::MatrixXd first_difference(Eigen::Index n) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n - 1, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    d(i, i) = -1.0;
    d(i, i + 1) = 1.0;
  }
  return d;
}

FitOptions no_intercept() {
  FitOptions o;
  o.intercept = false;
  return o;
}

const MethodId kRegressionMethods[] = {
    MethodId::ols,           MethodId::chow_lin,  MethodId::chow_lin_opt,
    MethodId::chow_lin_ecotrim, MethodId::chow_lin_quilis, MethodId::litterman,
    MethodId::litterman_opt, MethodId::fernandez, MethodId::fast,
};

}  // namespace

TEST_CASE("ols solves the hand-derived least squares example") {
  Frame f = tdtest::make_frame(
      {{"a", 1, 4.0, 1.0}, {"a", 2, 4.0, 1.0}, {"b", 1, 8.0, 1.0}, {"b", 2, 8.0, 1.0}});
  ConversionMatrix cm = build_C(f, AggregationRule::sum);
  Eigen::VectorXd y_low(2), x(4);
  y_low << 4, 8;
  x.setOnes();
  // X_l = [2, 2]; beta = (8)^-1 (2*4 + 2*8) = 3
  FitResult r = fit(MethodId::ols, y_low, x, cm, no_intercept());
  CHECK((*r.beta)[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK((r.y_hat - Eigen::VectorXd::Constant(4, 3.0)).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK_FALSE(r.aggregation_consistent);
  CHECK(r.residuals_low.has_value());
  CHECK_FALSE(r.Q.has_value());
  CHECK_FALSE(r.rho.has_value());
}

TEST_CASE("ols exact-fit identity and rank detection") {
  tdisagg::SynthData data = tdtest::random_frame(5, 8, 3, AggregationRule::sum);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  Eigen::VectorXd y_low = cm.aggregate(data.x);
  FitResult r = fit(MethodId::ols, y_low, data.x, cm, no_intercept());
  CHECK((*r.beta)[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((r.y_hat - data.x).lpNorm<Eigen::Infinity>() <= 1e-8);

  // constant X with an intercept makes the design collinear
  Eigen::VectorXd constant = Eigen::VectorXd::Constant(data.x.size(), 4.2);
  CHECK_THROWS_WITH_AS(fit(MethodId::ols, y_low, constant, cm, FitOptions{}),
                       doctest::Contains("RankDeficient"), Error);
}

TEST_CASE("uniform splits per rule") {
  Frame f4 = tdtest::make_frame(
      {{"a", 1, 100.0, 0.0}, {"a", 2, 100.0, 0.0}, {"a", 3, 100.0, 0.0}, {"a", 4, 100.0, 0.0}});
  Eigen::VectorXd y1(1), x4 = Eigen::VectorXd::Zero(4);
  y1 << 100;
  FitResult sum = fit(MethodId::uniform, y1, x4, build_C(f4, AggregationRule::sum));
  CHECK((sum.y_hat - Eigen::VectorXd::Constant(4, 25.0)).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(sum.aggregation_consistent);

  Frame f2 = tdtest::make_frame({{"a", 1, 10.0, 0.0}, {"a", 2, 10.0, 0.0}});
  Eigen::VectorXd y10(1), x2 = Eigen::VectorXd::Zero(2);
  y10 << 10;
  FitResult avg = fit(MethodId::uniform, y10, x2, build_C(f2, AggregationRule::average));
  CHECK(avg.y_hat[0] == 10.0);
  CHECK(avg.y_hat[1] == 10.0);

  Frame f3 = tdtest::make_frame({{"a", 1, 7.0, 0.0}, {"a", 2, 7.0, 0.0}, {"a", 3, 7.0, 0.0}});
  Eigen::VectorXd y7(1), x3 = Eigen::VectorXd::Zero(3);
  y7 << 7;
  FitResult first = fit(MethodId::uniform, y7, x3, build_C(f3, AggregationRule::first));
  CHECK(first.y_hat[0] == 7.0);
  CHECK(first.y_hat[1] == 0.0);
  CHECK(first.y_hat[2] == 0.0);
}

TEST_CASE("denton h=1 splits a single group evenly") {
  Frame f = tdtest::make_frame({{"a", 1, 4.0, 0.0}, {"a", 2, 4.0, 0.0}});
  Eigen::VectorXd y(1), x = Eigen::VectorXd::Zero(2);
  y << 4;
  FitResult r = fit(MethodId::denton, y, x, build_C(f, AggregationRule::sum));
  CHECK(r.y_hat[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.y_hat[1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("denton h=1 matches the Lagrangian oracle") {
  Frame f = tdtest::make_frame(
      {{"a", 1, 4.0, 0.0}, {"a", 2, 4.0, 0.0}, {"b", 1, 8.0, 0.0}, {"b", 2, 8.0, 0.0}});
  ConversionMatrix cm = build_C(f, AggregationRule::sum);
  Eigen::VectorXd y(2), x = Eigen::VectorXd::Zero(4);
  y << 4, 8;
  FitResult r = fit(MethodId::denton, y, x, cm);

  const Eigen::MatrixXd d = first_difference(4);
  const Eigen::VectorXd oracle = qp_oracle(d.transpose() * d, cm.dense(), y);
  CHECK((r.y_hat - oracle).lpNorm<Eigen::Infinity>() <= 1e-5);
  CHECK(r.aggregation_consistent);
  CHECK(r.Q.has_value());
  CHECK(r.V.has_value());
}

TEST_CASE("denton reproduces constant series for equal targets") {
  for (AggregationRule rule : tdtest::kAllRules) {
    Frame f = tdtest::make_frame({{"a", 1, 6.0, 0.0},
                                  {"a", 2, 6.0, 0.0},
                                  {"a", 3, 6.0, 0.0},
                                  {"b", 1, 6.0, 0.0},
                                  {"b", 2, 6.0, 0.0},
                                  {"b", 3, 6.0, 0.0}});
    ConversionMatrix cm = build_C(f, rule);
    Eigen::VectorXd y(2);
    y << 6, 6;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
    FitResult r = fit(MethodId::denton, y, x, cm);
    const double level = rule == AggregationRule::sum ? 2.0 : 6.0;
    CHECK((r.y_hat - Eigen::VectorXd::Constant(6, level)).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("denton orders h=2 and h=3 match the QP oracle") {
  tdisagg::SynthData data = tdtest::random_frame(9, 5, 3, AggregationRule::sum);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  for (int h : {2, 3}) {
    FitOptions o;
    o.denton_h = h;
    FitResult r = fit(MethodId::denton, data.y_low, data.x, cm, o);
    Eigen::MatrixXd dh = first_difference(15);
    for (int k = 1; k < h; ++k) dh = first_difference(dh.rows()) * dh;
    const Eigen::VectorXd oracle = qp_oracle(dh.transpose() * dh, cm.dense(), data.y_low);
    CHECK((r.y_hat - oracle).lpNorm<Eigen::Infinity>() <=
          1e-5 * (1.0 + oracle.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("denton-cholette keeps an already-consistent base series") {
  tdisagg::SynthData data = tdtest::random_frame(12, 6, 4, AggregationRule::average);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::average);
  Eigen::VectorXd y_low = cm.aggregate(data.x);
  FitResult r = fit(MethodId::denton_cholette, y_low, data.x, cm);
  CHECK((r.y_hat - data.x).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("denton-cholette with a zero base reduces to denton") {
  tdisagg::SynthData data = tdtest::random_frame(13, 5, 4, AggregationRule::sum);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(20);
  FitResult cholette = fit(MethodId::denton_cholette, data.y_low, zero, cm);
  FitResult denton = fit(MethodId::denton, data.y_low, zero, cm);
  CHECK((cholette.y_hat - denton.y_hat).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("denton-cholette huge weight pins a sub-period to the base") {
  tdisagg::SynthData data = tdtest::random_frame(14, 4, 3, AggregationRule::sum);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  Eigen::VectorXd y_low = cm.aggregate(data.x);
  y_low.array() += 5.0;  // force a nonzero discrepancy
  FitOptions o;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(12, 1e-6);
  w[5] = 1e12;
  o.cholette_weights = w;
  FitResult r = fit(MethodId::denton_cholette, y_low, data.x, cm, o);
  const double scale = 1.0 + data.x.lpNorm<Eigen::Infinity>();
  CHECK(std::abs(r.y_hat[5] - data.x[5]) <= 1e-6 * scale);
  CHECK(r.aggregation_consistent);

  Eigen::VectorXd bad = Eigen::VectorXd::Constant(12, -1.0);
  FitOptions bad_o;
  bad_o.cholette_weights = bad;
  CHECK_THROWS_AS(fit(MethodId::denton_cholette, y_low, data.x, cm, bad_o), Error);
}

TEST_CASE("chow-lin with rho=0 distributes to exact consistency") {
  tdisagg::SynthData data = tdtest::random_frame(21, 10, 4, AggregationRule::sum, 0.0, 3.0);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  FitOptions o;
  o.rho = 0.0;
  FitResult r = fit(MethodId::chow_lin, data.y_low, data.x, cm, o);
  CHECK(r.aggregation_consistent);
  CHECK((cm.aggregate(r.y_hat) - data.y_low).lpNorm<Eigen::Infinity>() <=
        1e-9 * (1.0 + data.y_low.lpNorm<Eigen::Infinity>()));
  CHECK(r.Q.has_value());
  CHECK(r.V.has_value());
  CHECK(r.vcov.has_value());
  // rho=0 makes Q the identity
  CHECK((*r.Q - Eigen::MatrixXd::Identity(40, 40)).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("chow-lin exact-fit identity") {
  tdisagg::SynthData data = tdtest::random_frame(22, 8, 4, AggregationRule::average);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::average);
  Eigen::VectorXd y_low = cm.aggregate(data.x);
  FitOptions o = no_intercept();
  o.rho = 0.6;
  FitResult r = fit(MethodId::chow_lin, y_low, data.x, cm, o);
  CHECK((*r.beta)[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.residuals_low->lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + y_low.lpNorm<Eigen::Infinity>()));
  CHECK((r.y_hat - data.x).lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + data.x.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("chow-lin recovers the slope within 10 percent (Monte-Carlo)") {
  tdisagg::SynthConfig cfg;
  cfg.seed = 20240, cfg.n_low = 50, cfg.m = 4, cfg.rho = 0.5, cfg.beta = 2.0, cfg.noise_sd = 1.0;
  cfg.rule = AggregationRule::sum;
  tdisagg::SynthData data = make_synthetic(cfg);
  ConversionMatrix cm = build_C(data.frame, cfg.rule);
  FitOptions o;
  o.rho = 0.5;
  FitResult r = fit(MethodId::chow_lin, data.y_low, data.x, cm, o);
  CHECK((*r.beta)[0] > 1.8);
  CHECK((*r.beta)[0] < 2.2);
}

TEST_CASE("ecotrim and quilis are chow-lin at pinned rho, bitwise") {
  tdisagg::SynthData data = tdtest::random_frame(23, 7, 3, AggregationRule::sum);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  FitOptions fixed;
  fixed.rho = 0.75;
  FitResult eco = fit(MethodId::chow_lin_ecotrim, data.y_low, data.x, cm);
  FitResult manual = fit(MethodId::chow_lin, data.y_low, data.x, cm, fixed);
  CHECK((eco.y_hat - manual.y_hat).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(*eco.rho == 0.75);

  fixed.rho = 0.15;
  FitResult quilis = fit(MethodId::chow_lin_quilis, data.y_low, data.x, cm);
  FitResult manual15 = fit(MethodId::chow_lin, data.y_low, data.x, cm, fixed);
  CHECK((quilis.y_hat - manual15.y_hat).lpNorm<Eigen::Infinity>() == 0.0);

  // both keep the exact-fit identity
  Eigen::VectorXd consistent = cm.aggregate(data.x);
  FitResult eco_exact = fit(MethodId::chow_lin_ecotrim, consistent, data.x, cm, no_intercept());
  CHECK((eco_exact.y_hat - data.x).lpNorm<Eigen::Infinity>() <=
        1e-8 * (1.0 + data.x.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("chow-lin-opt composes the optimizer with the fixed fit") {
  tdisagg::SynthData data = tdtest::random_frame(24, 12, 4, AggregationRule::sum, 0.6, 2.0);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  FitResult opt = fit(MethodId::chow_lin_opt, data.y_low, data.x, cm);
  REQUIRE(opt.rho.has_value());
  CHECK(*opt.rho >= -0.9);
  CHECK(*opt.rho <= 0.99);
  REQUIRE(opt.rho_details.has_value());

  FitOptions at_opt;
  at_opt.rho = *opt.rho;
  FitResult fixed = fit(MethodId::chow_lin, data.y_low, data.x, cm, at_opt);
  CHECK((opt.y_hat - fixed.y_hat).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((*opt.beta - *fixed.beta).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(opt.aggregation_consistent);
}

TEST_CASE("chow-lin-opt stays near zero on uncorrelated data (median of 9 seeds)") {
  // single draws can land on the boundary (the profile likelihood is nearly
  // flat in rho for aggregated white noise), so assert the Monte-Carlo median
  std::vector<double> estimates;
  for (unsigned seed = 0; seed < 9; ++seed) {
    tdisagg::SynthData data =
        tdtest::random_frame(3000 + seed, 80, 4, AggregationRule::sum, 0.0, 2.0);
    ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
    FitResult r = fit(MethodId::chow_lin_opt, data.y_low, data.x, cm);
    CHECK(*r.rho >= -0.9);
    CHECK(*r.rho <= 0.99);
    estimates.push_back(*r.rho);
  }
  std::sort(estimates.begin(), estimates.end());
  CHECK(std::abs(estimates[4]) <= 0.3);
}

TEST_CASE("litterman identities: fernandez at 0, fast at 0.9") {
  tdisagg::SynthData data = tdtest::random_frame(26, 9, 3, AggregationRule::average);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::average);

  FitOptions zero;
  zero.rho = 0.0;
  FitResult litterman0 = fit(MethodId::litterman, data.y_low, data.x, cm, zero);
  FitResult fernandez = fit(MethodId::fernandez, data.y_low, data.x, cm);
  CHECK((litterman0.y_hat - fernandez.y_hat).lpNorm<Eigen::Infinity>() <= 1e-9);

  FitOptions nine;
  nine.rho = 0.9;
  FitResult litterman9 = fit(MethodId::litterman, data.y_low, data.x, cm, nine);
  FitResult fast = fit(MethodId::fast, data.y_low, data.x, cm);
  CHECK((litterman9.y_hat - fast.y_hat).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(*fast.rho == 0.9);

  Eigen::VectorXd consistent = cm.aggregate(data.x);
  FitResult exact = fit(MethodId::litterman, consistent, data.x, cm, [] {
    FitOptions o;
    o.intercept = false;
    o.rho = 0.4;
    return o;
  }());
  CHECK((exact.y_hat - data.x).lpNorm<Eigen::Infinity>() <=
        1e-8 * (1.0 + data.x.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("fernandez distributes a random walk consistently") {
  tdisagg::SynthData data = tdtest::random_frame(27, 10, 4, AggregationRule::sum, 0.0, 0.0);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  // cumulate noise into a random-walk target
  Eigen::VectorXd walk(40);
  NormalSampler normal(99);
  double s = 0.0;
  for (Eigen::Index i = 0; i < 40; ++i) {
    s += normal();
    walk[i] = s;
  }
  Eigen::VectorXd y_low = cm.aggregate(walk);
  FitResult r = fit(MethodId::fernandez, y_low, data.x, cm);
  CHECK((cm.aggregate(r.y_hat) - y_low).lpNorm<Eigen::Infinity>() <=
        1e-6 * (1.0 + y_low.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("litterman-opt composes and dominates the rho=0 candidate") {
  tdisagg::SynthData data = tdtest::random_frame(28, 12, 4, AggregationRule::sum, 0.7, 2.0);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  FitResult opt = fit(MethodId::litterman_opt, data.y_low, data.x, cm);
  REQUIRE(opt.rho_details.has_value());
  CHECK(*opt.rho >= -0.9);
  CHECK(*opt.rho <= 0.99);

  FitOptions at_opt;
  at_opt.rho = *opt.rho;
  FitResult fixed = fit(MethodId::litterman, data.y_low, data.x, cm, at_opt);
  CHECK((opt.y_hat - fixed.y_hat).lpNorm<Eigen::Infinity>() == 0.0);

  // minrss at the optimum is no worse than the rho=0 interior candidate
  RhoOptions ro;
  ro.objective = RhoObjective::minrss;
  ro.builder = QBuilder::litterman;
  RhoResult at_zero_scan = optimize(data.y_low, data.x, cm, ro);
  double f_zero = std::numeric_limits<double>::infinity();
  for (const auto& [rho, value] : at_zero_scan.objective_trace)
    if (std::abs(rho) < 1e-12) f_zero = value;
  CHECK(opt.rho_details->objective_at_opt <= f_zero + 1e-9);
}

TEST_CASE("fast runs measurably quicker than litterman-opt") {
  tdisagg::SynthData data = tdtest::random_frame(29, 100, 4, AggregationRule::sum, 0.6, 2.0);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  const auto t0 = std::chrono::steady_clock::now();
  fit(MethodId::fast, data.y_low, data.x, cm);
  const auto t1 = std::chrono::steady_clock::now();
  fit(MethodId::litterman_opt, data.y_low, data.x, cm);
  const auto t2 = std::chrono::steady_clock::now();
  CHECK((t1 - t0) < (t2 - t1));
}

TEST_CASE("aggregation consistency holds across methods, rules, sizes") {
  unsigned seed = 500;
  for (AggregationRule rule : tdtest::kAllRules) {
    tdisagg::SynthData data = tdtest::random_frame(seed++, 6 + seed % 7, 3, rule, 0.4, 2.0);
    ConversionMatrix cm = build_C(data.frame, rule);
    for (MethodId id : fittable_methods()) {
      FitResult r = fit(id, data.y_low, data.x, cm);
      if (id == MethodId::ols) {
        CHECK_FALSE(r.aggregation_consistent);
        continue;
      }
      CHECK(r.aggregation_consistent);
      CHECK((cm.aggregate(r.y_hat) - data.y_low).lpNorm<Eigen::Infinity>() <=
            1e-6 * (1.0 + data.y_low.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("regression methods honour the exact-fit identity") {
  tdisagg::SynthData data = tdtest::random_frame(31, 9, 4, AggregationRule::sum);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  Eigen::VectorXd y_low = cm.aggregate(data.x);
  for (MethodId id : kRegressionMethods) {
    FitResult r = fit(id, y_low, data.x, cm, no_intercept());
    CHECK((r.y_hat - data.x).lpNorm<Eigen::Infinity>() <=
          1e-8 * (1.0 + data.x.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("scale equivariance without intercept") {
  tdisagg::SynthData data = tdtest::random_frame(32, 8, 3, AggregationRule::average, 0.5, 1.0);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::average);
  const double c = 37.5;
  for (MethodId id : {MethodId::ols, MethodId::chow_lin, MethodId::litterman,
                      MethodId::fernandez, MethodId::fast}) {
    FitResult base = fit(id, data.y_low, data.x, cm, no_intercept());
    FitResult scaled = fit(id, (c * data.y_low).eval(), (c * data.x).eval(), cm, no_intercept());
    CHECK((scaled.y_hat - c * base.y_hat).lpNorm<Eigen::Infinity>() <=
          1e-9 * (1.0 + (c * base.y_hat).lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("fit rejects bad inputs") {
  tdisagg::SynthData data = tdtest::random_frame(33, 4, 2, AggregationRule::sum);
  ConversionMatrix cm = build_C(data.frame, AggregationRule::sum);
  CHECK_THROWS_AS(fit(MethodId::chow_lin, data.y_low, Eigen::VectorXd::Ones(3), cm), Error);
  FitOptions o;
  o.rho = 1.5;
  CHECK_THROWS_AS(fit(MethodId::chow_lin, data.y_low, data.x, cm, o), Error);
  o.rho = 0.5;
  o.denton_h = 7;
  CHECK_THROWS_AS(fit(MethodId::denton, data.y_low, data.x, cm, o), Error);
  CHECK_THROWS_AS(fit(MethodId::ensemble, data.y_low, data.x, cm), Error);
}
