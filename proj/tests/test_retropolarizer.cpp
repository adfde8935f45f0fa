#include <cmath>

#include "doctest.h"
#include "tdisagg/retropolarizer.hpp"
#include "test_util.hpp"

using namespace tdisagg;

namespace {

std::vector<std::optional<double>> with_gaps(const Eigen::VectorXd& full,
                                             const std::vector<std::size_t>& gaps) {
  std::vector<std::optional<double>> out(full.size());
  for (Eigen::Index i = 0; i < full.size(); ++i) out[static_cast<std::size_t>(i)] = full[i];
  for (std::size_t g : gaps) out[g].reset();
  return out;
}

RetroMethod method_of(RetroKind kind) {
  RetroMethod m;
  m.kind = kind;
  return m;
}

}  // namespace

TEST_CASE("proportion fills with the exact observed ratio") {
  Eigen::VectorXd x(5);
  x << 1, 2, 3, 5, 7;
  Eigen::VectorXd y = 2.0 * x;
  auto gaps = with_gaps(y, {4});
  RetroResult r = retropolate(gaps, x, method_of(RetroKind::proportion));
  CHECK(r.y_low_filled[4] == 14.0);
  REQUIRE(r.imputed_groups.size() == 1);
  CHECK(r.imputed_groups[0] == 4);
  CHECK(r.in_sample_rmse <= 1e-12);
}

TEST_CASE("linear recovers an affine relation") {
  Eigen::VectorXd x(8);
  x << 1, 2, 3, 4, 5, 6, 7, 8;
  Eigen::VectorXd y = (3.0 + 2.0 * x.array()).matrix();
  auto gaps = with_gaps(y, {2, 7});
  RetroResult r = retropolate(gaps, x, method_of(RetroKind::linear));
  CHECK(std::abs(r.y_low_filled[2] - (3.0 + 2.0 * 3.0)) <= 1e-8);
  CHECK(std::abs(r.y_low_filled[7] - (3.0 + 2.0 * 8.0)) <= 1e-8);
}

TEST_CASE("polynomial degree 2 matches the normal-equations oracle") {
  Eigen::VectorXd x(7);
  x << 1, 2, 3, 4, 5, 6, 7;
  Eigen::VectorXd y = x.array().square().matrix();
  auto gaps = with_gaps(y, {6});  // hide X = 7

  // oracle: solve the 3x3 normal equations on the observed pairs
  Eigen::MatrixXd design(6, 3);
  for (int i = 0; i < 6; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x[i];
    design(i, 2) = x[i] * x[i];
  }
  Eigen::VectorXd rhs = y.head(6);
  Eigen::VectorXd coef =
      (design.transpose() * design).ldlt().solve(design.transpose() * rhs);
  const double oracle = coef[0] + coef[1] * 7.0 + coef[2] * 49.0;

  RetroMethod m = method_of(RetroKind::polynomial);
  m.degree = 2;
  RetroResult r = retropolate(gaps, x, m);
  CHECK(std::abs(r.y_low_filled[6] - oracle) <= 1e-6);
  CHECK(std::abs(r.y_low_filled[6] - 49.0) <= 1e-6);
}

TEST_CASE("polynomial degree 3 recovers cubics") {
  Eigen::VectorXd x(9);
  x << -4, -3, -2, -1, 0, 1, 2, 3, 4;
  Eigen::VectorXd y = (x.array().cube() - 2.0 * x.array() + 1.0).matrix();
  auto gaps = with_gaps(y, {0, 8});
  RetroMethod m = method_of(RetroKind::polynomial);
  m.degree = 3;
  RetroResult r = retropolate(gaps, x, m);
  CHECK(std::abs(r.y_low_filled[0] - y[0]) <= 1e-6 * (1.0 + std::abs(y[0])));
  CHECK(std::abs(r.y_low_filled[8] - y[8]) <= 1e-6 * (1.0 + std::abs(y[8])));
}

TEST_CASE("exponential smoothing carries the state into gaps") {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(6);
  std::vector<std::optional<double>> y = {10.0, 20.0, std::nullopt, 30.0, std::nullopt,
                                          std::nullopt};
  RetroMethod m = method_of(RetroKind::exp_smoothing);
  m.alpha = 0.5;
  RetroResult r = retropolate(y, x, m);
  // states: s=10 (init), after y0: 10; after y1: 15; gap at 2 -> 15
  CHECK(r.y_low_filled[2] == doctest::Approx(15.0).epsilon(1e-12));
  // after y3=30: 22.5; trailing gaps take the last state
  CHECK(r.y_low_filled[4] == doctest::Approx(22.5).epsilon(1e-12));
  CHECK(r.y_low_filled[5] == doctest::Approx(22.5).epsilon(1e-12));
  // observed entries pass through unchanged
  CHECK(r.y_low_filled[0] == 10.0);
  CHECK(r.y_low_filled[1] == 20.0);
  CHECK(r.y_low_filled[3] == 30.0);
}

TEST_CASE("leading gaps take the first observed value") {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
  std::vector<std::optional<double>> y = {std::nullopt, 8.0, 12.0, std::nullopt};
  RetroMethod m = method_of(RetroKind::exp_smoothing);
  m.alpha = 1.0;  // state tracks the latest observation exactly
  RetroResult r = retropolate(y, x, m);
  CHECK(r.y_low_filled[0] == 8.0);
  CHECK(r.y_low_filled[3] == 12.0);
}

TEST_CASE("mlp fits a linear relation within 10 percent of the target sd") {
  Eigen::VectorXd x(25);
  for (int i = 0; i < 25; ++i) x[i] = 10.0 + 0.8 * i;
  Eigen::VectorXd y = (5.0 + 3.0 * x.array()).matrix();
  auto gaps = with_gaps(y, {20, 21, 22, 23, 24});  // 20 observed
  RetroResult r = retropolate(gaps, x, method_of(RetroKind::mlp));

  Eigen::VectorXd observed = y.head(20);
  const double sd = std::sqrt((observed.array() - observed.mean()).square().sum() / 20.0);
  CHECK(r.in_sample_rmse <= 0.1 * sd);

  // seeded initialisation keeps runs identical
  RetroResult again = retropolate(gaps, x, method_of(RetroKind::mlp));
  CHECK((r.y_low_filled - again.y_low_filled).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("observed entries always pass through unchanged") {
  Eigen::VectorXd x(10);
  x << 3, 1, 4, 1, 5, 9, 2, 6, 5, 3;
  Eigen::VectorXd y(10);
  y << 31, 12, 43, 14, 55, 96, 27, 68, 59, 30;
  auto gaps = with_gaps(y, {3, 8});
  for (RetroKind kind : {RetroKind::proportion, RetroKind::linear, RetroKind::polynomial,
                         RetroKind::exp_smoothing, RetroKind::mlp}) {
    RetroResult r = retropolate(gaps, x, method_of(kind));
    for (Eigen::Index i = 0; i < 10; ++i) {
      if (i == 3 || i == 8) continue;
      CHECK(r.y_low_filled[i] == y[i]);
    }
  }
}

TEST_CASE("auto selection thresholds") {
  // 4 observed -> proportion
  Eigen::VectorXd x4(5);
  x4 << 1, 2, 3, 4, 5;
  std::vector<std::optional<double>> y4 = {2.0, 4.0, 6.0, 8.0, std::nullopt};
  CHECK(auto_select(y4, x4).kind == RetroKind::proportion);

  // 20 observed with high correlation -> linear
  Eigen::VectorXd x20(21);
  std::vector<std::optional<double>> y20(21);
  for (int i = 0; i < 21; ++i) {
    x20[i] = i;
    y20[static_cast<std::size_t>(i)] = 5.0 + 2.0 * i + ((i % 2 == 0) ? 0.1 : -0.1);
  }
  y20[20].reset();
  CHECK(auto_select(y20, x20).kind == RetroKind::linear);

  // 8 observed with weak correlation -> exponential smoothing
  Eigen::VectorXd x8(9);
  x8 << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  std::vector<std::optional<double>> y8 = {5.0, -3.0, 4.0, -2.0, 6.0, -4.0, 3.0, -1.0,
                                           std::nullopt};
  RetroMethod pick8 = auto_select(y8, x8);
  CHECK(pick8.kind == RetroKind::exp_smoothing);
  CHECK(pick8.alpha == 0.5);

  // >= 12 observed with weak correlation -> quadratic
  Eigen::VectorXd x13(14);
  std::vector<std::optional<double>> y13(14);
  for (int i = 0; i < 14; ++i) {
    x13[i] = i;
    y13[static_cast<std::size_t>(i)] = (i % 3 == 0) ? 9.0 : ((i % 3 == 1) ? -7.0 : 2.0);
  }
  y13[13].reset();
  RetroMethod pick13 = auto_select(y13, x13);
  CHECK(pick13.kind == RetroKind::polynomial);
  CHECK(pick13.degree == 2);

  // retropolate with automatic resolves to the same choice
  RetroResult r = retropolate(y4, x4, RetroMethod{});
  CHECK(r.method_used.kind == RetroKind::proportion);
  CHECK(r.y_low_filled[4] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("error paths") {
  Eigen::VectorXd x(3);
  x << 1, 2, 3;
  std::vector<std::optional<double>> one_obs = {1.0, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(retropolate(one_obs, x, method_of(RetroKind::linear)), Error);

  std::vector<std::optional<double>> y3 = {1.0, 2.0, std::nullopt};
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(3, 4.0);
  CHECK_THROWS_AS(retropolate(y3, flat, method_of(RetroKind::linear)), Error);

  Eigen::VectorXd zero_sum(3);
  zero_sum << -1, 1, 0;
  CHECK_THROWS_AS(retropolate(y3, zero_sum, method_of(RetroKind::proportion)), Error);

  // polynomial needs degree+1 observations
  std::vector<std::optional<double>> y_three = {1.0, 2.0, 5.0};
  Eigen::VectorXd x3(3);
  x3 << 1, 2, 3;
  RetroMethod cubic = method_of(RetroKind::polynomial);
  cubic.degree = 3;
  CHECK_THROWS_AS(retropolate(y_three, x3, cubic), Error);

  // mlp needs at least 8
  CHECK_THROWS_AS(retropolate(y_three, x3, method_of(RetroKind::mlp)), Error);

  std::vector<std::optional<double>> none = {std::nullopt, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(auto_select(none, x3), Error);
}

TEST_CASE("parse and format retro method names") {
  CHECK(parse_retro_method("poly3").degree == 3);
  CHECK(parse_retro_method("expsmooth").kind == RetroKind::exp_smoothing);
  CHECK(retro_method_name(parse_retro_method("poly2")) == "poly2");
  CHECK_THROWS_AS(parse_retro_method("spline"), Error);
}
