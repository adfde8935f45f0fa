#include "doctest.h"
#include "tdisagg/conversion.hpp"
#include "test_util.hpp"

using namespace tdisagg;

namespace {

Frame two_by_two() {
  return tdtest::make_frame(
      {{"a", 1, 1.0, 1.0}, {"a", 2, 1.0, 1.0}, {"b", 1, 2.0, 1.0}, {"b", 2, 2.0, 1.0}});
}

}  // namespace

TEST_CASE("build_C matches the per-rule matrix layout") {
  Frame f = two_by_two();

  ConversionMatrix sum = build_C(f, AggregationRule::sum);
  Eigen::MatrixXd expect_sum(2, 4);
  expect_sum << 1, 1, 0, 0, 0, 0, 1, 1;
  CHECK((sum.dense() - expect_sum).norm() == 0.0);

  ConversionMatrix avg = build_C(f, AggregationRule::average);
  Eigen::MatrixXd expect_avg(2, 4);
  expect_avg << .5, .5, 0, 0, 0, 0, .5, .5;
  CHECK((avg.dense() - expect_avg).norm() == 0.0);

  ConversionMatrix last = build_C(f, AggregationRule::last);
  Eigen::MatrixXd expect_last(2, 4);
  expect_last << 0, 1, 0, 0, 0, 0, 0, 1;
  CHECK((last.dense() - expect_last).norm() == 0.0);
}

TEST_CASE("aggregate computes the exact product") {
  Frame f = two_by_two();
  Eigen::VectorXd y(4);

  y << 1, 2, 3, 4;
  Eigen::VectorXd sum = aggregate(build_C(f, AggregationRule::sum), y);
  CHECK(sum[0] == 3.0);
  CHECK(sum[1] == 7.0);

  y << 2, 4, 6, 8;
  Eigen::VectorXd avg = aggregate(build_C(f, AggregationRule::average), y);
  CHECK(avg[0] == 3.0);
  CHECK(avg[1] == 7.0);

  y << 9, 0, 5, 0;
  Eigen::VectorXd first = aggregate(build_C(f, AggregationRule::first), y);
  CHECK(first[0] == 9.0);
  CHECK(first[1] == 5.0);
}

TEST_CASE("build_C rejects incomplete frames and length mismatches") {
  Frame gap = tdtest::make_frame({{"a", 1, 1.0, 1.0}, {"a", 3, 1.0, 1.0}});
  CHECK_THROWS_AS(build_C(gap, AggregationRule::sum), Error);

  Frame f = two_by_two();
  ConversionMatrix cm = build_C(f, AggregationRule::sum);
  CHECK_THROWS_AS(cm.aggregate(Eigen::VectorXd::Ones(3)), Error);
}

TEST_CASE("ragged groups are supported") {
  Frame f = tdtest::make_frame(
      {{"a", 1, 1.0, 1.0}, {"a", 2, 1.0, 1.0}, {"a", 3, 1.0, 1.0}, {"b", 1, 2.0, 1.0}});
  ConversionMatrix cm = build_C(f, AggregationRule::average);
  Eigen::VectorXd y(4);
  y << 3, 6, 9, 5;
  Eigen::VectorXd out = cm.aggregate(y);
  CHECK(out[0] == doctest::Approx(6.0));
  CHECK(out[1] == 5.0);
}

TEST_CASE("C satisfies the row-sum and C C' diagonal identities") {
  for (unsigned seed : {3u, 4u}) {
    for (AggregationRule rule : tdtest::kAllRules) {
      tdisagg::SynthData data = tdtest::random_frame(seed, 9, 3, rule);
      ConversionMatrix cm = build_C(data.frame, rule);
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(cm.n_high()));
      const Eigen::VectorXd row_sums = cm.aggregate(ones);
      const Eigen::MatrixXd cct = cm.dense() * cm.dense().transpose();
      for (std::size_t g = 0; g < cm.n_low(); ++g) {
        const double m_g = static_cast<double>(cm.group_spans()[g].size);
        double expect_row = 0.0, expect_diag = 0.0;
        switch (rule) {
          case AggregationRule::sum:
            expect_row = m_g;
            expect_diag = m_g;
            break;
          case AggregationRule::average:
            expect_row = 1.0;
            expect_diag = 1.0 / m_g;
            break;
          case AggregationRule::first:
          case AggregationRule::last:
            expect_row = 1.0;
            expect_diag = 1.0;
            break;
        }
        CHECK(row_sums[static_cast<Eigen::Index>(g)] == doctest::Approx(expect_row).epsilon(1e-12));
        CHECK(cct(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g)) ==
              doctest::Approx(expect_diag).epsilon(1e-12));
        for (std::size_t h = 0; h < cm.n_low(); ++h)
          if (h != g)
            CHECK(std::abs(cct(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h))) <=
                  1e-12);
      }
      // span-based aggregate agrees with the dense product
      const Eigen::VectorXd dense_product = cm.dense() * data.y_true;
      CHECK((cm.aggregate(data.y_true) - dense_product).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  }
}
