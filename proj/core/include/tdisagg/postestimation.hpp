#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string_view>
#include <vector>

#include "tdisagg/conversion.hpp"

namespace tdisagg {

enum class AdjustStrategy {
  redistribute,
  qp_projection,
  zero_fallback,
  first_reset,
  last_reset,
  even_spread,
  unresolved,
};

std::string_view adjust_strategy_name(AdjustStrategy strategy);

struct GroupAdjustment {
  std::size_t group = 0;
  AggregationRule rule = AggregationRule::sum;
  AdjustStrategy strategy = AdjustStrategy::unresolved;
  bool resolved = true;  // false when non-negativity or the rule's aggregate had to give
  Eigen::VectorXd before;
  Eigen::VectorXd after;
};

struct AdjustmentReport {
  std::vector<GroupAdjustment> groups;  // only groups that contained negatives
  std::size_t touched() const { return groups.size(); }
};

struct AdjustResult {
  Eigen::VectorXd y_adjusted;
  AdjustmentReport report;
};

// Group-by-group correction of negative predictions. Clean groups pass
// through untouched; corrected groups preserve the rule's aggregate (group
// sum, mean, first or last value) whenever that target is non-negative.
AdjustResult adjust(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y_low,
                    const ConversionMatrix& cm);

// Exact Euclidean projection onto { y >= 0, sum y = target_sum } by the
// O(m log m) sort-threshold algorithm.
Eigen::VectorXd simplex_project(const Eigen::VectorXd& v, double target_sum);

}  // namespace tdisagg
