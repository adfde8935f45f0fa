#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string_view>
#include <vector>

#include "tdisagg/frame.hpp"

namespace tdisagg {

enum class AggregationRule { sum, average, first, last };

AggregationRule parse_rule(std::string_view name);
std::string_view rule_name(AggregationRule rule);

struct GroupSpan {
  std::size_t start = 0;
  std::size_t size = 0;
};

// The aggregation operator C mapping length-n high-frequency vectors to one
// value per low-frequency group. Row g is nonzero only on group g's span:
// sum -> ones, average -> 1/m_g, first/last -> a single 1.
class ConversionMatrix {
 public:
  static ConversionMatrix build(const Frame& frame, AggregationRule rule);

  const Eigen::MatrixXd& dense() const { return dense_; }
  AggregationRule rule() const { return rule_; }
  const std::vector<GroupSpan>& group_spans() const { return spans_; }
  std::size_t n_low() const { return spans_.size(); }
  std::size_t n_high() const { return n_; }

  // in-span weight of row `group` at `offset` (0..m_g-1)
  double weight(std::size_t group, std::size_t offset) const;

  Eigen::VectorXd aggregate(const Eigen::VectorXd& y) const;  // C * y
  // C * M, applied column-wise through the span structure
  Eigen::MatrixXd aggregate_columns(const Eigen::MatrixXd& m) const;
  Eigen::VectorXd apply_transposed(const Eigen::VectorXd& v) const;  // C' * v

 private:
  AggregationRule rule_ = AggregationRule::sum;
  std::vector<GroupSpan> spans_;
  std::size_t n_ = 0;
  Eigen::MatrixXd dense_;
};

ConversionMatrix build_C(const Frame& frame, AggregationRule rule);
Eigen::VectorXd aggregate(const ConversionMatrix& cm, const Eigen::VectorXd& y);

}  // namespace tdisagg
