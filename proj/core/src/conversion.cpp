#include "tdisagg/conversion.hpp"

namespace tdisagg {

AggregationRule parse_rule(std::string_view name) {
  if (name == "sum") return AggregationRule::sum;
  if (name == "average") return AggregationRule::average;
  if (name == "first") return AggregationRule::first;
  if (name == "last") return AggregationRule::last;
  raise(ErrorCode::InvalidArgument, "unknown conversion rule '" + std::string(name) + "'");
}

std::string_view rule_name(AggregationRule rule) {
  switch (rule) {
    case AggregationRule::sum: return "sum";
    case AggregationRule::average: return "average";
    case AggregationRule::first: return "first";
    case AggregationRule::last: return "last";
  }
  return "?";
}

ConversionMatrix ConversionMatrix::build(const Frame& frame, AggregationRule rule) {
  ConversionMatrix cm;
  cm.rule_ = rule;
  cm.n_ = frame.n();
  for (const Group& g : frame.groups()) {
    for (std::size_t i = 0; i < g.size; ++i) {
      if (frame.rows()[g.start + i].grain != static_cast<long long>(i + 1))
        raise(ErrorCode::IncompleteFrame,
              "group " + g.index.text() + " lacks grain " + std::to_string(i + 1) +
                  "; run completion first");
    }
    cm.spans_.push_back(GroupSpan{g.start, g.size});
  }
  cm.dense_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cm.spans_.size()),
                                    static_cast<Eigen::Index>(cm.n_));
  for (std::size_t g = 0; g < cm.spans_.size(); ++g) {
    const GroupSpan& s = cm.spans_[g];
    for (std::size_t k = 0; k < s.size; ++k)
      cm.dense_(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(s.start + k)) =
          cm.weight(g, k);
  }
  return cm;
}

double ConversionMatrix::weight(std::size_t group, std::size_t offset) const {
  const GroupSpan& s = spans_[group];
  switch (rule_) {
    case AggregationRule::sum: return 1.0;
    case AggregationRule::average: return 1.0 / static_cast<double>(s.size);
    case AggregationRule::first: return offset == 0 ? 1.0 : 0.0;
    case AggregationRule::last: return offset + 1 == s.size ? 1.0 : 0.0;
  }
  return 0.0;
}

Eigen::VectorXd ConversionMatrix::aggregate(const Eigen::VectorXd& y) const {
  if (static_cast<std::size_t>(y.size()) != n_)
    raise(ErrorCode::LengthMismatch, "vector length " + std::to_string(y.size()) +
                                         " does not match n=" + std::to_string(n_));
  Eigen::VectorXd out(static_cast<Eigen::Index>(spans_.size()));
  for (std::size_t g = 0; g < spans_.size(); ++g) {
    const GroupSpan& s = spans_[g];
    double acc = 0.0;
    switch (rule_) {
      case AggregationRule::sum:
        for (std::size_t k = 0; k < s.size; ++k) acc += y[static_cast<Eigen::Index>(s.start + k)];
        break;
      case AggregationRule::average:
        for (std::size_t k = 0; k < s.size; ++k) acc += y[static_cast<Eigen::Index>(s.start + k)];
        acc /= static_cast<double>(s.size);
        break;
      case AggregationRule::first:
        acc = y[static_cast<Eigen::Index>(s.start)];
        break;
      case AggregationRule::last:
        acc = y[static_cast<Eigen::Index>(s.start + s.size - 1)];
        break;
    }
    out[static_cast<Eigen::Index>(g)] = acc;
  }
  return out;
}

Eigen::MatrixXd ConversionMatrix::aggregate_columns(const Eigen::MatrixXd& m) const {
  if (static_cast<std::size_t>(m.rows()) != n_)
    raise(ErrorCode::LengthMismatch, "matrix has " + std::to_string(m.rows()) +
                                         " rows, expected " + std::to_string(n_));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(spans_.size()), m.cols());
  for (std::size_t g = 0; g < spans_.size(); ++g) {
    const GroupSpan& s = spans_[g];
    switch (rule_) {
      case AggregationRule::sum:
        out.row(static_cast<Eigen::Index>(g)) =
            m.middleRows(static_cast<Eigen::Index>(s.start), static_cast<Eigen::Index>(s.size))
                .colwise()
                .sum();
        break;
      case AggregationRule::average:
        out.row(static_cast<Eigen::Index>(g)) =
            m.middleRows(static_cast<Eigen::Index>(s.start), static_cast<Eigen::Index>(s.size))
                .colwise()
                .sum() /
            static_cast<double>(s.size);
        break;
      case AggregationRule::first:
        out.row(static_cast<Eigen::Index>(g)) = m.row(static_cast<Eigen::Index>(s.start));
        break;
      case AggregationRule::last:
        out.row(static_cast<Eigen::Index>(g)) =
            m.row(static_cast<Eigen::Index>(s.start + s.size - 1));
        break;
    }
  }
  return out;
}

Eigen::VectorXd ConversionMatrix::apply_transposed(const Eigen::VectorXd& v) const {
  if (static_cast<std::size_t>(v.size()) != spans_.size())
    raise(ErrorCode::LengthMismatch, "vector length " + std::to_string(v.size()) +
                                         " does not match n_low=" + std::to_string(spans_.size()));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
  for (std::size_t g = 0; g < spans_.size(); ++g) {
    const GroupSpan& s = spans_[g];
    for (std::size_t k = 0; k < s.size; ++k) {
      double w = weight(g, k);
      if (w != 0.0)
        out[static_cast<Eigen::Index>(s.start + k)] += w * v[static_cast<Eigen::Index>(g)];
    }
  }
  return out;
}

ConversionMatrix build_C(const Frame& frame, AggregationRule rule) {
  return ConversionMatrix::build(frame, rule);
}

Eigen::VectorXd aggregate(const ConversionMatrix& cm, const Eigen::VectorXd& y) {
  return cm.aggregate(y);
}

}  // namespace tdisagg
