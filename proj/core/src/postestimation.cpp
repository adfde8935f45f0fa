#include "tdisagg/postestimation.hpp"

#include <algorithm>
#include <cmath>

namespace tdisagg {

std::string_view adjust_strategy_name(AdjustStrategy strategy) {
  switch (strategy) {
    case AdjustStrategy::redistribute: return "redistribute";
    case AdjustStrategy::qp_projection: return "qp-projection";
    case AdjustStrategy::zero_fallback: return "zero-fallback";
    case AdjustStrategy::first_reset: return "first-reset";
    case AdjustStrategy::last_reset: return "last-reset";
    case AdjustStrategy::even_spread: return "even-spread";
    case AdjustStrategy::unresolved: return "unresolved";
  }
  return "?";
}

Eigen::VectorXd simplex_project(const Eigen::VectorXd& v, double target_sum) {
  if (!(target_sum >= 0.0))
    raise(ErrorCode::NegativeTarget, "projection target must be >= 0, got " +
                                         format_number(target_sum));
  const Eigen::Index m = v.size();
  if (target_sum == 0.0) return Eigen::VectorXd::Zero(m);
  std::vector<double> sorted(v.data(), v.data() + m);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    cumulative += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - target_sum) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

namespace {

struct GroupFix {
  Eigen::VectorXd after;
  AdjustStrategy strategy;
  bool resolved;
};

GroupFix fix_sum(const Eigen::VectorXd& v) {
  const Eigen::Index m = v.size();
  const double total = v.sum();
  if (total < 0.0) {
    // a negative total can never be split into non-negative parts
    GroupFix fix{Eigen::VectorXd::Constant(m, total / static_cast<double>(m)),
                 AdjustStrategy::even_spread, false};
    return fix;
  }
  double positive_sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (v[i] > 0.0) positive_sum += v[i];
  if (positive_sum <= 0.0) {
    // all entries <= 0 with total >= 0 means everything is zero
    return GroupFix{Eigen::VectorXd::Constant(m, total / static_cast<double>(m)),
                    AdjustStrategy::even_spread, true};
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  const double scale = total / positive_sum;
  for (Eigen::Index i = 0; i < m; ++i)
    if (v[i] > 0.0) out[i] = v[i] * scale;
  return GroupFix{std::move(out), AdjustStrategy::redistribute, true};
}

GroupFix fix_average(const Eigen::VectorXd& v) {
  const double total = v.sum();
  if (total < 0.0)
    return GroupFix{v.cwiseMax(0.0), AdjustStrategy::zero_fallback, false};
  return GroupFix{simplex_project(v, total), AdjustStrategy::qp_projection, true};
}

// `pinned` is the sub-period that carries the aggregate (0 for first rule,
// m-1 for last). The remaining entries absorb the correction.
GroupFix fix_pinned(const Eigen::VectorXd& v, Eigen::Index pinned, AdjustStrategy reset_tag) {
  const Eigen::Index m = v.size();
  const double total = v.sum();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);

  if (v[pinned] < 0.0) {
    // the aggregate itself is negative: reset it, keep the group total if
    // the rest can absorb it, otherwise just clamp
    double positive_sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
      if (i != pinned && v[i] > 0.0) positive_sum += v[i];
    if (total >= 0.0 && positive_sum > 0.0) {
      const double scale = total / positive_sum;
      for (Eigen::Index i = 0; i < m; ++i)
        if (i != pinned && v[i] > 0.0) out[i] = v[i] * scale;
    } else {
      for (Eigen::Index i = 0; i < m; ++i)
        if (i != pinned) out[i] = std::max(v[i], 0.0);
    }
    return GroupFix{std::move(out), reset_tag, false};
  }

  // pinned value is fine; fix the rest while keeping it untouched
  out[pinned] = v[pinned];
  const double needed = total - v[pinned];
  double positive_sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (i != pinned && v[i] > 0.0) positive_sum += v[i];
  if (needed >= 0.0 && positive_sum > 0.0) {
    const double scale = needed / positive_sum;
    for (Eigen::Index i = 0; i < m; ++i)
      if (i != pinned && v[i] > 0.0) out[i] = v[i] * scale;
    return GroupFix{std::move(out), AdjustStrategy::redistribute, true};
  }
  if (needed >= 0.0) {
    // nothing positive to scale: spread the remainder evenly
    for (Eigen::Index i = 0; i < m; ++i)
      if (i != pinned) out[i] = needed / static_cast<double>(m - 1);
    return GroupFix{std::move(out), AdjustStrategy::even_spread, true};
  }
  // the non-pinned mass is negative in total: zero the negatives and accept
  // the changed group total (the rule's aggregate is the pinned value)
  for (Eigen::Index i = 0; i < m; ++i)
    if (i != pinned) out[i] = std::max(v[i], 0.0);
  return GroupFix{std::move(out), AdjustStrategy::zero_fallback, true};
}

}  // namespace

AdjustResult adjust(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y_low,
                    const ConversionMatrix& cm) {
  if (static_cast<std::size_t>(y_hat.size()) != cm.n_high() ||
      static_cast<std::size_t>(y_low.size()) != cm.n_low())
    raise(ErrorCode::LengthMismatch, "vector lengths do not match the conversion matrix");

  AdjustResult result;
  result.y_adjusted = y_hat;
  const auto& spans = cm.group_spans();
  for (std::size_t g = 0; g < spans.size(); ++g) {
    const Eigen::Index start = static_cast<Eigen::Index>(spans[g].start);
    const Eigen::Index size = static_cast<Eigen::Index>(spans[g].size);
    Eigen::VectorXd v = y_hat.segment(start, size);
    if ((v.array() >= 0.0).all()) continue;

    GroupFix fix{Eigen::VectorXd(), AdjustStrategy::unresolved, false};
    switch (cm.rule()) {
      case AggregationRule::sum:
        fix = fix_sum(v);
        break;
      case AggregationRule::average:
        fix = fix_average(v);
        break;
      case AggregationRule::first:
        fix = fix_pinned(v, 0, AdjustStrategy::first_reset);
        break;
      case AggregationRule::last:
        fix = fix_pinned(v, size - 1, AdjustStrategy::last_reset);
        break;
    }
    result.y_adjusted.segment(start, size) = fix.after;

    GroupAdjustment record;
    record.group = g;
    record.rule = cm.rule();
    record.strategy = fix.strategy;
    record.resolved = fix.resolved;
    record.before = std::move(v);
    record.after = fix.after;
    result.report.groups.push_back(std::move(record));
  }
  return result;
}

}  // namespace tdisagg
