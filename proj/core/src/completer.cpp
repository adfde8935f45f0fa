#include "tdisagg/completer.hpp"

#include <algorithm>
#include <cstdlib>

namespace tdisagg {

XInterp parse_x_interp(std::string_view name) {
  if (name == "linear") return XInterp::linear;
  if (name == "nearest") return XInterp::nearest;
  raise(ErrorCode::InvalidArgument, "unknown interpolation method '" + std::string(name) + "'");
}

std::string_view x_interp_name(XInterp method) {
  return method == XInterp::linear ? "linear" : "nearest";
}

namespace {

double interpolate_at(const std::vector<std::size_t>& obs_pos,
                      const std::vector<double>& obs_val, std::size_t pos, XInterp method) {
  // obs_pos ascending, nonempty
  auto it = std::lower_bound(obs_pos.begin(), obs_pos.end(), pos);
  if (it == obs_pos.begin()) return obs_val.front();
  if (it == obs_pos.end()) return obs_val.back();
  std::size_t hi = static_cast<std::size_t>(it - obs_pos.begin());
  std::size_t lo = hi - 1;
  if (method == XInterp::nearest) {
    // ties go to the earlier neighbour
    return (pos - obs_pos[lo] <= obs_pos[hi] - pos) ? obs_val[lo] : obs_val[hi];
  }
  double t = static_cast<double>(pos - obs_pos[lo]) /
             static_cast<double>(obs_pos[hi] - obs_pos[lo]);
  return obs_val[lo] + t * (obs_val[hi] - obs_val[lo]);
}

}  // namespace

CompletionResult complete(const Frame& frame, const CompletionConfig& config) {
  CompletionResult result;
  if (frame.n() == 0) {
    result.frame = frame;
    return result;
  }

  const long long m = frame.max_grain();
  const auto& groups = frame.groups();

  std::vector<Row> rows;
  rows.reserve(groups.size() * static_cast<std::size_t>(m));

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Group& group = groups[g];
    const bool complete_group = group.size == static_cast<std::size_t>(m) &&
                                frame.rows()[group.start].grain == 1 &&
                                frame.rows()[group.start + group.size - 1].grain == m;
    const bool boundary = g == 0 || g + 1 == groups.size();
    if (!complete_group && boundary && !config.pad_boundaries) {
      result.log.dropped_groups.push_back(group.index);
      continue;
    }
    if (!complete_group && boundary) result.log.padded_groups.push_back(group.index);

    std::size_t i = group.start;
    const std::size_t end = group.start + group.size;
    for (long long grain = 1; grain <= m; ++grain) {
      while (i < end && frame.rows()[i].grain < grain) ++i;  // grains < 1 are carried over as-is
      if (i < end && frame.rows()[i].grain == grain) {
        rows.push_back(frame.rows()[i]);
        ++i;
      } else {
        rows.push_back(Row{group.index, grain, group.y, std::nullopt});
        result.log.inserted.emplace_back(group.index, grain);
      }
    }
  }

  // interpolate missing X over the completed global row order
  std::vector<std::size_t> obs_pos;
  std::vector<double> obs_val;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].x) {
      obs_pos.push_back(i);
      obs_val.push_back(*rows[i].x);
    }
  }
  if (obs_pos.empty())
    raise(ErrorCode::AllXMissing, "indicator X has no observed values to interpolate from");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].x) continue;
    double v = interpolate_at(obs_pos, obs_val, i, config.x_method);
    rows[i].x = v;
    result.log.imputed_x.push_back(
        CompletionLog::ImputedX{rows[i].index, rows[i].grain, v, config.x_method});
  }

  result.frame = Frame(std::move(rows));
  return result;
}

}  // namespace tdisagg
