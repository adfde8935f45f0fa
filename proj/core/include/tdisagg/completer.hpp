#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "tdisagg/frame.hpp"

namespace tdisagg {

enum class XInterp { linear, nearest };

XInterp parse_x_interp(std::string_view name);
std::string_view x_interp_name(XInterp method);

struct CompletionConfig {
  XInterp x_method = XInterp::linear;
  bool pad_boundaries = true;  // off emulates trimming of partial edge groups
};

struct CompletionLog {
  struct ImputedX {
    IndexKey index;
    long long grain;
    double value;
    XInterp method;
  };
  std::vector<std::pair<IndexKey, long long>> inserted;
  std::vector<ImputedX> imputed_x;
  std::vector<IndexKey> padded_groups;   // incomplete first/last groups filled up
  std::vector<IndexKey> dropped_groups;  // incomplete first/last groups trimmed
};

struct CompletionResult {
  Frame frame;
  CompletionLog log;
};

// Fills every (index, grain) combination for grains 1..m (m = global max
// grain), copying y within groups and interpolating missing X over the
// global row order. Observed rows pass through untouched.
CompletionResult complete(const Frame& frame, const CompletionConfig& config = {});

}  // namespace tdisagg
