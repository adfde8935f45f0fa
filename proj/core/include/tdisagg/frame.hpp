#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdisagg/error.hpp"

namespace tdisagg {

// Low-frequency group key. Keys that look like integers order numerically,
// anything else falls back to lexicographic order; equal numbers with
// different spellings ("01" vs "1") stay distinct keys.
class IndexKey {
 public:
  IndexKey() = default;
  explicit IndexKey(std::string text);
  static IndexKey of(long long value);

  const std::string& text() const { return text_; }
  bool is_numeric() const { return numeric_.has_value(); }

  friend bool operator==(const IndexKey& a, const IndexKey& b) {
    return a.text_ == b.text_;
  }
  friend std::strong_ordering operator<=>(const IndexKey& a, const IndexKey& b) {
    if (a.numeric_ && b.numeric_ && *a.numeric_ != *b.numeric_)
      return *a.numeric_ <=> *b.numeric_;
    if (a.numeric_.has_value() != b.numeric_.has_value())
      return a.numeric_.has_value() ? std::strong_ordering::less
                                    : std::strong_ordering::greater;
    return a.text_ <=> b.text_;
  }

 private:
  std::string text_;
  std::optional<long long> numeric_;
};

// One high-frequency observation.
struct Row {
  IndexKey index;
  long long grain = 1;      // sub-period within the group, expected >= 1
  std::optional<double> y;  // low-frequency target, repeated within a group
  std::optional<double> x;  // high-frequency indicator
};

struct Group {
  IndexKey index;
  std::size_t start = 0;    // offset of the group's first row
  std::size_t size = 0;     // m_g, number of sub-periods present
  std::optional<double> y;  // the group's target (first non-missing y)
};

struct Finding {
  std::string code;
  std::string message;
  std::string where;
};

struct ValidationReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;
  bool ok() const { return errors.empty(); }
};

// Long-format (index, grain, y, X) table, sorted by key and immutable after
// construction. Every stage of the pipeline consumes and produces Frames.
class Frame {
 public:
  Frame() = default;
  // Sorts rows by (index, grain); duplicate keys are rejected.
  explicit Frame(std::vector<Row> rows);

  std::size_t n() const { return rows_.size(); }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<Group>& groups() const { return groups_; }
  // Global m: the largest grain observed anywhere (0 on an empty frame).
  long long max_grain() const { return max_grain_; }

  // y_l: one target per group, missing when the whole group lacks y.
  std::vector<std::optional<double>> group_targets() const;
  // X in row order.
  std::vector<std::optional<double>> indicator() const;

  // A copy with each group's y replaced (length must equal groups().size()).
  Frame with_group_targets(const std::vector<std::optional<double>>& y_low) const;

 private:
  void rebuild_groups();

  std::vector<Row> rows_;
  std::vector<Group> groups_;
  long long max_grain_ = 0;
};

struct NamedColumn {
  std::string name;
  std::vector<std::optional<double>> values;
};

struct ParsedCsv {
  Frame frame;
  std::vector<NamedColumn> extras;  // columns beyond the required four
  std::vector<Finding> warnings;

  const NamedColumn* find_extra(std::string_view name) const;
};

// Header must start with index,grain,y,X (case-insensitive); trailing extra
// columns are carried through. Empty fields are missing values; missing
// index or grain is an error.
ParsedCsv parse_csv(std::string_view text);

ValidationReport validate(const Frame& frame);

// Emits the four input columns plus any extras, in row order, LF-terminated.
// Missing values become empty fields. Round-trips through parse_csv.
std::string write_csv(const Frame& frame, const std::vector<NamedColumn>& extras = {});

// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

}  // namespace tdisagg
