#include "tdisagg/frame.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace tdisagg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::optional<long long> parse_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

std::string locate(const IndexKey& index, long long grain) {
  return "index=" + index.text() + " grain=" + std::to_string(grain);
}

}  // namespace

IndexKey::IndexKey(std::string text) : text_(std::move(text)) {
  numeric_ = parse_integer(text_);
}

IndexKey IndexKey::of(long long value) { return IndexKey(std::to_string(value)); }

Frame::Frame(std::vector<Row> rows) : rows_(std::move(rows)) {
  std::stable_sort(rows_.begin(), rows_.end(), [](const Row& a, const Row& b) {
    if (a.index != b.index) return a.index < b.index;
    return a.grain < b.grain;
  });
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    if (rows_[i].index == rows_[i - 1].index && rows_[i].grain == rows_[i - 1].grain)
      raise(ErrorCode::DuplicateKey,
            "duplicate key " + locate(rows_[i].index, rows_[i].grain));
  }
  rebuild_groups();
}

void Frame::rebuild_groups() {
  groups_.clear();
  max_grain_ = 0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    max_grain_ = std::max(max_grain_, rows_[i].grain);
    if (groups_.empty() || !(groups_.back().index == rows_[i].index)) {
      groups_.push_back(Group{rows_[i].index, i, 0, std::nullopt});
    }
    Group& g = groups_.back();
    ++g.size;
    if (!g.y && rows_[i].y) g.y = rows_[i].y;
  }
}

std::vector<std::optional<double>> Frame::group_targets() const {
  std::vector<std::optional<double>> out;
  out.reserve(groups_.size());
  for (const Group& g : groups_) out.push_back(g.y);
  return out;
}

std::vector<std::optional<double>> Frame::indicator() const {
  std::vector<std::optional<double>> out;
  out.reserve(rows_.size());
  for (const Row& r : rows_) out.push_back(r.x);
  return out;
}

Frame Frame::with_group_targets(const std::vector<std::optional<double>>& y_low) const {
  if (y_low.size() != groups_.size())
    raise(ErrorCode::LengthMismatch, "expected one target per group");
  std::vector<Row> rows = rows_;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (std::size_t i = groups_[g].start; i < groups_[g].start + groups_[g].size; ++i)
      rows[i].y = y_low[g];
  }
  return Frame(std::move(rows));
}

const NamedColumn* ParsedCsv::find_extra(std::string_view name) const {
  for (const NamedColumn& c : extras)
    if (c.name == name) return &c;
  return nullptr;
}

ParsedCsv parse_csv(std::string_view text) {
  ParsedCsv out;

  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::string_view line = text.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      start = i + 1;
    }
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();

  if (lines.empty()) raise(ErrorCode::MalformedHeader, "empty input, expected header index,grain,y,X");

  auto header = split_fields(lines[0]);
  static const char* required[4] = {"index", "grain", "y", "x"};
  if (header.size() < 4) raise(ErrorCode::MalformedHeader, "expected header index,grain,y,X");
  for (int c = 0; c < 4; ++c) {
    if (lower(trim(header[c])) != required[c])
      raise(ErrorCode::MalformedHeader,
            "expected column '" + std::string(required[c]) + "' at position " +
                std::to_string(c + 1) + ", found '" + std::string(trim(header[c])) + "'");
  }
  std::vector<NamedColumn> extras;
  for (std::size_t c = 4; c < header.size(); ++c)
    extras.push_back(NamedColumn{std::string(trim(header[c])), {}});

  std::vector<Row> rows;
  // extras are collected row-aligned, then permuted with the sort below
  std::vector<std::vector<std::optional<double>>> extra_cells(extras.size());

  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    auto fields = split_fields(lines[ln]);
    if (fields.size() != header.size())
      raise(ErrorCode::NonNumericField,
            "row " + std::to_string(ln + 1) + ": expected " + std::to_string(header.size()) +
                " fields, found " + std::to_string(fields.size()));
    std::string_view index_text = trim(fields[0]);
    std::string_view grain_text = trim(fields[1]);
    if (index_text.empty())
      raise(ErrorCode::NonNumericField, "row " + std::to_string(ln + 1) + ": missing index");
    auto grain = parse_integer(grain_text);
    if (!grain)
      raise(ErrorCode::NonNumericField,
            "row " + std::to_string(ln + 1) + ": grain '" + std::string(grain_text) +
                "' is not an integer");
    Row row;
    row.index = IndexKey(std::string(index_text));
    row.grain = *grain;
    std::string_view y_text = trim(fields[2]);
    if (!y_text.empty()) {
      row.y = parse_double(y_text);
      if (!row.y)
        raise(ErrorCode::NonNumericField,
              "row " + std::to_string(ln + 1) + ": y '" + std::string(y_text) + "' is not numeric");
    }
    std::string_view x_text = trim(fields[3]);
    if (!x_text.empty()) {
      row.x = parse_double(x_text);
      if (!row.x)
        raise(ErrorCode::NonNumericField,
              "row " + std::to_string(ln + 1) + ": X '" + std::string(x_text) + "' is not numeric");
    }
    for (std::size_t c = 0; c < extras.size(); ++c) {
      std::string_view cell = trim(fields[4 + c]);
      if (cell.empty()) {
        extra_cells[c].push_back(std::nullopt);
      } else {
        auto v = parse_double(cell);
        if (!v)
          raise(ErrorCode::NonNumericField,
                "row " + std::to_string(ln + 1) + ": " + extras[c].name + " '" +
                    std::string(cell) + "' is not numeric");
        extra_cells[c].push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }

  // sort rows and extras together
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].index != rows[b].index) return rows[a].index < rows[b].index;
    return rows[a].grain < rows[b].grain;
  });
  std::vector<Row> sorted;
  sorted.reserve(rows.size());
  for (std::size_t i : order) sorted.push_back(rows[i]);
  for (std::size_t c = 0; c < extras.size(); ++c) {
    extras[c].values.reserve(order.size());
    for (std::size_t i : order) extras[c].values.push_back(extra_cells[c][i]);
  }

  out.frame = Frame(std::move(sorted));
  out.extras = std::move(extras);
  if (out.frame.n() == 0)
    out.warnings.push_back(Finding{"EmptyFrame", "no data rows after header", ""});
  return out;
}

ValidationReport validate(const Frame& frame) {
  ValidationReport report;
  if (frame.n() == 0) {
    report.warnings.push_back(Finding{"EmptyFrame", "frame has no rows", ""});
    return report;
  }

  bool any_x = false;
  for (const Row& r : frame.rows()) {
    if (r.grain < 1)
      report.errors.push_back(Finding{"InvalidGrain", "grain must be >= 1",
                                      "index=" + r.index.text() + " grain=" + std::to_string(r.grain)});
    if (r.x) any_x = true;
  }
  if (!any_x)
    report.errors.push_back(Finding{"AllXMissing", "indicator X is missing everywhere", ""});

  const long long m = frame.max_grain();
  for (const Group& g : frame.groups()) {
    std::optional<double> seen;
    for (std::size_t i = g.start; i < g.start + g.size; ++i) {
      const Row& r = frame.rows()[i];
      if (!r.y) continue;
      if (seen && *seen != *r.y) {
        report.errors.push_back(Finding{"InconsistentGroupTarget",
                                        "y differs within group (" + format_number(*seen) +
                                            " vs " + format_number(*r.y) + ")",
                                        "index=" + g.index.text() + " grain=" + std::to_string(r.grain)});
        break;
      }
      if (!seen) seen = r.y;
    }
    if (!seen)
      report.warnings.push_back(Finding{"MissingGroupTarget", "group has no y value",
                                        "index=" + g.index.text()});
    // gaps against the global grain lattice 1..m
    std::size_t i = g.start;
    for (long long grain = 1; grain <= m; ++grain) {
      if (i < g.start + g.size && frame.rows()[i].grain == grain) {
        ++i;
      } else if (i >= g.start + g.size || frame.rows()[i].grain > grain) {
        report.warnings.push_back(Finding{"MissingSubPeriod", "missing (index, grain) combination",
                                          "index=" + g.index.text() + " grain=" + std::to_string(grain)});
      } else {
        ++i;
        --grain;  // grains below 1 already reported, realign
      }
    }
  }
  return report;
}

std::string format_number(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string write_csv(const Frame& frame, const std::vector<NamedColumn>& extras) {
  for (const NamedColumn& c : extras) {
    if (c.values.size() != frame.n())
      raise(ErrorCode::LengthMismatch,
            "column '" + c.name + "' has " + std::to_string(c.values.size()) +
                " values, frame has " + std::to_string(frame.n()) + " rows");
  }
  std::ostringstream out;
  out << "index,grain,y,X";
  for (const NamedColumn& c : extras) out << ',' << c.name;
  out << '\n';
  for (std::size_t i = 0; i < frame.n(); ++i) {
    const Row& r = frame.rows()[i];
    out << r.index.text() << ',' << r.grain << ',';
    if (r.y) out << format_number(*r.y);
    out << ',';
    if (r.x) out << format_number(*r.x);
    for (const NamedColumn& c : extras) {
      out << ',';
      if (c.values[i]) out << format_number(*c.values[i]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace tdisagg
