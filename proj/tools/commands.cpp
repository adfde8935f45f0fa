#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tdisagg/ensemble.hpp"
#include "tdisagg/postestimation.hpp"
#include "tdisagg/synthetic.hpp"

namespace tdcli {

using namespace tdisagg;

namespace {

LogLevel current_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("TDISAGG_LOG");
    if (!env) return LogLevel::warn;
    const std::string v(env);
    if (v == "error") return LogLevel::error;
    if (v == "warn") return LogLevel::warn;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write '" + path + "'");
  out << content;
}

std::string fixed(double v, int digits = 4) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, v);
  return buffer;
}

ParsedCsv load_input(const std::string& path) {
  ParsedCsv parsed = parse_csv(read_file(path));
  for (const Finding& w : parsed.warnings) log(LogLevel::info, w.code + ": " + w.message);
  return parsed;
}

int report_findings(const ValidationReport& report) {
  for (const Finding& e : report.errors)
    std::cerr << "error: " << e.code << ": " << e.message
              << (e.where.empty() ? "" : " (" + e.where + ")") << "\n";
  for (const Finding& w : report.warnings)
    std::cerr << "warning: " << w.code << ": " << w.message
              << (w.where.empty() ? "" : " (" + w.where + ")") << "\n";
  return report.ok() ? 0 : 1;
}

struct Prepared {
  Frame frame;
  ConversionMatrix cm;
  Eigen::VectorXd y_low;
  Eigen::VectorXd x;
  std::vector<std::size_t> retropolated;
};

// validate -> complete -> retropolate-if-needed -> build C
Prepared prepare(const ParsedCsv& parsed, const CommonOptions& common, const FitFlags& flags) {
  ValidationReport report = validate(parsed.frame);
  if (!report.ok()) {
    report_findings(report);
    raise(ErrorCode::InvalidArgument, "input failed validation");
  }

  CompletionConfig cc;
  cc.x_method = parse_x_interp(flags.x_interp);
  cc.pad_boundaries = !flags.no_pad;
  CompletionResult completed = complete(parsed.frame, cc);
  if (!completed.log.padded_groups.empty()) {
    std::string names;
    for (const IndexKey& k : completed.log.padded_groups) names += " " + k.text();
    log(LogLevel::warn, "padded incomplete boundary group(s):" + names);
  }
  if (!completed.log.dropped_groups.empty()) {
    std::string names;
    for (const IndexKey& k : completed.log.dropped_groups) names += " " + k.text();
    log(LogLevel::warn, "trimmed incomplete boundary group(s):" + names);
  }
  if (!completed.log.inserted.empty())
    log(LogLevel::info,
        "inserted " + std::to_string(completed.log.inserted.size()) + " missing sub-period row(s)");

  Prepared p{std::move(completed.frame), ConversionMatrix(), Eigen::VectorXd(), Eigen::VectorXd(), {}};
  p.cm = build_C(p.frame, parse_rule(common.conversion));

  const auto x_rows = p.frame.indicator();
  p.x.resize(static_cast<Eigen::Index>(x_rows.size()));
  for (std::size_t i = 0; i < x_rows.size(); ++i) p.x[static_cast<Eigen::Index>(i)] = *x_rows[i];

  auto targets = p.frame.group_targets();
  bool any_missing = false;
  for (const auto& t : targets)
    if (!t) any_missing = true;
  if (any_missing) {
    Eigen::VectorXd x_low = p.cm.aggregate(p.x);
    if (!flags.aux_column.empty()) {
      const NamedColumn* aux = parsed.find_extra(flags.aux_column);
      if (!aux) raise(ErrorCode::MissingColumn, "no column named '" + flags.aux_column + "'");
      // aux values travel with the original rows; completion may have added
      // rows, so map by (index, grain)
      Eigen::VectorXd aux_high = p.x;
      for (std::size_t i = 0; i < p.frame.n(); ++i) {
        const Row& row = p.frame.rows()[i];
        for (std::size_t j = 0; j < parsed.frame.n(); ++j) {
          if (parsed.frame.rows()[j].index == row.index &&
              parsed.frame.rows()[j].grain == row.grain) {
            if (aux->values[j]) aux_high[static_cast<Eigen::Index>(i)] = *aux->values[j];
            break;
          }
        }
      }
      x_low = p.cm.aggregate(aux_high);
    }
    RetroMethod method = parse_retro_method(flags.retro_method);
    method.mlp.seed = common.seed;
    RetroResult rr = retropolate(targets, x_low, method);
    p.retropolated = rr.imputed_groups;
    std::string names;
    for (std::size_t g : rr.imputed_groups) names += " " + p.frame.groups()[g].index.text();
    log(LogLevel::warn, "retropolated missing y for group(s) [" +
                            retro_method_name(rr.method_used) + "]:" + names);
    std::vector<std::optional<double>> filled(targets.size());
    for (std::size_t g = 0; g < targets.size(); ++g)
      filled[g] = rr.y_low_filled[static_cast<Eigen::Index>(g)];
    p.frame = p.frame.with_group_targets(filled);
    targets = p.frame.group_targets();
  }

  p.y_low.resize(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t g = 0; g < targets.size(); ++g)
    p.y_low[static_cast<Eigen::Index>(g)] = *targets[g];
  return p;
}

FitOptions make_fit_options(const CommonOptions&, const FitFlags& flags) {
  FitOptions o;
  o.intercept = !flags.no_intercept;
  if (flags.rho) o.rho = *flags.rho;
  o.denton_h = flags.denton_h;
  if (!flags.rho_method.empty()) o.rho_objective = parse_rho_objective(flags.rho_method);
  if (!flags.rho_bounds.empty()) {
    const auto comma = flags.rho_bounds.find(',');
    if (comma == std::string::npos)
      raise(ErrorCode::InvalidArgument, "--rho-bounds expects lo,hi");
    o.rho_bounds.lo = std::stod(flags.rho_bounds.substr(0, comma));
    o.rho_bounds.hi = std::stod(flags.rho_bounds.substr(comma + 1));
  }
  return o;
}

void print_inference_table(const Eigen::VectorXd& beta, const Inference& infer,
                           bool intercept) {
  std::printf("%-12s %12s %12s %9s %9s %-6s\n", "coefficient", "estimate", "std.err", "t",
              "p", "signif");
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const char* name = (i == 0) ? "beta" : "intercept";
    if (!intercept && i > 0) name = "?";
    std::printf("%-12s %12s %12s %9s %9s %-6s\n", name, fixed(beta[i]).c_str(),
                fixed(infer.se[i]).c_str(), fixed(infer.t_stats[i], 3).c_str(),
                fixed(infer.p_values[i], 4).c_str(),
                infer.stars[static_cast<std::size_t>(i)].c_str());
  }
  std::printf("signif: *** p<0.01, ** p<0.05, * p<0.1\n");
}

void print_fit_summary(const FitResult& r, const Prepared& p, const CommonOptions& common) {
  std::printf("method: %s   conversion: %s   n_low=%zu m=%lld n=%zu\n",
              std::string(method_name(r.method)).c_str(), common.conversion.c_str(),
              p.cm.n_low(), p.frame.max_grain(), p.cm.n_high());
  if (r.rho) {
    if (r.rho_details) {
      std::printf("rho_hat: %s   (objective: %s)\n", fixed(*r.rho, 6).c_str(),
                  fixed(r.rho_details->objective_at_opt, 6).c_str());
    } else {
      std::printf("rho: %s\n", fixed(*r.rho, 6).c_str());
    }
  }
  if (r.beta && r.vcov) {
    const int dof = static_cast<int>(p.cm.n_low()) - static_cast<int>(r.beta->size());
    bool positive = true;
    for (Eigen::Index i = 0; i < r.vcov->rows(); ++i)
      if (!((*r.vcov)(i, i) > 0.0)) positive = false;
    if (dof >= 1 && positive)
      print_inference_table(*r.beta, inference(*r.beta, *r.vcov, dof), r.intercept_used);
  }
  const double err = (p.cm.aggregate(r.y_hat) - p.y_low).lpNorm<Eigen::Infinity>();
  std::printf("aggregation check: max |C*y_hat - y_l| = %.3e  (%s)\n", err,
              r.aggregation_consistent ? "consistent" : "not consistent");
}

std::vector<MethodId> parse_method_list(const std::string& methods_csv) {
  if (methods_csv.empty()) return default_ensemble_methods();
  std::vector<MethodId> out;
  std::stringstream ss(methods_csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(parse_method(token));
  }
  if (out.empty()) raise(ErrorCode::InvalidArgument, "empty method list");
  return out;
}

int exit_code_for(const Error& e) { return is_input_error(e.code()) ? 1 : 2; }

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

void log(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) <= static_cast<int>(current_level())) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << message << "\n";
  }
}

int cmd_validate(const CommonOptions& common) {
  return guarded([&] {
    ParsedCsv parsed = load_input(common.input);
    ValidationReport report = validate(parsed.frame);
    const int rc = report_findings(report);
    std::printf("%zu row(s), %zu group(s), m=%lld: %s\n", parsed.frame.n(),
                parsed.frame.groups().size(), parsed.frame.max_grain(),
                report.ok() ? "OK" : "INVALID");
    return rc;
  });
}

int cmd_fit(const CommonOptions& common, const FitFlags& flags) {
  return guarded([&] {
    ParsedCsv parsed = load_input(common.input);
    Prepared p = prepare(parsed, common, flags);
    FitOptions options = make_fit_options(common, flags);
    FitResult r = fit(parse_method(flags.method), p.y_low, p.x, p.cm, options);
    print_fit_summary(r, p, common);

    std::vector<NamedColumn> extras;
    NamedColumn y_hat{"y_hat", {}};
    for (Eigen::Index i = 0; i < r.y_hat.size(); ++i) y_hat.values.push_back(r.y_hat[i]);
    extras.push_back(std::move(y_hat));
    if (flags.adjust) {
      AdjustResult adjusted = adjust(r.y_hat, p.y_low, p.cm);
      NamedColumn col{"y_hat_adjusted", {}};
      for (Eigen::Index i = 0; i < adjusted.y_adjusted.size(); ++i)
        col.values.push_back(adjusted.y_adjusted[i]);
      extras.push_back(std::move(col));
      std::printf("adjusted %zu group(s) with negative values\n",
                  adjusted.report.touched());
    }
    if (!common.output.empty()) {
      write_file(common.output, write_csv(p.frame, extras));
      std::printf("wrote: %s\n", common.output.c_str());
    }
    return 0;
  });
}

int cmd_ensemble(const CommonOptions& common, const FitFlags& flags,
                 const std::string& methods_csv) {
  return guarded([&] {
    ParsedCsv parsed = load_input(common.input);
    Prepared p = prepare(parsed, common, flags);
    FitOptions options = make_fit_options(common, flags);
    EnsembleResult er =
        run_ensemble(p.frame, parse_rule(common.conversion), parse_method_list(methods_csv),
                     options);
    for (const std::string& reason : er.dropped)
      log(LogLevel::warn, "dropped member " + reason);

    if (common.format == OutputFormat::csv) {
      std::printf("method,weight,mae,rmse\n");
      for (std::size_t j = 0; j < er.member_ids.size(); ++j)
        std::printf("%s,%s,%s,%s\n",
                    std::string(method_name(er.member_ids[j])).c_str(),
                    format_number(er.weights[static_cast<Eigen::Index>(j)]).c_str(),
                    format_number(er.scores[j].mae).c_str(),
                    format_number(er.scores[j].rmse).c_str());
    } else {
      std::printf("%-18s %10s %12s %12s\n", "method", "weight", "mae", "rmse");
      for (std::size_t j = 0; j < er.member_ids.size(); ++j)
        std::printf("%-18s %10s %12s %12s\n",
                    std::string(method_name(er.member_ids[j])).c_str(),
                    fixed(er.weights[static_cast<Eigen::Index>(j)]).c_str(),
                    fixed(er.scores[j].mae).c_str(), fixed(er.scores[j].rmse).c_str());
      std::printf("objective ||A w - y_l||^2 = %.6e\n", er.objective);
    }

    if (!common.output.empty()) {
      NamedColumn y_hat{"y_hat", {}};
      for (Eigen::Index i = 0; i < er.y_hat.size(); ++i) y_hat.values.push_back(er.y_hat[i]);
      write_file(common.output, write_csv(p.frame, {y_hat}));
      std::printf("wrote: %s\n", common.output.c_str());
    }
    return 0;
  });
}

int cmd_adjust(const CommonOptions& common) {
  return guarded([&] {
    ParsedCsv parsed = load_input(common.input);
    const NamedColumn* y_hat_col = parsed.find_extra("y_hat");
    if (!y_hat_col) raise(ErrorCode::MissingColumn, "input needs a y_hat column");
    ValidationReport report = validate(parsed.frame);
    if (!report.ok()) {
      report_findings(report);
      raise(ErrorCode::InvalidArgument, "input failed validation");
    }
    ConversionMatrix cm = build_C(parsed.frame, parse_rule(common.conversion));
    Eigen::VectorXd y_hat(static_cast<Eigen::Index>(parsed.frame.n()));
    for (std::size_t i = 0; i < parsed.frame.n(); ++i) {
      if (!y_hat_col->values[i])
        raise(ErrorCode::MissingColumn, "y_hat has missing values");
      y_hat[static_cast<Eigen::Index>(i)] = *y_hat_col->values[i];
    }
    auto targets = parsed.frame.group_targets();
    Eigen::VectorXd y_low(static_cast<Eigen::Index>(targets.size()));
    for (std::size_t g = 0; g < targets.size(); ++g) {
      if (!targets[g])
        raise(ErrorCode::InvalidArgument,
              "group " + parsed.frame.groups()[g].index.text() + " has no y");
      y_low[static_cast<Eigen::Index>(g)] = *targets[g];
    }

    AdjustResult r = adjust(y_hat, y_low, cm);
    std::printf("%-10s %-14s %-9s %s\n", "group", "strategy", "resolved", "before -> after");
    for (const GroupAdjustment& g : r.report.groups) {
      std::string before, after;
      for (Eigen::Index i = 0; i < g.before.size(); ++i) {
        before += (i ? " " : "") + fixed(g.before[i], 2);
        after += (i ? " " : "") + fixed(g.after[i], 2);
      }
      std::printf("%-10s %-14s %-9s [%s] -> [%s]\n",
                  parsed.frame.groups()[g.group].index.text().c_str(),
                  std::string(adjust_strategy_name(g.strategy)).c_str(),
                  g.resolved ? "yes" : "NO", before.c_str(), after.c_str());
    }
    std::printf("%zu group(s) adjusted\n", r.report.touched());

    if (!common.output.empty()) {
      std::vector<NamedColumn> extras;
      extras.push_back(*y_hat_col);
      NamedColumn col{"y_hat_adjusted", {}};
      for (Eigen::Index i = 0; i < r.y_adjusted.size(); ++i)
        col.values.push_back(r.y_adjusted[i]);
      extras.push_back(std::move(col));
      write_file(common.output, write_csv(parsed.frame, extras));
      std::printf("wrote: %s\n", common.output.c_str());
    }
    return 0;
  });
}

int cmd_retropolate(const CommonOptions& common, const FitFlags& flags) {
  return guarded([&] {
    ParsedCsv parsed = load_input(common.input);
    FitFlags f = flags;
    Prepared p = prepare(parsed, common, f);
    if (p.retropolated.empty())
      std::printf("no missing y: nothing to retropolate\n");
    else
      std::printf("retropolated %zu group(s)\n", p.retropolated.size());
    if (!common.output.empty()) {
      write_file(common.output, write_csv(p.frame));
      std::printf("wrote: %s\n", common.output.c_str());
    }
    return 0;
  });
}

int cmd_compare(const CommonOptions& common, const FitFlags& flags,
                const std::string& methods_csv) {
  return guarded([&] {
    ParsedCsv parsed = load_input(common.input);
    Prepared p = prepare(parsed, common, flags);
    FitOptions options = make_fit_options(common, flags);

    // optional high-frequency truth, mapped through the completed row order
    const NamedColumn* truth = parsed.find_extra("y_true");
    Eigen::VectorXd y_true;
    bool have_truth = false;
    if (truth && parsed.frame.n() == p.frame.n()) {
      y_true.resize(static_cast<Eigen::Index>(p.frame.n()));
      have_truth = true;
      for (std::size_t i = 0; i < p.frame.n() && have_truth; ++i) {
        if (truth->values[i])
          y_true[static_cast<Eigen::Index>(i)] = *truth->values[i];
        else
          have_truth = false;
      }
    }

    struct Line {
      std::string name;
      double mae, rmse, mse;
    };
    std::vector<Line> lines;
    for (MethodId id : parse_method_list(methods_csv)) {
      try {
        FitResult r = fit(id, p.y_low, p.x, p.cm, options);
        const Eigen::VectorXd err = p.cm.aggregate(r.y_hat) - p.y_low;
        const double mse = err.squaredNorm() / static_cast<double>(err.size());
        lines.push_back(Line{std::string(method_name(id)), err.cwiseAbs().mean(),
                             std::sqrt(mse), mse});
        if (have_truth) {
          const Eigen::VectorXd hf = r.y_hat - y_true;
          const double mse_hf = hf.squaredNorm() / static_cast<double>(hf.size());
          lines.push_back(Line{std::string(method_name(id)) + ":hf", hf.cwiseAbs().mean(),
                               std::sqrt(mse_hf), mse_hf});
        }
      } catch (const Error& e) {
        log(LogLevel::warn, std::string(method_name(id)) + " failed: " + e.what());
      }
    }
    if (lines.empty()) raise(ErrorCode::AllMembersFailed, "every method failed");

    if (common.format == OutputFormat::csv) {
      std::printf("method,mae,rmse,mse\n");
      for (const Line& l : lines)
        std::printf("%s,%s,%s,%s\n", l.name.c_str(), format_number(l.mae).c_str(),
                    format_number(l.rmse).c_str(), format_number(l.mse).c_str());
    } else {
      std::printf("%-22s %14s %14s %16s\n", "method", "mae", "rmse", "mse");
      for (const Line& l : lines)
        std::printf("%-22s %14s %14s %16s\n", l.name.c_str(), fixed(l.mae, 6).c_str(),
                    fixed(l.rmse, 6).c_str(), fixed(l.mse, 6).c_str());
    }
    return 0;
  });
}

int cmd_plot(const CommonOptions& common) {
  return guarded([&] {
    ParsedCsv parsed = load_input(common.input);
    const NamedColumn* y_hat_col = parsed.find_extra("y_hat");
    if (!y_hat_col) raise(ErrorCode::MissingColumn, "input needs a y_hat column");
    if (parsed.frame.n() == 0) raise(ErrorCode::EmptyInput, "no rows to plot");

    PlotSeries series;
    for (std::size_t i = 0; i < parsed.frame.n(); ++i) {
      series.y_rows.push_back(parsed.frame.rows()[i].y);
      if (!y_hat_col->values[i])
        raise(ErrorCode::MissingColumn, "y_hat has missing values");
      series.y_hat.push_back(*y_hat_col->values[i]);
    }
    for (const Group& g : parsed.frame.groups()) series.group_start.push_back(g.start);

    const std::string svg = render_svg(series);
    if (common.output.empty())
      std::fwrite(svg.data(), 1, svg.size(), stdout);
    else {
      write_file(common.output, svg);
      std::printf("wrote: %s\n", common.output.c_str());
    }
    return 0;
  });
}

int cmd_synth(const CommonOptions& common, const SynthFlags& flags) {
  return guarded([&] {
    SynthConfig cfg;
    cfg.n_low = flags.n_low;
    cfg.m = flags.m;
    cfg.rho = flags.rho;
    cfg.beta = flags.beta;
    cfg.intercept = flags.intercept;
    cfg.noise_sd = flags.noise_sd;
    cfg.seed = common.seed;
    cfg.rule = parse_rule(common.conversion);
    SynthData data = make_synthetic(cfg);

    std::vector<NamedColumn> extras;
    if (flags.emit_true) {
      NamedColumn col{"y_true", {}};
      for (Eigen::Index i = 0; i < data.y_true.size(); ++i)
        col.values.push_back(data.y_true[i]);
      extras.push_back(std::move(col));
    }
    const std::string csv = write_csv(data.frame, extras);
    if (common.output.empty())
      std::fwrite(csv.data(), 1, csv.size(), stdout);
    else {
      write_file(common.output, csv);
      std::printf("wrote: %s\n", common.output.c_str());
    }
    return 0;
  });
}

}  // namespace tdcli
