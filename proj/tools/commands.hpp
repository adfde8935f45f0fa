#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdisagg/completer.hpp"
#include "tdisagg/conversion.hpp"
#include "tdisagg/models.hpp"
#include "tdisagg/retropolarizer.hpp"

namespace tdcli {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// level comes from TDISAGG_LOG; messages go to stderr
void log(LogLevel level, const std::string& message);

enum class OutputFormat { table, csv };

struct CommonOptions {
  std::string input;
  std::string output;
  std::string conversion = "sum";
  unsigned seed = 42;
  OutputFormat format = OutputFormat::table;
};

struct FitFlags {
  std::string method = "chow-lin-opt";
  std::optional<double> rho;
  int denton_h = 1;
  bool no_intercept = false;
  std::string rho_method;  // empty = per-method default
  std::string rho_bounds;  // "lo,hi"
  std::string x_interp = "linear";
  bool no_pad = false;
  bool adjust = false;
  std::string retro_method = "auto";
  std::string aux_column;
};

struct SynthFlags {
  std::size_t n_low = 20;
  std::size_t m = 4;
  double rho = 0.5;
  double beta = 2.0;
  double intercept = 0.0;
  double noise_sd = 1.0;
  bool emit_true = true;
};

int cmd_validate(const CommonOptions& common);
int cmd_fit(const CommonOptions& common, const FitFlags& flags);
int cmd_ensemble(const CommonOptions& common, const FitFlags& flags,
                 const std::string& methods_csv);
int cmd_adjust(const CommonOptions& common);
int cmd_retropolate(const CommonOptions& common, const FitFlags& flags);
int cmd_compare(const CommonOptions& common, const FitFlags& flags,
                const std::string& methods_csv);
int cmd_plot(const CommonOptions& common);
int cmd_synth(const CommonOptions& common, const SynthFlags& flags);

struct PlotSeries {
  std::vector<std::optional<double>> y_rows;  // target per row, stepped within groups
  std::vector<std::size_t> group_start;       // first row of each group
  std::vector<double> y_hat;
};

// deterministic standalone SVG: stepped target plus prediction path
std::string render_svg(const PlotSeries& series);

}  // namespace tdcli
