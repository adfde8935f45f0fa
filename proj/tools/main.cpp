#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tdisagg: temporal disaggregation of time series"};
  app.require_subcommand(1);

  tdcli::CommonOptions common;
  tdcli::FitFlags flags;
  tdcli::SynthFlags synth_flags;
  std::string methods_csv;
  std::string format = "table";

  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    auto* in = cmd->add_option("-i,--input", common.input, "input CSV (index,grain,y,X)");
    if (needs_input) in->required();
    cmd->add_option("-o,--output", common.output, "output path");
    cmd->add_option("--conversion", common.conversion, "aggregation rule")
        ->check(CLI::IsMember({"sum", "average", "first", "last"}))
        ->capture_default_str();
    cmd->add_option("--seed", common.seed, "seed for anything random")->capture_default_str();
    cmd->add_option("--format", format, "summary format")
        ->check(CLI::IsMember({"table", "csv"}))
        ->capture_default_str();
  };
  auto add_fit_flags = [&](CLI::App* cmd) {
    cmd->add_option("--method", flags.method, "disaggregation method")
        ->check(CLI::IsMember({"ols", "denton", "denton-cholette", "chow-lin", "chow-lin-opt",
                               "chow-lin-ecotrim", "chow-lin-quilis", "litterman",
                               "litterman-opt", "fernandez", "fast", "uniform"}))
        ->capture_default_str();
    cmd->add_option("--rho", flags.rho, "fixed rho for chow-lin / litterman (default 0.5)");
    cmd->add_option("--denton-h", flags.denton_h, "denton difference order (1-3)")
        ->capture_default_str();
    cmd->add_flag("--no-intercept", flags.no_intercept, "drop the regression intercept");
    cmd->add_option("--rho-method", flags.rho_method, "rho objective for -opt methods")
        ->check(CLI::IsMember({"maxlog", "minrss"}));
    cmd->add_option("--rho-bounds", flags.rho_bounds, "rho search interval lo,hi");
    cmd->add_option("--x-interp", flags.x_interp, "interpolation for missing X")
        ->check(CLI::IsMember({"linear", "nearest"}))
        ->capture_default_str();
    cmd->add_flag("--no-pad", flags.no_pad, "trim incomplete boundary groups instead of padding");
    cmd->add_option("--retro-method", flags.retro_method,
                    "imputation for missing y (proportion|linear|poly2|poly3|expsmooth|mlp|auto)")
        ->capture_default_str();
    cmd->add_option("--aux", flags.aux_column, "auxiliary predictor column for retropolation");
  };

  CLI::App* validate = app.add_subcommand("validate", "check an input file");
  add_common(validate, true);

  CLI::App* fit = app.add_subcommand("fit", "run the full disaggregation pipeline");
  add_common(fit, true);
  add_fit_flags(fit);
  fit->add_flag("--adjust", flags.adjust, "append a non-negativity-adjusted column");

  CLI::App* ensemble = app.add_subcommand("ensemble", "combine methods by constrained NNLS");
  add_common(ensemble, true);
  add_fit_flags(ensemble);
  ensemble->add_option("--methods", methods_csv, "comma-separated member methods");

  CLI::App* adjust = app.add_subcommand("adjust", "correct negative predictions");
  add_common(adjust, true);

  CLI::App* retropolate = app.add_subcommand("retropolate", "impute missing low-frequency y");
  add_common(retropolate, true);
  add_fit_flags(retropolate);

  CLI::App* compare = app.add_subcommand("compare", "error metrics per method");
  add_common(compare, true);
  add_fit_flags(compare);
  compare->add_option("--methods", methods_csv, "comma-separated methods");

  CLI::App* plot = app.add_subcommand("plot", "render predictions as a standalone SVG");
  add_common(plot, true);

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic AR(1) fixture");
  add_common(synth, false);
  synth->add_option("--n-low", synth_flags.n_low, "number of low-frequency groups")
      ->capture_default_str();
  synth->add_option("--m", synth_flags.m, "sub-periods per group")->capture_default_str();
  synth->add_option("--rho", synth_flags.rho, "AR(1) coefficient of the noise")
      ->capture_default_str();
  synth->add_option("--beta", synth_flags.beta, "slope on the indicator")->capture_default_str();
  synth->add_option("--intercept", synth_flags.intercept, "level shift")->capture_default_str();
  synth->add_option("--noise-sd", synth_flags.noise_sd, "noise innovation scale")
      ->capture_default_str();
  synth->add_flag("!--no-true", synth_flags.emit_true, "omit the y_true column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  common.format = (format == "csv") ? tdcli::OutputFormat::csv : tdcli::OutputFormat::table;

  if (app.got_subcommand(validate)) return tdcli::cmd_validate(common);
  if (app.got_subcommand(fit)) return tdcli::cmd_fit(common, flags);
  if (app.got_subcommand(ensemble)) return tdcli::cmd_ensemble(common, flags, methods_csv);
  if (app.got_subcommand(adjust)) return tdcli::cmd_adjust(common);
  if (app.got_subcommand(retropolate)) return tdcli::cmd_retropolate(common, flags);
  if (app.got_subcommand(compare)) return tdcli::cmd_compare(common, flags, methods_csv);
  if (app.got_subcommand(plot)) return tdcli::cmd_plot(common);
  if (app.got_subcommand(synth)) return tdcli::cmd_synth(common, synth_flags);
  return 1;
}
