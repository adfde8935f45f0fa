#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "tdisagg/error.hpp"

namespace tdisagg {

enum class RetroKind { proportion, linear, polynomial, exp_smoothing, mlp, automatic };

struct RetroMethod {
  RetroKind kind = RetroKind::automatic;
  int degree = 2;       // polynomial order, 2 or 3
  double alpha = 0.5;   // exponential smoothing weight, (0, 1]
  struct MlpConfig {
    int hidden = 8;     // tanh units in the single hidden layer
    int epochs = 2000;
    double learning_rate = 0.01;
    unsigned seed = 42;
  };
  MlpConfig mlp;
};

// "poly2", "poly3", "expsmooth", etc.
RetroMethod parse_retro_method(std::string_view name);
std::string retro_method_name(const RetroMethod& method);

struct RetroResult {
  Eigen::VectorXd y_low_filled;
  std::vector<std::size_t> imputed_groups;
  RetroMethod method_used;
  double in_sample_rmse = 0.0;  // on the observed entries
};

// Fills missing low-frequency targets from the aggregated indicator.
// Observed entries pass through unchanged.
RetroResult retropolate(const std::vector<std::optional<double>>& y_low,
                        const Eigen::VectorXd& x_low, const RetroMethod& method = {});

// Deterministic selection: < 6 observed -> proportion; |corr| >= 0.8 ->
// linear; >= 12 observed -> polynomial(2); otherwise exp-smoothing(0.5).
RetroMethod auto_select(const std::vector<std::optional<double>>& y_low,
                        const Eigen::VectorXd& x_low);

}  // namespace tdisagg
