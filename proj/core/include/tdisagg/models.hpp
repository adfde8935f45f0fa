#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <vector>

#include "tdisagg/conversion.hpp"
#include "tdisagg/rho.hpp"

namespace tdisagg {

enum class MethodId {
  ols,
  denton,
  denton_cholette,
  chow_lin,
  chow_lin_opt,
  chow_lin_ecotrim,
  chow_lin_quilis,
  litterman,
  litterman_opt,
  fernandez,
  fast,
  uniform,
  ensemble,  // result tag only, not a fittable method
};

MethodId parse_method(std::string_view name);
std::string_view method_name(MethodId method);
// true when the method estimates beta by (G)LS on the aggregated indicator
bool method_uses_regression(MethodId method);
const std::vector<MethodId>& fittable_methods();

struct FitOptions {
  bool intercept = true;  // regression families only
  double rho = 0.5;       // fixed-rho chow-lin / litterman
  int denton_h = 1;       // difference order, 1..3
  std::optional<Eigen::VectorXd> cholette_weights;
  std::optional<RhoObjective> rho_objective;  // default: maxlog (chow-lin-opt), minrss (litterman-opt)
  RhoBounds rho_bounds;
};

struct FitResult {
  Eigen::VectorXd y_hat;
  std::optional<Eigen::VectorXd> beta;           // [slope, intercept?]
  std::optional<double> rho;
  std::optional<Eigen::VectorXd> residuals_low;  // u = y_l - X_l beta
  std::optional<Eigen::MatrixXd> Q;
  std::optional<Eigen::MatrixXd> V;
  std::optional<Eigen::MatrixXd> vcov;
  std::optional<RhoResult> rho_details;          // populated by the -opt variants
  MethodId method = MethodId::uniform;
  bool aggregation_consistent = false;
  bool intercept_used = false;
};

// Every method shares this signature; X is ignored by denton and uniform.
FitResult fit(MethodId method, const Eigen::VectorXd& y_low, const Eigen::VectorXd& x,
              const ConversionMatrix& cm, const FitOptions& options = {});

// max |C y_hat - y_l| <= 1e-6 (1 + max |y_l|)
bool aggregation_consistent(const ConversionMatrix& cm, const Eigen::VectorXd& y_hat,
                            const Eigen::VectorXd& y_low);

}  // namespace tdisagg
