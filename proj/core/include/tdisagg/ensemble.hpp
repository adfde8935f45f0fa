#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tdisagg/frame.hpp"
#include "tdisagg/models.hpp"

namespace tdisagg {

struct MemberScore {
  double mae = 0.0;
  double rmse = 0.0;
};

// Convex combination of member fits. Weights are solved against each
// member's aggregated regression fit (C X beta) when the member estimates
// beta, and against C y_hat otherwise: the distribution step makes every
// C y_hat equal y_l, which would leave the weights undetermined. Scores,
// the objective, and weight selection all use those member columns; the
// combined prediction mixes the members' final y_hat.
struct EnsembleResult {
  std::vector<MethodId> member_ids;
  std::vector<FitResult> member_fits;
  Eigen::VectorXd weights;       // on the probability simplex
  Eigen::VectorXd y_hat;         // sum_i w_i y_hat_i
  std::vector<MemberScore> scores;  // member column vs y_l
  double objective = 0.0;        // || A w - y_l ||^2 over the member columns
  Eigen::MatrixXd columns;       // A, one column per member
  Eigen::VectorXd y_low;
  Eigen::VectorXd combined_low;  // C y_hat
  std::vector<std::string> dropped;  // members that failed, with reasons
};

// argmin ||A w - b||^2 over { w >= 0, sum w = 1 }, solved by active-set
// NNLS on the augmented system [A; lambda 1'] w = [b; lambda] with
// lambda = 1e6 (1 + max|b|), then exact renormalisation.
Eigen::VectorXd nnls_simplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

const std::vector<MethodId>& default_ensemble_methods();

EnsembleResult run_ensemble(const Frame& frame, AggregationRule rule,
                            const std::vector<MethodId>& methods,
                            const FitOptions& options = {});

// Wraps the combined prediction as a FitResult (method = ensemble).
FitResult to_model(const EnsembleResult& er);

}  // namespace tdisagg
