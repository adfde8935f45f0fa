#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <random>

#include "tdisagg/conversion.hpp"
#include "tdisagg/frame.hpp"

namespace tdisagg {

// mt19937 + Box-Muller. The engine's output sequence is pinned by the
// standard and std::normal_distribution is not, so seeded runs stay
// byte-reproducible across toolchains.
class NormalSampler {
 public:
  explicit NormalSampler(unsigned seed) : rng_(seed) {}
  double operator()();

 private:
  std::mt19937 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct SynthConfig {
  std::size_t n_low = 20;
  std::size_t m = 4;
  double rho = 0.5;        // AR(1) coefficient of the high-frequency noise
  double beta = 2.0;
  double intercept = 0.0;
  double noise_sd = 1.0;   // innovation scale of the noise process
  double x_phi = 0.7;      // AR(1) coefficient of the indicator around its level
  double x_level = 10.0;
  unsigned seed = 42;
  AggregationRule rule = AggregationRule::sum;
};

struct SynthData {
  Frame frame;             // y repeated per group, X per row
  Eigen::VectorXd x;
  Eigen::VectorXd y_true;  // the high-frequency truth
  Eigen::VectorXd y_low;   // aggregated targets
};

// y = intercept + beta X + AR(1, rho) noise, aggregated under the rule.
SynthData make_synthetic(const SynthConfig& config);

}  // namespace tdisagg
