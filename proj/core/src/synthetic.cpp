#include "tdisagg/synthetic.hpp"

#include <cmath>

namespace tdisagg {

double NormalSampler::operator()() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // open-interval uniforms keep log() finite
  const double u1 = (static_cast<double>(rng_()) + 0.5) / 4294967296.0;
  const double u2 = (static_cast<double>(rng_()) + 0.5) / 4294967296.0;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

SynthData make_synthetic(const SynthConfig& config) {
  if (config.n_low < 1 || config.m < 1)
    raise(ErrorCode::InvalidArgument, "n_low and m must be >= 1");
  if (!(std::abs(config.rho) < 1.0) || !(std::abs(config.x_phi) < 1.0))
    raise(ErrorCode::InvalidArgument, "rho and x_phi must satisfy |.| < 1");

  const std::size_t n = config.n_low * config.m;
  NormalSampler normal(config.seed);

  SynthData out;
  out.x.resize(static_cast<Eigen::Index>(n));
  out.y_true.resize(static_cast<Eigen::Index>(n));

  double x_state = normal() / std::sqrt(1.0 - config.x_phi * config.x_phi);
  double u_state = config.noise_sd * normal() / std::sqrt(1.0 - config.rho * config.rho);
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      x_state = config.x_phi * x_state + normal();
      u_state = config.rho * u_state + config.noise_sd * normal();
    }
    out.x[static_cast<Eigen::Index>(t)] = config.x_level + x_state;
    out.y_true[static_cast<Eigen::Index>(t)] =
        config.intercept + config.beta * out.x[static_cast<Eigen::Index>(t)] + u_state;
  }

  std::vector<Row> rows;
  rows.reserve(n);
  for (std::size_t g = 0; g < config.n_low; ++g)
    for (std::size_t k = 0; k < config.m; ++k)
      rows.push_back(Row{IndexKey::of(static_cast<long long>(g + 1)),
                         static_cast<long long>(k + 1), std::nullopt,
                         out.x[static_cast<Eigen::Index>(g * config.m + k)]});
  Frame shape(std::move(rows));
  const ConversionMatrix cm = build_C(shape, config.rule);
  out.y_low = cm.aggregate(out.y_true);

  std::vector<std::optional<double>> targets(config.n_low);
  for (std::size_t g = 0; g < config.n_low; ++g)
    targets[g] = out.y_low[static_cast<Eigen::Index>(g)];
  out.frame = shape.with_group_targets(targets);
  return out;
}

}  // namespace tdisagg
