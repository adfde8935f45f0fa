#include "tdisagg/retropolarizer.hpp"

#include <cmath>
#include <random>

#include "tdisagg/frame.hpp"

namespace tdisagg {

RetroMethod parse_retro_method(std::string_view name) {
  RetroMethod m;
  if (name == "proportion") {
    m.kind = RetroKind::proportion;
  } else if (name == "linear") {
    m.kind = RetroKind::linear;
  } else if (name == "poly2") {
    m.kind = RetroKind::polynomial;
    m.degree = 2;
  } else if (name == "poly3") {
    m.kind = RetroKind::polynomial;
    m.degree = 3;
  } else if (name == "expsmooth") {
    m.kind = RetroKind::exp_smoothing;
  } else if (name == "mlp") {
    m.kind = RetroKind::mlp;
  } else if (name == "auto") {
    m.kind = RetroKind::automatic;
  } else {
    raise(ErrorCode::InvalidArgument, "unknown retropolation method '" + std::string(name) + "'");
  }
  return m;
}

std::string retro_method_name(const RetroMethod& method) {
  switch (method.kind) {
    case RetroKind::proportion: return "proportion";
    case RetroKind::linear: return "linear";
    case RetroKind::polynomial: return "poly" + std::to_string(method.degree);
    case RetroKind::exp_smoothing: return "expsmooth";
    case RetroKind::mlp: return "mlp";
    case RetroKind::automatic: return "auto";
  }
  return "?";
}

namespace {

struct Observed {
  std::vector<std::size_t> positions;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

Observed collect(const std::vector<std::optional<double>>& y_low, const Eigen::VectorXd& x_low) {
  if (static_cast<std::size_t>(x_low.size()) != y_low.size())
    raise(ErrorCode::LengthMismatch, "y_l and X_l lengths differ");
  Observed obs;
  for (std::size_t i = 0; i < y_low.size(); ++i)
    if (y_low[i]) obs.positions.push_back(i);
  obs.x.resize(static_cast<Eigen::Index>(obs.positions.size()));
  obs.y.resize(static_cast<Eigen::Index>(obs.positions.size()));
  for (std::size_t k = 0; k < obs.positions.size(); ++k) {
    obs.x[static_cast<Eigen::Index>(k)] = x_low[static_cast<Eigen::Index>(obs.positions[k])];
    obs.y[static_cast<Eigen::Index>(k)] = *y_low[obs.positions[k]];
  }
  return obs;
}

void require_variance(const Eigen::VectorXd& x) {
  const double sd = std::sqrt((x.array() - x.mean()).square().sum() /
                              std::max<double>(1.0, static_cast<double>(x.size())));
  if (!(sd > 0.0))
    raise(ErrorCode::DegenerateIndicator, "indicator has zero variance on observed groups");
}

// least-squares polynomial of the given degree in x
Eigen::VectorXd polyfit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree) {
  Eigen::MatrixXd design(x.size(), degree + 1);
  for (int p = 0; p <= degree; ++p) design.col(p) = x.array().pow(p);
  return design.colPivHouseholderQr().solve(y);
}

double polyval(const Eigen::VectorXd& coef, double x) {
  double acc = 0.0;
  for (Eigen::Index p = coef.size() - 1; p >= 0; --p) acc = acc * x + coef[p];
  return acc;
}

// single hidden layer, tanh units, full-batch gradient descent on
// standardised data; everything is seeded for reproducibility
struct Mlp {
  Eigen::VectorXd w1, b1, w2;
  double b2 = 0.0;
  double x_mean = 0.0, x_sd = 1.0, y_mean = 0.0, y_sd = 1.0;

  static Mlp train(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const RetroMethod::MlpConfig& cfg) {
    Mlp net;
    const Eigen::Index h = cfg.hidden;
    const Eigen::Index n = x.size();
    net.x_mean = x.mean();
    net.x_sd = std::sqrt((x.array() - net.x_mean).square().sum() / n);
    if (!(net.x_sd > 0.0)) net.x_sd = 1.0;
    net.y_mean = y.mean();
    net.y_sd = std::sqrt((y.array() - net.y_mean).square().sum() / n);
    if (!(net.y_sd > 0.0)) net.y_sd = 1.0;
    const Eigen::ArrayXd xs = (x.array() - net.x_mean) / net.x_sd;
    const Eigen::ArrayXd ys = (y.array() - net.y_mean) / net.y_sd;

    std::mt19937 rng(cfg.seed);
    auto uniform = [&rng]() {
      return 2.0 * (static_cast<double>(rng()) / 4294967295.0) - 1.0;
    };
    net.w1.resize(h);
    net.b1 = Eigen::VectorXd::Zero(h);
    net.w2.resize(h);
    for (Eigen::Index j = 0; j < h; ++j) net.w1[j] = uniform();
    for (Eigen::Index j = 0; j < h; ++j) net.w2[j] = uniform() / std::sqrt(static_cast<double>(h));

    const double lr = cfg.learning_rate;
    Eigen::ArrayXXd hidden(n, h), grad_hidden(n, h);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (Eigen::Index j = 0; j < h; ++j)
        hidden.col(j) = (xs * net.w1[j] + net.b1[j]).tanh();
      Eigen::ArrayXd pred = (hidden.matrix() * net.w2).array() + net.b2;
      Eigen::ArrayXd err = pred - ys;  // d(loss)/d(pred), loss = mean sq / 2
      const double inv_n = 1.0 / static_cast<double>(n);

      Eigen::VectorXd g_w2 = (hidden.colwise() * err).colwise().sum().matrix().transpose() * inv_n;
      const double g_b2 = err.sum() * inv_n;
      for (Eigen::Index j = 0; j < h; ++j)
        grad_hidden.col(j) = err * net.w2[j] * (1.0 - hidden.col(j).square());
      Eigen::VectorXd g_w1 =
          (grad_hidden.colwise() * xs).colwise().sum().matrix().transpose() * inv_n;
      Eigen::VectorXd g_b1 = grad_hidden.colwise().sum().matrix().transpose() * inv_n;

      net.w2 -= lr * g_w2;
      net.b2 -= lr * g_b2;
      net.w1 -= lr * g_w1;
      net.b1 -= lr * g_b1;
    }
    return net;
  }

  double predict(double x) const {
    const double xs = (x - x_mean) / x_sd;
    double acc = b2;
    for (Eigen::Index j = 0; j < w1.size(); ++j)
      acc += w2[j] * std::tanh(xs * w1[j] + b1[j]);
    return acc * y_sd + y_mean;
  }
};

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double denom = std::sqrt(da.square().sum() * db.square().sum());
  if (!(denom > 0.0)) return 0.0;
  return (da * db).sum() / denom;
}

}  // namespace

RetroMethod auto_select(const std::vector<std::optional<double>>& y_low,
                        const Eigen::VectorXd& x_low) {
  Observed obs = collect(y_low, x_low);
  const std::size_t count = obs.positions.size();
  if (count < 2)
    raise(ErrorCode::InsufficientObservations, "need at least 2 observed y_l entries");
  RetroMethod m;
  if (count < 6) {
    m.kind = RetroKind::proportion;
  } else if (std::abs(pearson(obs.y, obs.x)) >= 0.8) {
    m.kind = RetroKind::linear;
  } else if (count >= 12) {
    m.kind = RetroKind::polynomial;
    m.degree = 2;
  } else {
    m.kind = RetroKind::exp_smoothing;
    m.alpha = 0.5;
  }
  return m;
}

RetroResult retropolate(const std::vector<std::optional<double>>& y_low,
                        const Eigen::VectorXd& x_low, const RetroMethod& method) {
  RetroMethod chosen = method;
  if (method.kind == RetroKind::automatic) {
    chosen = auto_select(y_low, x_low);
    chosen.mlp = method.mlp;
  }

  Observed obs = collect(y_low, x_low);
  const std::size_t count = obs.positions.size();
  const std::size_t n_low = y_low.size();
  if (count < 2)
    raise(ErrorCode::InsufficientObservations, "need at least 2 observed y_l entries");

  RetroResult result;
  result.method_used = chosen;
  result.y_low_filled.resize(static_cast<Eigen::Index>(n_low));
  for (std::size_t i = 0; i < n_low; ++i)
    if (!y_low[i]) result.imputed_groups.push_back(i);

  // prediction function per position; in-sample diagnostics reuse it
  std::vector<double> predicted(n_low, 0.0);
  switch (chosen.kind) {
    case RetroKind::proportion: {
      const double x_sum = obs.x.sum();
      if (x_sum == 0.0)
        raise(ErrorCode::DegenerateIndicator, "observed indicator sums to zero");
      const double ratio = obs.y.sum() / x_sum;
      for (std::size_t i = 0; i < n_low; ++i)
        predicted[i] = ratio * x_low[static_cast<Eigen::Index>(i)];
      break;
    }
    case RetroKind::linear: {
      require_variance(obs.x);
      const Eigen::VectorXd coef = polyfit(obs.x, obs.y, 1);
      for (std::size_t i = 0; i < n_low; ++i)
        predicted[i] = polyval(coef, x_low[static_cast<Eigen::Index>(i)]);
      break;
    }
    case RetroKind::polynomial: {
      if (chosen.degree < 2 || chosen.degree > 3)
        raise(ErrorCode::InvalidArgument, "polynomial degree must be 2 or 3");
      if (count < static_cast<std::size_t>(chosen.degree) + 1)
        raise(ErrorCode::InsufficientObservations,
              "need at least degree+1 observed entries for a polynomial fit");
      require_variance(obs.x);
      const Eigen::VectorXd coef = polyfit(obs.x, obs.y, chosen.degree);
      for (std::size_t i = 0; i < n_low; ++i)
        predicted[i] = polyval(coef, x_low[static_cast<Eigen::Index>(i)]);
      break;
    }
    case RetroKind::exp_smoothing: {
      if (!(chosen.alpha > 0.0) || chosen.alpha > 1.0)
        raise(ErrorCode::InvalidArgument, "alpha must be in (0, 1]");
      // forward pass over observed values; gaps take the state reached
      // before the gap, leading gaps take the first observed value
      double state = obs.y[0];
      std::size_t next_obs = 0;
      for (std::size_t i = 0; i < n_low; ++i) {
        if (next_obs < count && obs.positions[next_obs] == i) {
          predicted[i] = state;  // one-step-ahead view for diagnostics
          state = chosen.alpha * obs.y[static_cast<Eigen::Index>(next_obs)] +
                  (1.0 - chosen.alpha) * state;
          ++next_obs;
        } else {
          predicted[i] = state;
        }
      }
      break;
    }
    case RetroKind::mlp: {
      if (count < 8)
        raise(ErrorCode::InsufficientObservations, "mlp needs at least 8 observed entries");
      require_variance(obs.x);
      const Mlp net = Mlp::train(obs.x, obs.y, chosen.mlp);
      for (std::size_t i = 0; i < n_low; ++i)
        predicted[i] = net.predict(x_low[static_cast<Eigen::Index>(i)]);
      break;
    }
    case RetroKind::automatic:
      raise(ErrorCode::InvalidArgument, "automatic should have been resolved");
  }

  double sq_sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double d = predicted[obs.positions[k]] - obs.y[static_cast<Eigen::Index>(k)];
    sq_sum += d * d;
  }
  result.in_sample_rmse = std::sqrt(sq_sum / static_cast<double>(count));

  for (std::size_t i = 0; i < n_low; ++i)
    result.y_low_filled[static_cast<Eigen::Index>(i)] = y_low[i] ? *y_low[i] : predicted[i];
  return result;
}

}  // namespace tdisagg
