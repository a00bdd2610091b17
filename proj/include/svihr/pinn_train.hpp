#pragma once

// Loss assembly (data, residual, weighted sum), the sigmoid learning-rate
// schedule, a from-scratch Adam optimizer, and the full training loop. One
// tape per iteration: the network is evaluated once per time point, the data
// loss uses the outputs, the residual loss uses the forward tangents, and a
// single reverse sweep yields the gradient of the combined loss.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "svihr/autodiff.hpp"
#include "svihr/data_io.hpp"
#include "svihr/epi_model.hpp"
#include "svihr/errors.hpp"
#include "svihr/mlp.hpp"
#include "svihr/pareto.hpp"

namespace svihr::train {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

enum class Collocation { TrainingPoints, UniformGrid };

struct TrainConfig {
  double alpha = 0.995;
  int iterations = 1000;  // kappa_max
  double lr_start = 0.003;
  double lr_end = 0.00015;
  AdamConfig adam;
  std::uint64_t seed = 0;
  Collocation collocation = Collocation::TrainingPoints;
  int collocation_points = 0;  // only for UniformGrid
};

inline void validate(const TrainConfig& c) {
  if (!(c.alpha >= 0 && c.alpha <= 1))
    throw ConfigError("alpha must lie in [0,1]");
  if (c.iterations < 1) throw ConfigError("iterations must be at least 1");
  if (!(0 < c.lr_end && c.lr_end <= c.lr_start))
    throw ConfigError("need 0 < lr_end <= lr_start");
  if (c.collocation == Collocation::UniformGrid && c.collocation_points < 2)
    throw ConfigError("uniform collocation needs at least 2 points");
}

struct LossBreakdown {
  double mse_u = 0;
  double mse_f = 0;
  double combined = 0;
};

// t(kappa) = -(t_start - t_end) * sigma((kappa - kmax/2) / (0.08 kmax))
//          + t_start, with the logistic sigma.
inline double lr_schedule(double kappa, double kappa_max, double t_start,
                          double t_end) {
  double x = (kappa - 0.5 * kappa_max) / (0.08 * kappa_max);
  double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
  return -(t_start - t_end) * s + t_start;
}

inline double lr_schedule(double kappa, const TrainConfig& c) {
  return lr_schedule(kappa, c.iterations, c.lr_start, c.lr_end);
}

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
};

inline void adam_step(std::vector<double>& theta,
                      const std::vector<double>& grad, AdamState& st,
                      double lr, const AdamConfig& cfg) {
  if (st.m.empty()) {
    st.m.assign(theta.size(), 0.0);
    st.v.assign(theta.size(), 0.0);
  }
  if (grad.size() != theta.size() || st.m.size() != theta.size())
    throw ConfigError("parameter count mismatch");
  ++st.step;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  for (std::size_t j = 0; j < theta.size(); ++j) {
    st.m[j] = cfg.beta1 * st.m[j] + (1.0 - cfg.beta1) * grad[j];
    st.v[j] = cfg.beta2 * st.v[j] + (1.0 - cfg.beta2) * grad[j] * grad[j];
    double mhat = st.m[j] / bc1;
    double vhat = st.v[j] / bc2;
    theta[j] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

namespace detail {

inline ad::Var squared_norm5(const std::array<ad::Var, 5>& diff) {
  ad::Var acc = ad::square(diff[0]);
  for (int k = 1; k < 5; ++k) acc = acc + ad::square(diff[k]);
  return acc;
}

inline ad::Var residual_at(const mlp::NetOutput& out,
                           const epi::SvihrParams& p,
                           const epi::DerivedRates& d,
                           const std::array<double, 5>& scales,
                           double horizon) {
  epi::State5<ad::Var> state = {out.values[0], out.values[1], out.values[2],
                                out.values[3], out.values[4]};
  auto f = epi::scaled_rhs(p, d, state, scales, horizon);
  std::array<ad::Var, 5> diff;
  for (int k = 0; k < 5; ++k) diff[k] = out.time_derivatives[k] - f[k];
  return squared_norm5(diff);
}

}  // namespace detail

// (1/l) sum_i ||net(t_i) - obs(t_i)||^2 over the training rows.
inline ad::Var data_loss_from(const std::vector<mlp::NetOutput>& outputs,
                              const data::NormalizedSeries& series,
                              std::size_t count) {
  if (count == 0) throw ConfigError("empty training series");
  ad::Var acc;
  for (std::size_t i = 0; i < count; ++i) {
    std::array<ad::Var, 5> diff;
    for (int k = 0; k < 5; ++k)
      diff[k] = outputs[i].values[k] - series.values[i][k];
    ad::Var term = detail::squared_norm5(diff);
    acc = i == 0 ? term : acc + term;
  }
  return acc * (1.0 / static_cast<double>(count));
}

inline ad::Var data_loss(ad::Tape& tape, const mlp::NetworkParams& params,
                         const data::NormalizedSeries& series) {
  std::size_t l = series.train_count ? series.train_count : series.size();
  if (l == 0) throw ConfigError("empty training series");
  auto weights = mlp::register_on(tape, params);
  std::vector<mlp::NetOutput> outputs;
  for (std::size_t i = 0; i < l; ++i)
    outputs.push_back(mlp::forward(weights, tape.leaf(series.times[i], 1.0)));
  return data_loss_from(outputs, series, l);
}

// (1/m) sum_i ||d(net)/dt(t_i) - scaled_rhs(net(t_i))||^2.
inline ad::Var residual_loss_from(const std::vector<mlp::NetOutput>& outputs,
                                  const epi::SvihrParams& p,
                                  const epi::DerivedRates& d,
                                  const std::array<double, 5>& scales,
                                  double horizon) {
  if (outputs.empty()) throw ConfigError("empty collocation set");
  ad::Var acc;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    ad::Var term = detail::residual_at(outputs[i], p, d, scales, horizon);
    acc = i == 0 ? term : acc + term;
  }
  return acc * (1.0 / static_cast<double>(outputs.size()));
}

inline ad::Var residual_loss(ad::Tape& tape, const mlp::NetworkParams& params,
                             const epi::SvihrParams& p,
                             const epi::DerivedRates& d,
                             const std::array<double, 5>& scales,
                             double horizon,
                             const std::vector<double>& collocation_times) {
  if (collocation_times.empty()) throw ConfigError("empty collocation set");
  auto weights = mlp::register_on(tape, params);
  std::vector<mlp::NetOutput> outputs;
  for (double t : collocation_times)
    outputs.push_back(mlp::forward(weights, tape.leaf(t, 1.0)));
  return residual_loss_from(outputs, p, d, scales, horizon);
}

inline std::vector<double> collocation_times(const TrainConfig& cfg,
                                             const data::NormalizedSeries& s) {
  std::size_t l = s.train_count ? s.train_count : s.size();
  if (cfg.collocation == Collocation::TrainingPoints)
    return {s.times.begin(), s.times.begin() + static_cast<long>(l)};
  std::vector<double> times;
  double lo = s.times.front();
  double hi = s.times[l - 1];
  int m = cfg.collocation_points;
  for (int j = 0; j < m; ++j)
    times.push_back(lo + (hi - lo) * static_cast<double>(j) / (m - 1));
  return times;
}

struct IterationGraph {
  mlp::TapeWeights weights;
  ad::Var mse_u, mse_f, combined;
};

// Shared forwards: with collocation at the training points each time point is
// evaluated once and serves both losses.
inline IterationGraph build_losses(ad::Tape& tape,
                                   const std::vector<double>& theta,
                                   double alpha,
                                   const data::NormalizedSeries& series,
                                   const epi::SvihrParams& p,
                                   const epi::DerivedRates& d,
                                   const std::vector<double>& colloc) {
  std::size_t l = series.train_count ? series.train_count : series.size();
  IterationGraph g;
  g.weights = mlp::register_flat(tape, theta);

  std::vector<mlp::NetOutput> train_out;
  train_out.reserve(l);
  for (std::size_t i = 0; i < l; ++i)
    train_out.push_back(
        mlp::forward(g.weights, tape.leaf(series.times[i], 1.0)));
  g.mse_u = data_loss_from(train_out, series, l);

  bool same = colloc.size() == l;
  if (same)
    for (std::size_t i = 0; i < l; ++i)
      if (colloc[i] != series.times[i]) same = false;
  std::vector<mlp::NetOutput> res_out;
  if (same) {
    res_out = train_out;
  } else {
    res_out.reserve(colloc.size());
    for (double t : colloc)
      res_out.push_back(mlp::forward(g.weights, tape.leaf(t, 1.0)));
  }
  g.mse_f = residual_loss_from(res_out, p, d, series.scales,
                               series.horizon_weeks);
  g.combined = g.mse_u * alpha + g.mse_f * (1.0 - alpha);
  return g;
}

struct IterationRecord {
  int iteration = 0;
  double lr = 0;
  LossBreakdown loss;
};

struct TrainResult {
  mlp::NetworkParams params;
  std::vector<IterationRecord> history;  // loss seen at each iteration
  LossBreakdown final_loss;              // after the last update
  pareto::OutcomePoint outcome;
};

inline TrainResult train(const TrainConfig& cfg, const epi::SvihrParams& model,
                         const data::NormalizedSeries& series) {
  validate(cfg);
  epi::validate(model);
  auto rates = epi::derive_rates(model);
  auto colloc = collocation_times(cfg, series);

  std::vector<double> theta = mlp::flatten(mlp::init(cfg.seed));
  AdamState adam;
  std::vector<double> grad(theta.size());
  TrainResult result;
  result.history.reserve(cfg.iterations);

  ad::Tape tape;
  std::size_t l = series.train_count ? series.train_count : series.size();
  tape.reserve(2200 + 8800 * (l + colloc.size()));

  auto losses_of = [](const IterationGraph& g) {
    return LossBreakdown{g.mse_u.value(), g.mse_f.value(), g.combined.value()};
  };

  for (int kappa = 1; kappa <= cfg.iterations; ++kappa) {
    tape.clear();
    IterationGraph g =
        build_losses(tape, theta, cfg.alpha, series, model, rates, colloc);
    LossBreakdown lb = losses_of(g);
    if (!std::isfinite(lb.combined))
      throw NumericError("training diverged at iteration " +
                         std::to_string(kappa));
    auto adj = tape.backward(g.combined);
    for (std::size_t j = 0; j < theta.size(); ++j)
      grad[j] = adj[g.weights.flat_order[j].index()];
    double lr = lr_schedule(kappa, cfg);
    adam_step(theta, grad, adam, lr, cfg.adam);
    result.history.push_back({kappa, lr, lb});
  }

  tape.clear();
  IterationGraph g =
      build_losses(tape, theta, cfg.alpha, series, model, rates, colloc);
  result.final_loss = losses_of(g);
  if (!std::isfinite(result.final_loss.combined))
    throw NumericError("training diverged at iteration " +
                       std::to_string(cfg.iterations));
  result.params = mlp::unflatten(theta);
  result.outcome.alpha = cfg.alpha;
  result.outcome.mse_f = result.final_loss.mse_f;
  result.outcome.mse_u = result.final_loss.mse_u;
  return result;
}

// Evaluates the network at (possibly extrapolated) week indices and rescales
// back to raw counts.
inline std::vector<std::array<double, 5>> predict(
    const mlp::NetworkParams& params, const std::vector<double>& weeks,
    const data::NormalizedSeries& meta) {
  std::vector<std::array<double, 5>> out;
  out.reserve(weeks.size());
  for (double w : weeks) {
    auto vals = mlp::forward_values(params, meta.time_of_week(w));
    for (int k = 0; k < 5; ++k) vals[k] *= meta.scales[k];
    out.push_back(vals);
  }
  return out;
}

}  // namespace svihr::train
