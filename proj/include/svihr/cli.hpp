#pragma once

// Command implementations behind the svihr-pinn CLI: simulate, fit, train,
// beds, validate, synth. Every command writes deterministic CSV/JSON/SVG
// artifacts into an output directory; rerunning with the same config and
// seed overwrites them byte-identically.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "svihr/data_io.hpp"
#include "svihr/errors.hpp"
#include "svihr/mlp.hpp"
#include "svihr/nsfd.hpp"
#include "svihr/pareto.hpp"
#include "svihr/pinn_train.hpp"
#include "svihr/run_config.hpp"
#include "svihr/svg_plot.hpp"

namespace svihr::cli {

namespace fs = std::filesystem;
using config::RunConfig;
using nlohmann::json;

namespace detail {

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir);
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << "\n";
}

inline std::string alpha_id(double alpha) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "a%.12g", alpha);
  return buf;
}

inline void write_history_csv(const std::string& path,
                              const std::vector<train::IterationRecord>& hist) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "iteration,lr,mse_u,mse_f,combined\n";
  for (const auto& rec : hist)
    out << rec.iteration << ',' << data::format_cell(rec.lr) << ','
        << data::format_cell(rec.loss.mse_u) << ','
        << data::format_cell(rec.loss.mse_f) << ','
        << data::format_cell(rec.loss.combined) << '\n';
}

inline void write_normalization_json(const std::string& path,
                                     const data::NormalizedSeries& s,
                                     const data::SplitSpec& split) {
  json j;
  j["scales"] = {{"S", s.scales[0]}, {"V", s.scales[1]}, {"I", s.scales[2]},
                 {"H", s.scales[3]}, {"R", s.scales[4]}};
  j["horizon_weeks"] = s.horizon_weeks;
  j["week_start"] = s.week_start;
  j["train_range"] = {split.train_lo, split.train_hi};
  j["validate_range"] = {split.train_hi, split.validate_hi};
  write_json(path, j);
}

// Predicted infected curve on a quarter-week grid, plus the observed points.
inline void write_prediction_svg(const std::string& path,
                                 const mlp::NetworkParams& params,
                                 const data::NormalizedSeries& series,
                                 const data::SplitSpec& split) {
  svg::Series obs_train{"observed I (training)", "#000000", {}, true, true};
  svg::Series obs_val{"observed I (validation)", "#777777", {}, true, true};
  for (std::size_t i = 0; i < series.size(); ++i) {
    double week = series.week_start + series.times[i] * series.horizon_weeks;
    double raw = series.values[i][2] * series.scales[2];
    if (i < series.train_count)
      obs_train.points.push_back({week, raw});
    else
      obs_val.points.push_back({week, raw});
  }
  svg::Series pred{"PINN I", "#1f77b4", {}, true, false};
  std::vector<double> weeks;
  for (double w = split.train_lo; w <= split.validate_hi + 1e-9; w += 0.25)
    weeks.push_back(w);
  auto values = train::predict(params, weeks, series);
  for (std::size_t i = 0; i < weeks.size(); ++i)
    pred.points.push_back({weeks[i], values[i][2]});
  svg::write(path, svg::chart("Infected compartment: data and prediction",
                              "week", "individuals",
                              {pred, obs_train, obs_val}));
}

}  // namespace detail

inline void cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  auto d = epi::derive_rates(cfg.model);
  auto run = nsfd::simulate(cfg.model, d, cfg.nsfd.h, cfg.nsfd.initial,
                            cfg.nsfd.steps);
  nsfd::save_trajectory_csv(out_dir + "/trajectory.csv", run);

  std::vector<svg::Series> series;
  for (int k = 0; k < 5; ++k)
    series.push_back({data::kColumns[k], svg::kPalette[k], {}, true, false});
  for (int n = 0; n <= run.steps; ++n) {
    auto arr = run.trajectory[n].to_array();
    for (int k = 0; k < 5; ++k)
      series[k].points.push_back({n * run.step_weeks, arr[k]});
  }
  svg::write(out_dir + "/trajectory.svg",
             svg::chart("NSFD trajectory", "week", "individuals", series));
}

inline nsfd::FitResult cmd_fit(const RunConfig& cfg, const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  auto series = config::resolve_normalized(cfg);
  auto fit = nsfd::fit_peak(series, cfg.nsfd.grid, cfg.model, cfg.nsfd.h,
                            cfg.nsfd.initial, cfg.nsfd.steps);
  json j;
  j["beta"] = fit.beta;
  j["kappa"] = fit.kappa;
  j["peak_error"] = fit.peak_error;
  detail::write_json(out_dir + "/fit.json", j);
  return fit;
}

inline train::TrainResult cmd_train(const RunConfig& cfg,
                                    const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  auto series = config::resolve_normalized(cfg);
  auto result = train::train(cfg.train, cfg.model, series);

  mlp::save_snapshot(out_dir + "/params.csv", result.params, cfg.train.seed);
  detail::write_history_csv(out_dir + "/loss_history.csv", result.history);
  detail::write_normalization_json(out_dir + "/normalization.json", series,
                                   cfg.data.split);
  json summary;
  summary["alpha"] = cfg.train.alpha;
  summary["seed"] = cfg.train.seed;
  summary["iterations"] = cfg.train.iterations;
  summary["mse_u"] = result.final_loss.mse_u;
  summary["mse_f"] = result.final_loss.mse_f;
  summary["combined"] = result.final_loss.combined;
  detail::write_json(out_dir + "/train_summary.json", summary);
  detail::write_prediction_svg(out_dir + "/prediction.svg", result.params,
                               series, cfg.data.split);
  return result;
}

inline pareto::BedsResult cmd_beds(const RunConfig& cfg,
                                   const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  detail::ensure_dir(out_dir + "/runs");
  auto series = config::resolve_normalized(cfg);

  auto trainer = [&](double alpha) {
    train::TrainConfig tc = cfg.train;
    tc.alpha = alpha;
    auto res = train::train(tc, cfg.model, series);
    std::string run_id = detail::alpha_id(alpha);
    std::string run_dir = out_dir + "/runs/" + run_id;
    detail::ensure_dir(run_dir);
    mlp::save_snapshot(run_dir + "/params.csv", res.params, tc.seed);
    detail::write_history_csv(run_dir + "/loss_history.csv", res.history);
    res.outcome.run_id = run_id;
    return res.outcome;
  };

  auto result = pareto::beds_run(cfg.beds, trainer);

  // front.csv lists every evaluated weight; the filter is recomputable from
  // the non-failed rows.
  {
    std::ofstream out(out_dir + "/front.csv");
    if (!out) throw ConfigError("cannot write front.csv");
    out << "alpha,mse_f,mse_u,run_id,level,status\n";
    auto on_front = [&](const pareto::OutcomePoint& y) {
      for (const auto& c : result.front.candidates)
        if (c.alpha == y.alpha) return true;
      return false;
    };
    for (const auto& y : result.all_outcomes)
      out << data::format_cell(y.alpha) << ',' << data::format_cell(y.mse_f)
          << ',' << data::format_cell(y.mse_u) << ',' << y.run_id << ','
          << y.level << ',' << (on_front(y) ? "front" : "dominated") << '\n';
    for (double a : result.failed_alphas)
      out << data::format_cell(a) << ",nan,nan," << detail::alpha_id(a)
          << ",0,failed\n";
  }

  // per-level scatter of everything evaluated so far, with the front hull
  for (int level = 1; level <= result.front.level; ++level) {
    std::vector<pareto::OutcomePoint> upto;
    for (const auto& y : result.all_outcomes)
      if (y.level <= level) upto.push_back(y);
    if (upto.empty()) continue;
    auto front = pareto::filter_nondominated(upto);
    svg::Series dots{"evaluated", "#aaaaaa", {}, false, true};
    for (const auto& y : upto) dots.points.push_back({y.mse_f, y.mse_u});
    svg::Series hull{"front", "#d62728", {}, true, true};
    for (auto it = front.rbegin(); it != front.rend(); ++it)
      hull.points.push_back({it->mse_f, it->mse_u});
    svg::write(out_dir + "/front_level_" + std::to_string(level) + ".svg",
               svg::chart("Pareto front approximation, level " +
                              std::to_string(level),
                          "MSE_F", "MSE_U", {dots, hull}));
  }

  // knee: smallest normalized distance to the ideal point
  {
    const auto& cand = result.front.candidates;
    double min_f = cand.front().mse_f, max_f = cand.front().mse_f;
    double min_u = cand.front().mse_u, max_u = cand.front().mse_u;
    for (const auto& y : cand) {
      min_f = std::min(min_f, y.mse_f);
      max_f = std::max(max_f, y.mse_f);
      min_u = std::min(min_u, y.mse_u);
      max_u = std::max(max_u, y.mse_u);
    }
    double span_f = max_f > min_f ? max_f - min_f : 1.0;
    double span_u = max_u > min_u ? max_u - min_u : 1.0;
    const pareto::OutcomePoint* knee = &cand.front();
    double best = -1;
    for (const auto& y : cand) {
      double df = (y.mse_f - min_f) / span_f;
      double du = (y.mse_u - min_u) / span_u;
      double dist = std::sqrt(df * df + du * du);
      if (best < 0 || dist < best) {
        best = dist;
        knee = &y;
      }
    }
    json j;
    j["alpha"] = knee->alpha;
    j["mse_f"] = knee->mse_f;
    j["mse_u"] = knee->mse_u;
    j["run_id"] = knee->run_id;
    j["distance"] = best;
    j["ideal"] = {{"mse_f", min_f}, {"mse_u", min_u}};
    j["objective_span"] = {{"mse_f", span_f}, {"mse_u", span_u}};
    j["selection_rule"] =
        "minimal Euclidean distance to the ideal point (per-objective minima) "
        "after scaling each objective by its range over the front candidates";
    detail::write_json(out_dir + "/knee.json", j);
  }
  return result;
}

inline double cmd_validate(const RunConfig& cfg, const std::string& out_dir,
                           const std::string& params_path) {
  detail::ensure_dir(out_dir);
  if (params_path.empty()) throw ConfigError("validate needs --params <snapshot>");
  auto snapshot = mlp::load_snapshot(params_path);
  auto series = config::resolve_normalized(cfg);

  std::vector<double> pred_i, obs_i, pred_train, obs_train, pred_val, obs_val;
  for (std::size_t i = 0; i < series.size(); ++i) {
    double p = mlp::forward_values(snapshot.params, series.times[i])[2];
    double o = series.values[i][2];
    pred_i.push_back(p);
    obs_i.push_back(o);
    if (i < series.train_count) {
      pred_train.push_back(p);
      obs_train.push_back(o);
    } else {
      pred_val.push_back(p);
      obs_val.push_back(o);
    }
  }
  double full = data::mse_val(pred_i, obs_i);

  json j;
  j["alpha"] = cfg.train.alpha;
  j["mse_val"] = full;
  j["mse_train_window"] = data::mse_val(pred_train, obs_train);
  if (!pred_val.empty())
    j["mse_validate_window"] = data::mse_val(pred_val, obs_val);
  else
    j["mse_validate_window"] = nullptr;
  j["train_range"] = {cfg.data.split.train_lo, cfg.data.split.train_hi};
  j["validate_range"] = {cfg.data.split.train_hi, cfg.data.split.validate_hi};
  detail::write_json(out_dir + "/validate.json", j);

  detail::write_prediction_svg(out_dir + "/comparison.svg", snapshot.params,
                               series, cfg.data.split);
  return full;
}

inline void cmd_synth(const RunConfig& cfg, const std::string& out_dir) {
  detail::ensure_dir(out_dir);
  if (!cfg.data.synth) throw ConfigError("synth command needs a data.synth block");
  data::save_csv(out_dir + "/data.csv", config::resolve_series(cfg));
}

}  // namespace svihr::cli
