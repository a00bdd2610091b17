#pragma once

// JSON run configuration shared by all CLI commands. Parsing is strict:
// unknown keys are rejected, and every nested block is validated before any
// work starts.

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "svihr/data_io.hpp"
#include "svihr/epi_model.hpp"
#include "svihr/errors.hpp"
#include "svihr/nsfd.hpp"
#include "svihr/pareto.hpp"
#include "svihr/pinn_train.hpp"

namespace svihr::config {

using json = nlohmann::json;

struct SynthSpec {
  int steps = 100;
  double noise_rel = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> h;                        // defaults to nsfd.h
  std::optional<epi::CompartmentState> initial;   // defaults to nsfd.initial
};

struct NsfdBlock {
  double h = 1.0;
  int steps = 100;
  epi::CompartmentState initial{7.7e7, 1.0e6, 2.0e5, 1.5e4, 4.885e6};
  nsfd::FitGrid grid = nsfd::default_fit_grid();
};

struct DataBlock {
  std::string input;  // CSV path; empty when synthetic
  std::optional<SynthSpec> synth;
  data::SplitSpec split{0, 1, 1};
  bool has_split = false;
};

struct RunConfig {
  epi::SvihrParams model;
  NsfdBlock nsfd;
  train::TrainConfig train;
  pareto::BedsConfig beds;
  DataBlock data;
  std::string output_dir = "out";
};

namespace detail {

inline void check_keys(const json& j, const std::string& block,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("block '" + block + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError("unknown key '" + key + "' in block '" + block + "'");
  }
}

template <class T>
void get_to(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

inline epi::CompartmentState parse_state(const json& j, const std::string& block) {
  check_keys(j, block, {"s", "v", "i", "h", "r"});
  epi::CompartmentState st{0, 0, 0, 0, 0};
  get_to(j, "s", st.s);
  get_to(j, "v", st.v);
  get_to(j, "i", st.i);
  get_to(j, "h", st.h);
  get_to(j, "r", st.r);
  epi::validate(st);
  return st;
}

inline void parse_model(const json& j, epi::SvihrParams& p) {
  check_keys(j, "model",
             {"beta", "kappa", "vac", "xi", "t_infect", "t_hosp", "mort",
              "lambda_in", "mu", "population"});
  get_to(j, "beta", p.beta);
  get_to(j, "kappa", p.kappa);
  get_to(j, "vac", p.vac);
  get_to(j, "xi", p.xi);
  get_to(j, "t_infect", p.t_infect);
  get_to(j, "t_hosp", p.t_hosp);
  get_to(j, "mort", p.mort);
  get_to(j, "lambda_in", p.lambda_in);
  get_to(j, "mu", p.mu);
  get_to(j, "population", p.population);
  epi::validate(p);
}

inline void parse_nsfd(const json& j, NsfdBlock& b) {
  check_keys(j, "nsfd", {"h", "steps", "initial", "fit_grid"});
  get_to(j, "h", b.h);
  get_to(j, "steps", b.steps);
  if (j.contains("initial")) b.initial = parse_state(j.at("initial"), "nsfd.initial");
  if (j.contains("fit_grid")) {
    const json& g = j.at("fit_grid");
    check_keys(g, "nsfd.fit_grid",
               {"beta_min", "beta_max", "beta_count", "kappas"});
    double lo = 1e-9, hi = 1e-7;
    int count = 40;
    get_to(g, "beta_min", lo);
    get_to(g, "beta_max", hi);
    get_to(g, "beta_count", count);
    if (!(lo > 0) || !(hi > lo) || count < 1)
      throw ConfigError("invalid fit grid bounds");
    b.grid.betas.clear();
    for (int i = 0; i < count; ++i)
      b.grid.betas.push_back(
          count == 1 ? lo
                     : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    if (g.contains("kappas")) {
      b.grid.kappas = g.at("kappas").get<std::vector<double>>();
      if (b.grid.kappas.empty()) throw ConfigError("empty fit grid");
    }
  }
  if (!(b.h > 0)) throw ConfigError("nsfd.h must be positive");
  if (b.steps < 0) throw ConfigError("nsfd.steps must be nonnegative");
}

inline void parse_train(const json& j, train::TrainConfig& c) {
  check_keys(j, "train",
             {"alpha", "iterations", "lr_start", "lr_end", "adam", "seed",
              "collocation"});
  get_to(j, "alpha", c.alpha);
  get_to(j, "iterations", c.iterations);
  get_to(j, "lr_start", c.lr_start);
  get_to(j, "lr_end", c.lr_end);
  get_to(j, "seed", c.seed);
  if (j.contains("adam")) {
    const json& a = j.at("adam");
    check_keys(a, "train.adam", {"beta1", "beta2", "epsilon"});
    get_to(a, "beta1", c.adam.beta1);
    get_to(a, "beta2", c.adam.beta2);
    get_to(a, "epsilon", c.adam.epsilon);
  }
  if (j.contains("collocation")) {
    const json& col = j.at("collocation");
    check_keys(col, "train.collocation", {"mode", "points"});
    std::string mode = "training-points";
    get_to(col, "mode", mode);
    if (mode == "training-points") {
      c.collocation = train::Collocation::TrainingPoints;
    } else if (mode == "uniform") {
      c.collocation = train::Collocation::UniformGrid;
      c.collocation_points = 0;
      get_to(col, "points", c.collocation_points);
    } else {
      throw ConfigError("collocation mode must be training-points or uniform");
    }
  }
  train::validate(c);
}

inline void parse_beds(const json& j, pareto::BedsConfig& c) {
  check_keys(j, "beds", {"levels", "alpha1", "alpha2", "fail_lo", "fail_hi"});
  get_to(j, "levels", c.levels);
  get_to(j, "alpha1", c.alpha1);
  get_to(j, "alpha2", c.alpha2);
  get_to(j, "fail_lo", c.fail_lo);
  get_to(j, "fail_hi", c.fail_hi);
  pareto::validate(c);
}

inline void parse_data(const json& j, DataBlock& b, const NsfdBlock& nsfd_block) {
  check_keys(j, "data", {"input", "synth", "split"});
  get_to(j, "input", b.input);
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    check_keys(s, "data.synth", {"steps", "noise_rel", "seed", "h", "initial"});
    SynthSpec spec;
    get_to(s, "steps", spec.steps);
    get_to(s, "noise_rel", spec.noise_rel);
    get_to(s, "seed", spec.seed);
    if (s.contains("h")) spec.h = s.at("h").get<double>();
    if (s.contains("initial"))
      spec.initial = parse_state(s.at("initial"), "data.synth.initial");
    if (spec.steps < 1) throw ConfigError("synth.steps must be positive");
    if (spec.noise_rel < 0) throw ConfigError("noise_rel must be nonnegative");
    b.synth = spec;
  }
  if (!b.input.empty() && b.synth)
    throw ConfigError("data block must use either 'input' or 'synth', not both");
  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys(s, "data.split", {"train", "validate"});
    auto tr = s.at("train").get<std::vector<int>>();
    auto va = s.at("validate").get<std::vector<int>>();
    if (tr.size() != 2 || va.size() != 2)
      throw ConfigError("split ranges must be [lo, hi] pairs");
    if (va[0] != tr[1])
      throw ConfigError("validation window must start at the training end");
    b.split = {tr[0], tr[1], va[1]};
    data::validate(b.split);
    b.has_split = true;
  }
  (void)nsfd_block;
}

}  // namespace detail

inline RunConfig parse(const json& j) {
  detail::check_keys(
      j, "<root>", {"model", "nsfd", "train", "beds", "data", "output_dir"});
  RunConfig cfg;
  if (j.contains("model")) detail::parse_model(j.at("model"), cfg.model);
  if (j.contains("nsfd")) detail::parse_nsfd(j.at("nsfd"), cfg.nsfd);
  if (j.contains("train")) detail::parse_train(j.at("train"), cfg.train);
  if (j.contains("beds")) detail::parse_beds(j.at("beds"), cfg.beds);
  if (j.contains("data")) detail::parse_data(j.at("data"), cfg.data, cfg.nsfd);
  detail::get_to(j, "output_dir", cfg.output_dir);
  return cfg;
}

inline RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    return parse(j);
  } catch (const json::exception& e) {
    throw ConfigError("config error in " + path + ": " + e.what());
  }
}

// The weekly series named by the config: a CSV file or a synthetic NSFD run
// generated from the model block.
inline data::RawSeries resolve_series(const RunConfig& cfg) {
  if (!cfg.data.input.empty()) return data::load_csv(cfg.data.input);
  if (cfg.data.synth) {
    const SynthSpec& s = *cfg.data.synth;
    auto d = epi::derive_rates(cfg.model);
    return nsfd::synthesize(cfg.model, d, s.h.value_or(cfg.nsfd.h),
                            s.initial.value_or(cfg.nsfd.initial), s.steps,
                            s.noise_rel, s.seed);
  }
  throw ConfigError("config has no data source (data.input or data.synth)");
}

inline data::NormalizedSeries resolve_normalized(const RunConfig& cfg) {
  if (!cfg.data.has_split) throw ConfigError("config has no data.split");
  return data::normalize(resolve_series(cfg), cfg.data.split);
}

}  // namespace svihr::config
