// svihr-pinn: train a physics-informed surrogate of the SVIHR compartment
// model, estimate transmission parameters with the NSFD integrator, and
// approximate the data-vs-residual Pareto front with a bisection-enhanced
// dichotomic search.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "svihr/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"SVIHR PINN training and biobjective loss-weight search"};
  app.require_subcommand(1);

  std::string config_path, out_dir, params_path;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")
        ->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--alpha", alpha, "override train.alpha");
    cmd->add_option("--seed", seed, "override train.seed");
    return cmd;
  };

  auto* sim = add_common(
      app.add_subcommand("simulate", "integrate the SVIHR system with NSFD"));
  auto* fit = add_common(app.add_subcommand(
      "fit", "grid-search beta and kappa by matching the infected peak"));
  auto* tr = add_common(
      app.add_subcommand("train", "one PINN training run at a fixed alpha"));
  auto* beds = add_common(app.add_subcommand(
      "beds", "bisection-enhanced dichotomic search over loss weights"));
  auto* val = add_common(app.add_subcommand(
      "validate", "score a trained snapshot on the full data window"));
  val->add_option("--params", params_path, "network snapshot CSV")->required();
  auto* synth = add_common(
      app.add_subcommand("synth", "write a synthetic weekly data set"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto cfg = svihr::config::load(config_path);
    if (alpha) cfg.train.alpha = *alpha;
    if (seed) cfg.train.seed = *seed;
    std::string out = out_dir.empty() ? cfg.output_dir : out_dir;

    if (sim->parsed()) {
      svihr::cli::cmd_simulate(cfg, out);
      std::printf("wrote %s/trajectory.csv and trajectory.svg\n", out.c_str());
    } else if (fit->parsed()) {
      auto result = svihr::cli::cmd_fit(cfg, out);
      std::printf("fit: beta=%.6g kappa=%.6g peak_error=%.6g -> %s/fit.json\n",
                  result.beta, result.kappa, result.peak_error, out.c_str());
    } else if (tr->parsed()) {
      auto result = svihr::cli::cmd_train(cfg, out);
      std::printf("train: alpha=%.6g mse_u=%.6g mse_f=%.6g -> %s\n",
                  cfg.train.alpha, result.final_loss.mse_u,
                  result.final_loss.mse_f, out.c_str());
    } else if (beds->parsed()) {
      auto result = svihr::cli::cmd_beds(cfg, out);
      std::printf("beds: %zu runs, %zu front candidates -> %s/front.csv\n",
                  result.all_outcomes.size(), result.front.candidates.size(),
                  out.c_str());
    } else if (val->parsed()) {
      double mse = svihr::cli::cmd_validate(cfg, out, params_path);
      std::printf("validate: mse_val=%.6g -> %s/validate.json\n", mse,
                  out.c_str());
    } else if (synth->parsed()) {
      svihr::cli::cmd_synth(cfg, out);
      std::printf("wrote %s/data.csv\n", out.c_str());
    }
  } catch (const svihr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const svihr::NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
