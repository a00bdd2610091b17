// Acceptance suite: one pass/fail line per criterion, each at its stated
// tolerance. Usage: `acceptance` runs everything, `acceptance <n>` runs one
// criterion. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "random_expr.hpp"
#include "svihr/data_io.hpp"
#include "svihr/epi_model.hpp"
#include "svihr/mlp.hpp"
#include "svihr/nsfd.hpp"
#include "svihr/pareto.hpp"
#include "svihr/pinn_train.hpp"

using namespace svihr;
using fixtures::long_term;
using fixtures::short_term;
using fixtures::wave_start;

namespace {

struct Criterion {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& msg) {
    if (!cond) {
      ok = false;
      detail << " FAILED{" << msg << "}";
    }
  }
  void note(const std::string& msg) { detail << " " << msg; }
};

bool close_rel(double a, double b, double rel, double floor_abs) {
  double diff = std::abs(a - b);
  if (diff <= floor_abs) return true;
  return diff <= rel * std::max(std::abs(a), std::abs(b));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
Criterion derived_rates() {
  Criterion c;
  auto lt = epi::derive_rates(long_term());
  auto st = epi::derive_rates(short_term());
  c.require(std::abs(lt.omega1 - 0.7615) <= 1e-4, "omega1 long");
  c.require(std::abs(st.omega1 - 0.7721) <= 1e-4, "omega1 short");
  c.require(std::abs(lt.omega2 - 0.6512) <= 1e-4, "omega2 long");
  c.require(std::abs(st.omega2 - 0.6572) <= 1e-4, "omega2 short");
  c.require(std::abs(lt.eta - 0.0719) <= 1e-4, "eta long");
  // the table prints 0.6125 short-term; xi/T_I computes to 0.06125 (shifted
  // decimal in the printed value), i.e. 0.0613 to four decimals
  c.require(std::abs(st.eta - 0.0613) <= 1e-4, "eta short");
  c.require(std::abs(st.eta - 0.6125) > 0.1, "eta short not the misprint");
  c.note("eta_short=" + fmt(st.eta) + " (printed table value 0.6125)");
  return c;
}

// ---------------------------------------------------------------- criterion 2
Criterion conservation_identity() {
  Criterion c;
  auto p = long_term();
  auto d = epi::derive_rates(p);
  double h = 1.0, phi = nsfd::denominator(h, p.mu);
  auto run = nsfd::simulate(p, d, h, wave_start(), 200);
  double n0 = wave_start().total();
  double worst = 0;
  for (int n = 0; n < 200; ++n) {
    const auto& a = run.trajectory[n];
    const auto& b = run.trajectory[n + 1];
    double lhs = b.total() - a.total();
    double rhs = phi * p.beta * (1.0 + p.kappa) * b.s * (b.i - a.i);
    worst = std::max(worst, std::abs(lhs - rhs) / n0);
  }
  c.require(worst <= 1e-12, "relative defect " + fmt(worst));
  c.note("max relative defect " + fmt(worst));
  return c;
}

// ---------------------------------------------------------------- criterion 3
Criterion positivity() {
  Criterion c;
  for (const auto& p : {long_term(), short_term()}) {
    auto d = epi::derive_rates(p);
    for (double h : {0.1, 0.5, 1.0, 2.0}) {
      for (const auto& init :
           {wave_start(), epi::CompartmentState{4e7, 2e7, 1e6, 5e4, 1e7}}) {
        auto run = nsfd::simulate(p, d, h, init, 200);
        for (const auto& st : run.trajectory)
          for (double v : st.to_array())
            c.require(v >= 0.0, "negative component at h=" + fmt(h));
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------- criterion 4
Criterion denominator_asymptotics() {
  Criterion c;
  double mu = 0.1, h = 1e-3;
  double lead = (nsfd::denominator(h, mu) - h) / (h * h);
  double rel = std::abs(lead - mu / 2) / (mu / 2);
  c.require(rel < 0.01, "leading coefficient off by " + fmt(rel));
  for (double hh : {1e-3, 0.25, 1.0, 2.0})
    c.require(nsfd::denominator(hh, 0.0) == hh, "phi != h at mu=0");
  c.note("(phi(h)-h)/h^2 = " + fmt(lead));
  return c;
}

// ---------------------------------------------------------------- criterion 5
Criterion linear_recovery() {
  Criterion c;
  epi::SvihrParams p;
  p.beta = 0;
  p.vac = 0;
  p.lambda_in = 7e4;
  p.mu = 0.015;
  p.t_infect = 1;
  p.t_hosp = 1;
  epi::DerivedRates d{0, 0, 0};
  epi::CompartmentState init{4e7, 2e7, 1e6, 1e5, 5e6};
  double n0 = init.total();
  double h = 1.0;
  auto run = nsfd::simulate(p, d, h, init, 100);
  double worst = 0;
  for (int n = 0; n <= 100; ++n) {
    double expect = p.lambda_in / p.mu +
                    (n0 - p.lambda_in / p.mu) * std::exp(-p.mu * n * h);
    worst = std::max(worst,
                     std::abs(run.trajectory[n].total() - expect) / expect);
  }
  c.require(worst <= 1e-12, "relative error " + fmt(worst));
  c.note("max relative error " + fmt(worst));
  return c;
}

// ---------------------------------------------------------------- criterion 6
Criterion autodiff_vs_fd() {
  Criterion c;

  // 50 random expressions: reverse gradients and forward tangents, h = 1e-6
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> seed_dist(-1.0, 1.0);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    auto prog = testutil::random_program(rng, 4, 20);
    const std::vector<double>& leaves = prog.leaves;
    std::vector<double> seeds(4);
    for (auto& s : seeds) s = seed_dist(rng);

    ad::Tape tape;
    std::vector<ad::Var> lv;
    ad::Var out = prog.record(tape, leaves, seeds, &lv);
    auto adj = tape.backward(out);
    for (int j = 0; j < 4; ++j) {
      auto up = leaves, dn = leaves;
      up[j] += h;
      dn[j] -= h;
      double fd = (prog.eval(up) - prog.eval(dn)) / (2 * h);
      c.require(close_rel(adj[lv[j].index()], fd, 1e-5, 1e-8),
                "reverse grad, trial " + std::to_string(trial));
    }
    std::vector<double> lp(4), lm(4);
    for (int j = 0; j < 4; ++j) {
      lp[j] = leaves[j] + h * seeds[j];
      lm[j] = leaves[j] - h * seeds[j];
    }
    double fd_dir = (prog.eval(lp) - prog.eval(lm)) / (2 * h);
    c.require(close_rel(out.tangent_value(), fd_dir, 1e-5, 1e-8),
              "forward tangent, trial " + std::to_string(trial));
  }

  // full network, 20 sampled coordinates of the 2075
  auto p = short_term();
  auto rates = epi::derive_rates(p);
  auto raw = nsfd::synthesize(p, rates, 1.0, wave_start(), 23, 0.0, 0);
  auto series = data::normalize(raw, {0, 19, 23});
  auto theta = mlp::flatten(mlp::init(0));
  std::vector<double> some_times = {0.1, 0.4, 0.65, 0.9};

  auto eval_losses = [&](const std::vector<double>& th, double& u, double& f) {
    ad::Tape tape;
    auto w = mlp::register_flat(tape, th);
    std::vector<mlp::NetOutput> outs;
    for (double t : some_times)
      outs.push_back(mlp::forward(w, tape.leaf(t, 1.0)));
    data::NormalizedSeries sub = series;
    sub.times = some_times;
    sub.values.assign(series.values.begin(), series.values.begin() + 4);
    sub.train_count = 4;
    u = train::data_loss_from(outs, sub, 4).value();
    f = train::residual_loss_from(outs, p, rates, series.scales,
                                  series.horizon_weeks)
            .value();
  };

  ad::Tape tape;
  auto w = mlp::register_flat(tape, theta);
  std::vector<mlp::NetOutput> outs;
  for (double t : some_times)
    outs.push_back(mlp::forward(w, tape.leaf(t, 1.0)));
  data::NormalizedSeries sub = series;
  sub.times = some_times;
  sub.values.assign(series.values.begin(), series.values.begin() + 4);
  sub.train_count = 4;
  auto u_loss = train::data_loss_from(outs, sub, 4);
  auto f_loss = train::residual_loss_from(outs, p, rates, series.scales,
                                          series.horizon_weeks);
  auto adj_u = tape.backward(u_loss);
  auto adj_f = tape.backward(f_loss);

  std::mt19937_64 pick_rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, theta.size() - 1);
  const double hw = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t j = pick(pick_rng);
    auto tp = theta, tm = theta;
    tp[j] += hw;
    tm[j] -= hw;
    double up, fp, um, fm;
    eval_losses(tp, up, fp);
    eval_losses(tm, um, fm);
    double fd_u = (up - um) / (2 * hw);
    double fd_f = (fp - fm) / (2 * hw);
    // first order: data loss; mixed second order: residual loss contains
    // d(net)/dt, so its weight gradient exercises forward-over-reverse
    c.require(close_rel(adj_u[w.flat_order[j].index()], fd_u, 1e-5, 1e-8),
              "network data-loss grad, coord " + std::to_string(j));
    c.require(close_rel(adj_f[w.flat_order[j].index()], fd_f, 1e-4, 1e-8),
              "network residual grad, coord " + std::to_string(j));
  }
  return c;
}

// ---------------------------------------------------------------- criterion 7
Criterion lr_schedule_values() {
  Criterion c;
  const double kmax = 1000;
  double mid = train::lr_schedule(kmax / 2, kmax, 0.003, 0.00015);
  double first = train::lr_schedule(1, kmax, 0.003, 0.00015);
  double last = train::lr_schedule(kmax, kmax, 0.003, 0.00015);
  c.require(mid == 0.001575, "t(kmax/2) = " + fmt(mid));
  c.require(first > 0.00299 && first < 0.00300, "t(1) = " + fmt(first));
  // The schedule evaluates to t_end + (t_start-t_end)/(1+e^6.25) = 1.5549e-4
  // at kappa = kappa_max for every kappa_max, which misses this interval.
  c.require(last > 0.000160 && last < 0.000161, "t(kmax) = " + fmt(last));
  double prev = first;
  bool monotone = true;
  for (int k = 2; k <= 1000; ++k) {
    double cur = train::lr_schedule(k, kmax, 0.003, 0.00015);
    if (!(cur < prev)) monotone = false;
    prev = cur;
  }
  c.require(monotone, "not strictly decreasing");
  c.note("t(1)=" + fmt(first) + " t(500)=" + fmt(mid) + " t(1000)=" + fmt(last));
  return c;
}

// ---------------------------------------------------------------- criterion 8
Criterion training_sanity() {
  Criterion c;
  auto p = short_term();
  auto d = epi::derive_rates(p);
  auto raw = nsfd::synthesize(p, d, 1.0, wave_start(), 23, 0.0, 0);
  auto series = data::normalize(raw, {0, 19, 23});  // 20 training points

  train::TrainConfig cfg;
  cfg.alpha = 0.995;
  cfg.iterations = 2000;
  cfg.seed = 0;
  auto t0 = std::chrono::steady_clock::now();
  auto res = train::train(cfg, p, series);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  c.require(res.final_loss.mse_u < 1e-3, "mse_u = " + fmt(res.final_loss.mse_u));
  c.require(std::isfinite(res.final_loss.mse_f), "mse_f not finite");
  c.require(secs < 60.0, "runtime " + fmt(secs) + "s");

  // the extrapolated infected curve declines after the trained peak
  auto pred = train::predict(res.params, {20, 24}, series);
  double obs_peak = 0;
  for (const auto& row : raw.values) obs_peak = std::max(obs_peak, row[2]);
  c.require(pred[1][2] < pred[0][2], "extrapolation does not decline");
  c.require(pred[0][2] < obs_peak, "extrapolation above the trained peak");
  c.note("mse_u=" + fmt(res.final_loss.mse_u) + " mse_f=" +
         fmt(res.final_loss.mse_f) + " in " + fmt(secs) + "s");
  return c;
}

// ---------------------------------------------------------------- criterion 9
Criterion beds_toy() {
  Criterion c;
  auto trainer = [](double alpha) {
    double x = 2 * alpha - 1;
    pareto::OutcomePoint y;
    y.mse_f = (x + 1) * (x + 1);
    y.mse_u = (x - 1) * (x - 1);
    y.alpha = alpha;
    return y;
  };
  pareto::BedsConfig cfg;
  cfg.levels = 4;
  cfg.alpha1 = 0.2;
  cfg.alpha2 = 0.8;
  cfg.fail_lo = 1e-12;
  cfg.fail_hi = 1.0 - 1e-12;
  auto res = pareto::beds_run(cfg, trainer);

  c.require(res.front.level == 4, "levels completed");
  c.require(res.all_outcomes.size() <= 13,
            "total runs " + std::to_string(res.all_outcomes.size()));

  // orthogonality recomputed from the parent outcomes, not the stored residual
  std::map<double, pareto::OutcomePoint> by_alpha;
  for (const auto& y : res.all_outcomes) by_alpha[y.alpha] = y;
  for (const auto& rec : res.generated) {
    auto lo = by_alpha.find(rec.parent_alpha_lo);
    auto hi = by_alpha.find(rec.parent_alpha_hi);
    c.require(lo != by_alpha.end() && hi != by_alpha.end(), "parents trained");
    if (lo == by_alpha.end() || hi == by_alpha.end()) continue;
    double du = lo->second.mse_u - hi->second.mse_u;
    double df = lo->second.mse_f - hi->second.mse_f;
    double ortho = std::abs(rec.alpha * du + (1 - rec.alpha) * df);
    c.require(ortho < 1e-9, "orthogonality " + fmt(ortho));
  }

  // every returned point on the known front sqrt(f) + sqrt(u) = 2
  for (const auto& y : res.front.candidates)
    c.require(std::abs(std::sqrt(y.mse_f) + std::sqrt(y.mse_u) - 2.0) < 1e-9,
              "point off the analytic front");
  c.note(std::to_string(res.all_outcomes.size()) + " runs, " +
         std::to_string(res.front.candidates.size()) + " front points");
  return c;
}

// --------------------------------------------------------------- criterion 10
Criterion beds_end_to_end() {
  Criterion c;
  auto t0 = std::chrono::steady_clock::now();

  // synthetic two-wave data: a second, shifted wave rides on the first, so
  // the single-wave dynamics cannot drive the residual to zero
  auto p = short_term();
  auto d = epi::derive_rates(p);
  auto run1 = nsfd::simulate(p, d, 1.0, wave_start(), 24);
  auto p2 = p;
  p2.beta = 1.9e-8;
  auto run2 = nsfd::simulate(p2, d, 1.0, {7.0e7, 2e6, 1.2e5, 1e4, 4e6}, 24);
  data::RawSeries raw;
  for (int k = 0; k <= 24; ++k) {
    raw.weeks.push_back(k);
    auto a = run1.trajectory[k].to_array();
    if (k >= 12) {
      auto b = run2.trajectory[k - 12].to_array();
      for (int j : {2, 3, 4}) a[j] += 0.9 * b[j];
    }
    raw.values.push_back(a);
  }
  auto series = data::normalize(raw, {0, 19, 24});

  train::TrainConfig tc;
  tc.iterations = 2000;
  tc.seed = 0;
  pareto::BedsConfig bc;  // defaults: levels 4, [0.9, 0.999], guards 0.8/0.998
  bc.levels = 3;
  auto trainer = [&](double alpha) {
    train::TrainConfig one = tc;
    one.alpha = alpha;
    return train::train(one, p, series).outcome;
  };
  auto res = pareto::beds_run(bc, trainer);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  // brute-force nondominance of the final candidate set
  const auto& cs = res.front.candidates;
  for (std::size_t i = 0; i < cs.size(); ++i)
    for (std::size_t j = 0; j < cs.size(); ++j)
      if (i != j)
        c.require(!pareto::dominates(cs[i], cs[j]), "dominated point kept");

  // more residual weight at the smallest surviving alpha
  double alpha_min = cs.front().alpha;
  double mse_f_min = cs.front().mse_f;
  for (const auto& y : cs)
    if (y.alpha < alpha_min) {
      alpha_min = y.alpha;
      mse_f_min = y.mse_f;
    }
  const pareto::OutcomePoint* at_a2 = nullptr;
  for (const auto& y : res.all_outcomes)
    if (y.alpha == bc.alpha2) at_a2 = &y;
  c.require(at_a2 != nullptr, "alpha2 not evaluated");
  if (at_a2)
    c.require(mse_f_min < at_a2->mse_f,
              "mse_f(" + fmt(alpha_min) + ")=" + fmt(mse_f_min) +
                  " !< mse_f(alpha2)=" + fmt(at_a2->mse_f));
  c.require(secs < 600.0, "runtime " + fmt(secs) + "s");
  c.note(std::to_string(res.all_outcomes.size()) + " runs in " + fmt(secs) +
         "s; mse_f(" + fmt(alpha_min) + ")=" + fmt(mse_f_min) +
         (at_a2 ? " vs mse_f(0.999)=" + fmt(at_a2->mse_f) : ""));
  return c;
}

// --------------------------------------------------------------- criterion 11
Criterion filter_equivalence() {
  Criterion c;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<pareto::OutcomePoint> cloud;
    for (int i = 0; i < 50; ++i) {
      pareto::OutcomePoint y;
      y.mse_f = dist(rng);
      y.mse_u = dist(rng);
      cloud.push_back(y);
    }
    auto got = pareto::filter_nondominated(cloud);
    // O(n^2) brute-force oracle, written independently
    std::set<std::pair<double, double>> expect;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < cloud.size(); ++j) {
        if (i == j) continue;
        bool le = cloud[j].mse_f <= cloud[i].mse_f &&
                  cloud[j].mse_u <= cloud[i].mse_u;
        bool strict = cloud[j].mse_f < cloud[i].mse_f ||
                      cloud[j].mse_u < cloud[i].mse_u;
        if (le && strict) dominated = true;
      }
      if (!dominated) expect.insert({cloud[i].mse_f, cloud[i].mse_u});
    }
    std::set<std::pair<double, double>> got_set;
    for (const auto& y : got) got_set.insert({y.mse_f, y.mse_u});
    c.require(got_set == expect, "set mismatch in trial " + std::to_string(trial));
  }
  return c;
}

// --------------------------------------------------------------- criterion 12
Criterion fit_self_consistency() {
  Criterion c;
  auto t0 = std::chrono::steady_clock::now();
  auto grid = nsfd::default_fit_grid();
  double beta_true = grid.betas[25];
  double kappa_true = grid.kappas[1];  // 0.005

  auto tmpl = short_term();
  auto truth = tmpl;
  truth.beta = beta_true;
  truth.kappa = kappa_true;
  auto d = epi::derive_rates(truth);
  auto raw = nsfd::synthesize(truth, d, 1.0, wave_start(), 24, 0.0, 0);
  auto series = data::normalize(raw, {0, 20, 24});

  auto fit = nsfd::fit_peak(series, grid, tmpl, 1.0, wave_start(), 24);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(fit.beta == beta_true, "beta " + fmt(fit.beta));
  c.require(fit.kappa == kappa_true, "kappa " + fmt(fit.kappa));
  c.require(fit.peak_error <= 1e-12, "peak_error " + fmt(fit.peak_error));
  c.require(secs < 30.0, "runtime " + fmt(secs) + "s");
  c.note("recovered beta=" + fmt(fit.beta) + " kappa=" + fmt(fit.kappa) +
         " in " + fmt(secs) + "s");
  return c;
}

struct Entry {
  const char* name;
  std::function<Criterion()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Entry> entries = {
      {"derived-rates", derived_rates},
      {"nsfd-conservation-identity", conservation_identity},
      {"nsfd-positivity", positivity},
      {"denominator-asymptotics", denominator_asymptotics},
      {"exact-linear-recovery", linear_recovery},
      {"autodiff-vs-finite-differences", autodiff_vs_fd},
      {"learning-rate-schedule", lr_schedule_values},
      {"training-sanity", training_sanity},
      {"beds-analytic-toy", beds_toy},
      {"beds-end-to-end", beds_end_to_end},
      {"dominance-filter-equivalence", filter_equivalence},
      {"fit-self-consistency", fit_self_consistency},
  };

  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > static_cast<int>(entries.size())) {
      std::fprintf(stderr, "criterion number must be 1..%zu\n", entries.size());
      return 64;
    }
  }

  int failures = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    Criterion result = entries[i].fn();
    if (!result.ok) ++failures;
    std::printf("[%s] %02zu %s:%s\n", result.ok ? "PASS" : "FAIL", i + 1,
                entries[i].name, result.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures;
}
