#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "svihr/nsfd.hpp"

using namespace svihr;
using epi::CompartmentState;
using fixtures::long_term;
using fixtures::short_term;
using fixtures::wave_start;

namespace {

// Test-only high-accuracy reference: classic RK4 on the continuous system.
CompartmentState rk4_reference(const epi::SvihrParams& p,
                               const epi::DerivedRates& d,
                               const CompartmentState& st, double t_end,
                               int substeps) {
  auto y = st.to_array();
  double h = t_end / substeps;
  for (int n = 0; n < substeps; ++n) {
    auto add = [](const epi::State5<double>& a, const epi::State5<double>& b,
                  double f) {
      epi::State5<double> r;
      for (int k = 0; k < 5; ++k) r[k] = a[k] + f * b[k];
      return r;
    };
    auto k1 = epi::rhs(p, d, y);
    auto k2 = epi::rhs(p, d, add(y, k1, h / 2));
    auto k3 = epi::rhs(p, d, add(y, k2, h / 2));
    auto k4 = epi::rhs(p, d, add(y, k3, h));
    for (int k = 0; k < 5; ++k)
      y[k] += h / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
  }
  return CompartmentState::from_array(y);
}

}  // namespace

TEST_CASE("denominator function values and limit", "[nsfd]") {
  CHECK(nsfd::denominator(0.5, 0.0) == 0.5);
  CHECK_THAT(nsfd::denominator(1.0, 0.1),
             Catch::Matchers::WithinRel(1.0517091807564771, 1e-15));
  CHECK_THROWS_AS(nsfd::denominator(0.0, 0.1), ConfigError);
}

TEST_CASE("denominator asymptotics phi(h) = h + mu h^2/2 + ...", "[nsfd]") {
  double mu = 0.1, h = 1e-3;
  double lead = (nsfd::denominator(h, mu) - h) / (h * h);
  CHECK(std::abs(lead - mu / 2) / (mu / 2) < 0.01);
}

TEST_CASE("decoupled step is pure geometric decay", "[nsfd]") {
  epi::SvihrParams p = short_term();
  p.beta = 0;
  p.vac = 0;
  p.lambda_in = 0;
  p.mu = 0;
  auto d = epi::derive_rates(p);
  CompartmentState st{5e6, 1e6, 2e4, 0, 0};
  double h = 1.0;
  auto n = nsfd::step(p, d, h, st);
  double phi = nsfd::denominator(h, p.mu);
  CHECK(n.s == st.s);
  CHECK(n.v == st.v);
  CHECK_THAT(n.i, Catch::Matchers::WithinRel(
                      st.i / (1.0 + phi * (d.eta + d.omega1)), 1e-15));
}

TEST_CASE("conservation identity quantifies the discrete defect", "[nsfd]") {
  epi::SvihrParams p = long_term();
  auto d = epi::derive_rates(p);
  double h = 1.0, phi = nsfd::denominator(h, p.mu);
  auto run = nsfd::simulate(p, d, h, wave_start(), 200);
  double big_n = wave_start().total();
  for (int n = 0; n < 200; ++n) {
    const auto& a = run.trajectory[n];
    const auto& b = run.trajectory[n + 1];
    double lhs = b.total() - a.total();
    double rhs = phi * p.beta * (1.0 + p.kappa) * b.s * (b.i - a.i);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * big_n);
  }
}

TEST_CASE("trajectories stay componentwise positive", "[nsfd]") {
  for (const auto& p : {long_term(), short_term()}) {
    auto d = epi::derive_rates(p);
    for (double h : {0.1, 0.5, 1.0, 2.0}) {
      auto run = nsfd::simulate(p, d, h, wave_start(), 200);
      for (const auto& st : run.trajectory)
        for (double c : st.to_array()) CHECK(c > 0.0);
    }
  }
}

TEST_CASE("simulate with zero steps returns only the initial state", "[nsfd]") {
  auto p = short_term();
  auto d = epi::derive_rates(p);
  auto run = nsfd::simulate(p, d, 1.0, wave_start(), 0);
  REQUIRE(run.trajectory.size() == 1);
  CHECK(run.trajectory[0].s == wave_start().s);
}

TEST_CASE("disease-free state is invariant without vaccination", "[nsfd]") {
  epi::SvihrParams p = short_term();
  p.vac = 0;
  p.lambda_in = 0;
  p.mu = 0;
  auto d = epi::derive_rates(p);
  CompartmentState st{5e7, 1e6, 0.0, 2e4, 1e6};
  auto run = nsfd::simulate(p, d, 1.0, st, 50);
  for (int n = 0; n <= 50; ++n) {
    CHECK(run.trajectory[n].s == st.s);
    CHECK(run.trajectory[n].i == 0.0);
  }
  for (int n = 0; n < 50; ++n)
    CHECK(run.trajectory[n + 1].h < run.trajectory[n].h);
}

TEST_CASE("fitted short-term parameters produce a single infection wave",
          "[nsfd]") {
  auto p = short_term();
  auto d = epi::derive_rates(p);
  auto run = nsfd::simulate(p, d, 1.0, wave_start(), 120);
  int sign_changes = 0;
  bool rising = true;
  for (int n = 0; n < 120; ++n) {
    double delta = run.trajectory[n + 1].i - run.trajectory[n].i;
    if (rising && delta < 0) {
      ++sign_changes;
      rising = false;
    } else if (!rising && delta > 0) {
      ++sign_changes;
    }
  }
  CHECK(sign_changes == 1);  // one peak, then monotone decay
}

TEST_CASE("denominator function recovers the linear dynamics exactly",
          "[nsfd]") {
  epi::SvihrParams p;
  p.beta = 0;
  p.vac = 0;
  p.lambda_in = 5e4;
  p.mu = 0.02;
  p.t_infect = 1;
  p.t_hosp = 1;
  epi::DerivedRates d{0, 0, 0};  // all compartment flows off
  CompartmentState st{4e7, 2e7, 1e6, 1e5, 5e6};
  double n0 = st.total();
  double h = 1.0;
  auto run = nsfd::simulate(p, d, h, st, 100);
  for (int n = 0; n <= 100; ++n) {
    double t = n * h;
    double expect =
        p.lambda_in / p.mu + (n0 - p.lambda_in / p.mu) * std::exp(-p.mu * t);
    CHECK_THAT(run.trajectory[n].total(),
               Catch::Matchers::WithinRel(expect, 1e-12));
  }
}

TEST_CASE("one-step defect shrinks about quadratically with h", "[nsfd]") {
  auto p = short_term();
  auto d = epi::derive_rates(p);
  auto defect = [&](double h) {
    auto got = nsfd::step(p, d, h, wave_start());
    auto ref = rk4_reference(p, d, wave_start(), h, 2000);
    double m = 0;
    auto ga = got.to_array(), ra = ref.to_array();
    for (int k = 0; k < 5; ++k)
      m = std::max(m, std::abs(ga[k] - ra[k]) / std::max(1.0, std::abs(ra[k])));
    return m;
  };
  double e1 = defect(0.5), e2 = defect(0.25);
  double ratio = e1 / e2;
  CHECK(ratio > 2.0);
  CHECK(ratio < 8.0);
}

TEST_CASE("positivity violation is an error naming the denominator", "[nsfd]") {
  epi::SvihrParams p = short_term();
  p.beta = 1e-7;  // far above the feasible transmission range
  auto d = epi::derive_rates(p);
  CHECK_THROWS_AS(nsfd::step(p, d, 1.0, wave_start()), NumericError);
  CHECK_THROWS_WITH(nsfd::simulate(p, d, 1.0, wave_start(), 10),
                    Catch::Matchers::ContainsSubstring("positivity") &&
                        Catch::Matchers::ContainsSubstring("step"));
}

TEST_CASE("fit recovers on-grid truth from self-generated data", "[nsfd]") {
  auto tmpl = short_term();
  nsfd::FitGrid grid;
  grid.betas = {8e-9, 1.1e-8, 1.476e-8, 1.9e-8, 2.4e-8};
  grid.kappas = {0.001, 0.01};
  double beta_true = grid.betas[2], kappa_true = grid.kappas[1];

  epi::SvihrParams truth = tmpl;
  truth.beta = beta_true;
  truth.kappa = kappa_true;
  auto d = epi::derive_rates(truth);
  auto raw = nsfd::synthesize(truth, d, 1.0, wave_start(), 24, 0.0, 0);
  auto series = data::normalize(raw, {0, 20, 24});

  auto fit = nsfd::fit_peak(series, grid, tmpl, 1.0, wave_start(), 24);
  CHECK(fit.beta == beta_true);
  CHECK(fit.kappa == kappa_true);
  CHECK(fit.peak_error <= 1e-12);
}

TEST_CASE("single-point grid returns that point", "[nsfd]") {
  auto tmpl = short_term();
  auto d = epi::derive_rates(tmpl);
  auto raw = nsfd::synthesize(tmpl, d, 1.0, wave_start(), 24, 0.0, 0);
  auto series = data::normalize(raw, {0, 20, 24});
  nsfd::FitGrid grid{{2e-8}, {0.05}};
  auto fit = nsfd::fit_peak(series, grid, tmpl, 1.0, wave_start(), 24);
  CHECK(fit.beta == 2e-8);
  CHECK(fit.kappa == 0.05);
  CHECK(fit.peak_error >= 0.0);
}

TEST_CASE("fit reports when no grid point is feasible", "[nsfd]") {
  auto tmpl = short_term();
  auto d = epi::derive_rates(tmpl);
  auto raw = nsfd::synthesize(tmpl, d, 1.0, wave_start(), 24, 0.0, 0);
  auto series = data::normalize(raw, {0, 20, 24});
  nsfd::FitGrid grid{{1e-7, 2e-7}, {0.001}};
  CHECK_THROWS_AS(nsfd::fit_peak(series, grid, tmpl, 1.0, wave_start(), 24),
                  NumericError);
}

TEST_CASE("synthesize is exact without noise and deterministic with it",
          "[nsfd]") {
  auto p = short_term();
  auto d = epi::derive_rates(p);
  auto run = nsfd::simulate(p, d, 1.0, wave_start(), 20);
  auto clean = nsfd::synthesize(p, d, 1.0, wave_start(), 20, 0.0, 7);
  for (int n = 0; n <= 20; ++n)
    for (int k = 0; k < 5; ++k)
      CHECK(clean.values[n][k] == run.trajectory[n].to_array()[k]);

  auto a = nsfd::synthesize(p, d, 1.0, wave_start(), 20, 0.05, 7);
  auto b = nsfd::synthesize(p, d, 1.0, wave_start(), 20, 0.05, 7);
  CHECK(a.values == b.values);
  for (int n = 0; n <= 20; ++n)
    for (int k = 0; k < 5; ++k) {
      double base = run.trajectory[n].to_array()[k];
      CHECK(std::abs(a.values[n][k] - base) <= 0.05 * base + 1e-9);
    }
}
