#pragma once

// The SVIHR dynamical system: parameters, derived transition rates, and the
// right-hand side of the five-compartment ODE system in raw and normalized
// coordinates. The right-hand side is templated on the scalar type so the
// same expressions run on plain doubles (integrator) and on tape variables
// (residual loss).

#include <array>
#include <cmath>

#include "svihr/errors.hpp"

namespace svihr::epi {

struct SvihrParams {
  double beta = 0;       // per-week transmission risk (per individual pair)
  double kappa = 0;      // residual infection probability after vaccination
  double vac = 0;        // vaccination coefficient, per week
  double xi = 0;         // hospitalization fraction of those leaving I
  double t_infect = 1;   // mean infection period, weeks
  double t_hosp = 1;     // mean hospitalization period, weeks
  double mort = 0;       // mortality coefficient of hospitalized
  double lambda_in = 0;  // recruitment, individuals/week
  double mu = 0;         // natural death rate, per week
  double population = 0;
};

inline void validate(const SvihrParams& p) {
  auto nonneg = [](double v) { return v >= 0 && std::isfinite(v); };
  if (!nonneg(p.beta) || !nonneg(p.kappa) || !nonneg(p.vac) || !nonneg(p.xi) ||
      !nonneg(p.mort) || !nonneg(p.lambda_in) || !nonneg(p.mu) ||
      !nonneg(p.population))
    throw ConfigError("model parameters must be finite and nonnegative");
  if (!(p.t_infect > 0) || !(p.t_hosp > 0))
    throw ConfigError("t_infect and t_hosp must be positive");
  if (p.xi > 1 || p.mort > 1 || p.kappa > 1)
    throw ConfigError("xi, mort and kappa must lie in [0,1]");
}

struct DerivedRates {
  double omega1 = 0;  // I -> R recovery rate, per week
  double omega2 = 0;  // H -> R recovery rate, per week
  double eta = 0;     // I -> H hospitalization rate, per week
};

// omega1 = (1-xi)/T_I and eta = xi/T_I. omega2 = (1-mort)/T_H reproduces the
// published values for both parameter sets.
inline DerivedRates derive_rates(const SvihrParams& p) {
  DerivedRates d;
  d.omega1 = (1.0 - p.xi) / p.t_infect;
  d.eta = p.xi / p.t_infect;
  d.omega2 = (1.0 - p.mort) / p.t_hosp;
  return d;
}

struct CompartmentState {
  double s = 0, v = 0, i = 0, h = 0, r = 0;

  std::array<double, 5> to_array() const { return {s, v, i, h, r}; }
  static CompartmentState from_array(const std::array<double, 5>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
  double total() const { return s + v + i + h + r; }
};

inline void validate(const CompartmentState& st) {
  for (double c : st.to_array())
    if (!(c >= 0) || !std::isfinite(c))
      throw ConfigError("compartment values must be finite and nonnegative");
}

template <class T>
using State5 = std::array<T, 5>;

// d/dt of (S,V,I,H,R). Infection pressure beta*I*S is shared by the first
// three components.
template <class T>
State5<T> rhs(const SvihrParams& p, const DerivedRates& d, const State5<T>& y) {
  const T& s = y[0];
  const T& v = y[1];
  const T& i = y[2];
  const T& h = y[3];
  const T& r = y[4];
  T infection = p.beta * (i * s);
  return {
      p.lambda_in - infection - (p.vac + p.mu) * s,
      p.vac * s - p.kappa * infection - p.mu * v,
      (1.0 + p.kappa) * infection - (d.eta + d.omega1 + p.mu) * i,
      d.eta * i - (d.omega2 + p.mu) * h,
      d.omega1 * i + d.omega2 * h - p.mu * r,
  };
}

// Right-hand side in normalized compartments and normalized time: component k
// is horizon_weeks * rhs(y_norm*scales)_k / scales_k.
template <class T>
State5<T> scaled_rhs(const SvihrParams& p, const DerivedRates& d,
                     const State5<T>& y_norm,
                     const std::array<double, 5>& scales,
                     double horizon_weeks) {
  State5<T> raw = {y_norm[0] * scales[0], y_norm[1] * scales[1],
                   y_norm[2] * scales[2], y_norm[3] * scales[3],
                   y_norm[4] * scales[4]};
  State5<T> f = rhs(p, d, raw);
  for (int k = 0; k < 5; ++k) f[k] = f[k] * (horizon_weeks / scales[k]);
  return f;
}

}  // namespace svihr::epi
