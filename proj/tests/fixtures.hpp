#pragma once

// Shared parameter sets and starting states used across the test suites.

#include "svihr/epi_model.hpp"

namespace fixtures {

// Long-term data window parameters (whole-pandemic training).
inline svihr::epi::SvihrParams long_term() {
  svihr::epi::SvihrParams p;
  p.beta = 1.314e-8;
  p.kappa = 0.001;
  p.vac = 0.0159;
  p.xi = 0.0862;
  p.t_infect = 1.2;
  p.t_hosp = 1.5;
  p.mort = 0.0232;
  p.lambda_in = 0;
  p.mu = 0;
  p.population = 83.1e6;
  return p;
}

// Short-term data window parameters (single-wave training).
inline svihr::epi::SvihrParams short_term() {
  svihr::epi::SvihrParams p = long_term();
  p.beta = 1.476e-8;
  p.vac = 0.0231;
  p.xi = 0.0735;
  p.mort = 0.0142;
  return p;
}

// Wave-start state: susceptibles dominate, small seeded infection. Components
// sum to the 83.1e6 population.
inline svihr::epi::CompartmentState wave_start() {
  return {7.7e7, 1.0e6, 2.0e5, 1.5e4, 4.885e6};
}

}  // namespace fixtures
