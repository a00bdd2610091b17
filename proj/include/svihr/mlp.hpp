#pragma once

// Fully connected 1 -> 30 -> 30 -> 30 -> 5 surrogate network with tanh hidden
// activations and a linear output layer, evaluated on the tape so that the
// five outputs and their time derivatives stay differentiable w.r.t. the
// weights. The input is normalized time in [0,1]; the outputs are the
// normalized compartment sizes S,V,I,H,R.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "svihr/autodiff.hpp"
#include "svihr/errors.hpp"

namespace svihr::mlp {

inline constexpr std::array<std::size_t, 5> kWidths = {1, 30, 30, 30, 5};

inline constexpr std::size_t param_count() {
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < kWidths.size(); ++k)
    n += kWidths[k] * kWidths[k + 1] + kWidths[k + 1];
  return n;
}
inline constexpr std::size_t kParamCount = param_count();  // 2075

struct Layer {
  std::size_t in = 0, out = 0;
  std::vector<double> w;  // row-major, out x in
  std::vector<double> b;
};

struct NetworkParams {
  std::vector<Layer> layers;
};

inline NetworkParams zeros() {
  NetworkParams p;
  for (std::size_t k = 0; k + 1 < kWidths.size(); ++k) {
    Layer l;
    l.in = kWidths[k];
    l.out = kWidths[k + 1];
    l.w.assign(l.in * l.out, 0.0);
    l.b.assign(l.out, 0.0);
    p.layers.push_back(std::move(l));
  }
  return p;
}

// Fan-based uniform init, biases zero, deterministic in the seed.
inline NetworkParams init(std::uint64_t seed) {
  NetworkParams p = zeros();
  std::mt19937_64 rng(seed);
  for (auto& l : p.layers) {
    double a = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    std::uniform_real_distribution<double> dist(-a, a);
    for (auto& w : l.w) w = dist(rng);
  }
  return p;
}

// Canonical flat ordering: layer-major, row-major weights then bias.
inline std::vector<double> flatten(const NetworkParams& p) {
  std::vector<double> flat;
  flat.reserve(kParamCount);
  for (const auto& l : p.layers) {
    flat.insert(flat.end(), l.w.begin(), l.w.end());
    flat.insert(flat.end(), l.b.begin(), l.b.end());
  }
  return flat;
}

inline NetworkParams unflatten(const std::vector<double>& flat) {
  if (flat.size() != kParamCount) throw ConfigError("parameter count mismatch");
  NetworkParams p = zeros();
  std::size_t at = 0;
  for (auto& l : p.layers) {
    for (auto& w : l.w) w = flat[at++];
    for (auto& b : l.b) b = flat[at++];
  }
  return p;
}

// Weights registered as tape leaves (tangent 0), in flat order.
struct TapeWeights {
  std::vector<std::vector<ad::Var>> w;  // per layer, row-major
  std::vector<std::vector<ad::Var>> b;
  std::vector<ad::Var> flat_order;      // matches flatten()
};

inline TapeWeights register_flat(ad::Tape& tape, const std::vector<double>& flat) {
  if (flat.size() != kParamCount) throw ConfigError("parameter count mismatch");
  TapeWeights tw;
  std::size_t at = 0;
  for (std::size_t k = 0; k + 1 < kWidths.size(); ++k) {
    std::size_t in = kWidths[k], out = kWidths[k + 1];
    std::vector<ad::Var> w, b;
    w.reserve(in * out);
    b.reserve(out);
    for (std::size_t i = 0; i < in * out; ++i) {
      w.push_back(tape.leaf(flat[at++], 0.0));
      tw.flat_order.push_back(w.back());
    }
    for (std::size_t i = 0; i < out; ++i) {
      b.push_back(tape.leaf(flat[at++], 0.0));
      tw.flat_order.push_back(b.back());
    }
    tw.w.push_back(std::move(w));
    tw.b.push_back(std::move(b));
  }
  return tw;
}

inline TapeWeights register_on(ad::Tape& tape, const NetworkParams& p) {
  return register_flat(tape, flatten(p));
}

struct NetOutput {
  std::array<ad::Var, 5> values;
  std::array<ad::Var, 5> time_derivatives;
};

// Forward pass from already-registered weights. `t` carries the tangent seed
// (1 for the time direction), so the outputs' tangent nodes are d/dt.
inline NetOutput forward(const TapeWeights& tw, ad::Var t) {
  std::vector<ad::Var> cur = {t};
  for (std::size_t k = 0; k < tw.w.size(); ++k) {
    std::size_t in = cur.size();
    std::size_t out = tw.b[k].size();
    std::vector<ad::Var> next;
    next.reserve(out);
    bool hidden = k + 1 < tw.w.size();
    for (std::size_t j = 0; j < out; ++j) {
      ad::Var acc = tw.w[k][j * in] * cur[0];
      for (std::size_t i = 1; i < in; ++i)
        acc = acc + tw.w[k][j * in + i] * cur[i];
      acc = acc + tw.b[k][j];
      next.push_back(hidden ? ad::tanh(acc) : acc);
    }
    cur = std::move(next);
  }
  NetOutput o{{cur[0], cur[1], cur[2], cur[3], cur[4]},
              {cur[0].tangent(), cur[1].tangent(), cur[2].tangent(),
               cur[3].tangent(), cur[4].tangent()}};
  return o;
}

inline NetOutput forward(const NetworkParams& p, double t, ad::Tape& tape) {
  TapeWeights tw = register_on(tape, p);
  return forward(tw, tape.leaf(t, 1.0));
}

// Plain double forward pass (no tape); used for prediction and sanity checks.
inline std::array<double, 5> forward_values(const NetworkParams& p, double t) {
  std::vector<double> cur = {t};
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    const Layer& l = p.layers[k];
    std::vector<double> next(l.out);
    bool hidden = k + 1 < p.layers.size();
    for (std::size_t j = 0; j < l.out; ++j) {
      double acc = l.b[j];
      for (std::size_t i = 0; i < l.in; ++i) acc += l.w[j * l.in + i] * cur[i];
      next[j] = hidden ? std::tanh(acc) : acc;
    }
    cur = std::move(next);
  }
  return {cur[0], cur[1], cur[2], cur[3], cur[4]};
}

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Snapshot format: widths and seed header, then one value per line in flat
// order. 17 significant digits round-trip doubles bit-exactly.
inline void save_snapshot(const std::string& path, const NetworkParams& p,
                          std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write snapshot: " + path);
  out << "widths";
  for (auto w : kWidths) out << ',' << w;
  out << "\nseed," << seed << "\ncount," << kParamCount << "\n";
  for (double v : flatten(p)) out << format_g17(v) << "\n";
}

struct Snapshot {
  NetworkParams params;
  std::uint64_t seed = 0;
};

inline Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read snapshot: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("snapshot truncated: " + path);
  std::string expected = "widths";
  for (auto w : kWidths) expected += ',' + std::to_string(w);
  if (line != expected) throw ConfigError("parameter count mismatch");
  Snapshot s;
  if (!std::getline(in, line) || line.rfind("seed,", 0) != 0)
    throw ConfigError("snapshot missing seed header: " + path);
  s.seed = std::stoull(line.substr(5));
  if (!std::getline(in, line) || line.rfind("count,", 0) != 0)
    throw ConfigError("snapshot missing count header: " + path);
  if (std::stoull(line.substr(6)) != kParamCount)
    throw ConfigError("parameter count mismatch");
  std::vector<double> flat;
  flat.reserve(kParamCount);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    flat.push_back(std::strtod(line.c_str(), nullptr));
  }
  s.params = unflatten(flat);
  return s;
}

}  // namespace svihr::mlp
