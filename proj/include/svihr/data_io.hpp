#pragma once

// Weekly compartment series: CSV ingestion, unit-interval normalization with
// recorded scale factors, train/validation splitting, and the validation
// metric on the infected compartment.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "svihr/errors.hpp"

namespace svihr::data {

inline constexpr std::array<const char*, 5> kColumns = {"S", "V", "I", "H", "R"};
inline constexpr int kCompartments = 5;

struct RawSeries {
  std::vector<int> weeks;                       // consecutive integers
  std::vector<std::array<double, 5>> values;    // S,V,I,H,R counts per week

  std::size_t size() const { return weeks.size(); }
};

struct SplitSpec {
  int train_lo = 0;
  int train_hi = 0;     // last training week
  int validate_hi = 0;  // last week of the prediction window (>= train_hi)
};

inline void validate(const SplitSpec& s) {
  if (s.train_hi <= s.train_lo) throw ConfigError("empty training window");
  if (s.validate_hi < s.train_hi)
    throw ConfigError("validation window precedes training window");
}

// Times and values on [0,1]; values*scales reproduces the raw table exactly.
// The time axis spans the full considered horizon (training plus prediction
// weeks), so extrapolation inputs stay inside [0,1].
struct NormalizedSeries {
  std::vector<double> times;
  std::vector<std::array<double, 5>> values;
  std::array<double, 5> scales = {1, 1, 1, 1, 1};
  double horizon_weeks = 1;
  int week_start = 0;
  std::size_t train_count = 0;  // leading rows inside the training window

  std::size_t size() const { return times.size(); }
  double time_of_week(double week) const {
    return (week - week_start) / horizon_weeks;
  }
};

inline std::string format_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline RawSeries load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty data file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "week,S,V,I,H,R")
    throw ConfigError("expected header week,S,V,I,H,R in " + path);

  RawSeries raw;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6)
      throw ConfigError("row " + std::to_string(row) + ": expected 6 columns");
    char* end = nullptr;
    long week = std::strtol(cells[0].c_str(), &end, 10);
    if (end == cells[0].c_str() || *end != '\0')
      throw ConfigError("row " + std::to_string(row) + ": bad week index");
    if (!raw.weeks.empty() && week != raw.weeks.back() + 1)
      throw ConfigError("gap at row " + std::to_string(row));
    std::array<double, 5> vals{};
    for (int k = 0; k < 5; ++k) {
      const std::string& c = cells[k + 1];
      double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0' || !std::isfinite(v))
        throw ConfigError("row " + std::to_string(row) + ": non-numeric " +
                          std::string(kColumns[k]) + " value");
      if (v < 0)
        throw ConfigError("row " + std::to_string(row) + ": negative value");
      vals[k] = v;
    }
    raw.weeks.push_back(static_cast<int>(week));
    raw.values.push_back(vals);
  }
  return raw;
}

inline void save_csv(const std::string& path, const RawSeries& raw) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write data file: " + path);
  out << "week,S,V,I,H,R\n";
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out << raw.weeks[i];
    for (int k = 0; k < 5; ++k) out << ',' << format_cell(raw.values[i][k]);
    out << '\n';
  }
}

// Column maxima are taken over the training window only, so later validation
// peaks may exceed 1.
inline NormalizedSeries normalize(const RawSeries& raw, const SplitSpec& split) {
  validate(split);
  if (raw.size() == 0) throw ConfigError("empty series");
  if (split.train_lo < raw.weeks.front() || split.validate_hi > raw.weeks.back())
    throw ConfigError("split window outside the data range");

  NormalizedSeries out;
  out.week_start = split.train_lo;
  out.horizon_weeks = static_cast<double>(split.validate_hi - split.train_lo);
  if (out.horizon_weeks <= 0) out.horizon_weeks = 1;  // single-week edge

  std::array<double, 5> maxima{};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.weeks[i] < split.train_lo || raw.weeks[i] > split.train_hi) continue;
    for (int k = 0; k < 5; ++k)
      maxima[k] = std::max(maxima[k], raw.values[i][k]);
  }
  for (int k = 0; k < 5; ++k) {
    if (maxima[k] <= 0)
      throw ConfigError(std::string("degenerate compartment ") + kColumns[k]);
    out.scales[k] = maxima[k];
  }

  for (std::size_t i = 0; i < raw.size(); ++i) {
    int w = raw.weeks[i];
    if (w < split.train_lo || w > split.validate_hi) continue;
    out.times.push_back(out.time_of_week(w));
    std::array<double, 5> row;
    for (int k = 0; k < 5; ++k) row[k] = raw.values[i][k] / out.scales[k];
    out.values.push_back(row);
    if (w <= split.train_hi) ++out.train_count;
  }
  return out;
}

// Multiplicative noise (1 + noise_rel*u), u uniform in [-1,1], clipped at 0.
inline RawSeries perturb(const RawSeries& clean, double noise_rel,
                         std::uint64_t seed) {
  if (noise_rel < 0) throw ConfigError("noise_rel must be nonnegative");
  RawSeries out = clean;
  if (noise_rel == 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& row : out.values)
    for (auto& v : row) v = std::max(0.0, v * (1.0 + noise_rel * u(rng)));
  return out;
}

// Mean squared error on the infected compartment over the full considered
// window, in normalized units.
inline double mse_val(const std::vector<double>& predicted_i,
                      const std::vector<double>& observed_i) {
  if (predicted_i.size() != observed_i.size())
    throw ConfigError("mse_val: length mismatch");
  if (predicted_i.empty()) throw ConfigError("mse_val: empty series");
  double acc = 0;
  for (std::size_t i = 0; i < predicted_i.size(); ++i) {
    double d = predicted_i[i] - observed_i[i];
    acc += d * d;
  }
  return acc / static_cast<double>(predicted_i.size());
}

}  // namespace svihr::data
