#pragma once

// Dominance filtering, weighted-sum geometry, and the bisection-enhanced
// dichotomic search (BEDS) that drives repeated training runs to approximate
// the Pareto front between residual loss and data loss.
//
// Outcome vectors are stored as (mse_f, mse_u) = (residual, data); sorting
// the front by data loss ascending makes residual loss strictly descending.
// The dichotomy weight alpha applies to the data loss, 1-alpha to the
// residual loss, so (alpha, 1-alpha) in (mse_u, mse_f) coordinates is normal
// to the segment between two adjacent front points.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svihr/errors.hpp"

namespace svihr::pareto {

struct OutcomePoint {
  OutcomePoint() = default;  // not an aggregate: keeps {a,b} a plain pair
  double alpha = 0;
  double mse_f = 0;  // residual loss
  double mse_u = 0;  // data loss
  std::string run_id;
  int level = 0;
};

// a dominates b: componentwise <= with at least one strict inequality.
inline bool dominates(const std::pair<double, double>& a,
                      const std::pair<double, double>& b) {
  if (!std::isfinite(a.first) || !std::isfinite(a.second) ||
      !std::isfinite(b.first) || !std::isfinite(b.second))
    throw NumericError("dominance on non-finite outcome");
  return a.first <= b.first && a.second <= b.second &&
         (a.first < b.first || a.second < b.second);
}

inline bool dominates(const OutcomePoint& a, const OutcomePoint& b) {
  return dominates({a.mse_f, a.mse_u}, {b.mse_f, b.mse_u});
}

// Maximal mutually nondominated subset, sorted by data loss then residual.
inline std::vector<OutcomePoint> filter_nondominated(
    std::vector<OutcomePoint> points) {
  std::vector<OutcomePoint> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j)
      if (j != i && dominates(points[j], points[i])) dominated = true;
    if (!dominated) kept.push_back(points[i]);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const OutcomePoint& a, const OutcomePoint& b) {
                     if (a.mse_u != b.mse_u) return a.mse_u < b.mse_u;
                     return a.mse_f < b.mse_f;
                   });
  return kept;
}

// Weight whose (alpha, 1-alpha) direction is orthogonal to the segment
// between two adjacent nondominated points; `prev` has the smaller data loss.
inline double next_alpha(const OutcomePoint& prev, const OutcomePoint& next) {
  double drop = prev.mse_f - next.mse_f;  // residual improvement
  double rise = next.mse_u - prev.mse_u;  // data-loss cost
  if (drop == 0 && rise == 0) throw NumericError("duplicate outcomes");
  if (drop < 0 || rise < 0)
    throw std::logic_error("next_alpha requires a sorted nondominated pair");
  return drop / (rise + drop);
}

inline double bisection_fallback(double alpha_a, double alpha_b) {
  if (alpha_a == alpha_b) throw NumericError("exhausted interval");
  return 0.5 * (alpha_a + alpha_b);
}

struct BedsConfig {
  int levels = 4;
  double alpha1 = 0.9;
  double alpha2 = 0.999;
  // Dichotomy weights outside (fail_lo, fail_hi) are treated as failed and
  // replaced by bisecting the parent interval.
  double fail_lo = 0.8;
  double fail_hi = 0.998;
};

inline void validate(const BedsConfig& c) {
  if (c.levels < 1) throw ConfigError("levels must be at least 1");
  if (!(0 < c.alpha1 && c.alpha1 < c.alpha2 && c.alpha2 <= 1))
    throw ConfigError("need 0 < alpha1 < alpha2 <= 1");
  if (!(c.fail_lo < c.fail_hi)) throw ConfigError("need fail_lo < fail_hi");
}

struct FrontApprox {
  std::vector<OutcomePoint> candidates;  // mutually nondominated
  std::vector<double> evaluated_alphas;  // sorted, deduplicated
  int level = 0;
};

// Log of one generated weight: where it came from and whether the dichotomy
// weight had to be replaced by bisection.
struct AlphaRecord {
  double alpha = 0;
  int level = 0;  // level whose front generated it
  bool from_bisection = false;
  double parent_alpha_lo = 0, parent_alpha_hi = 0;
  double dichotomy_alpha = 0;   // raw weight before any guard replacement
  double ortho_residual = 0;    // |(alpha,1-alpha) . (dy_u, dy_f)|
};

struct BedsResult {
  FrontApprox front;
  std::vector<OutcomePoint> all_outcomes;  // every successful run
  std::vector<AlphaRecord> generated;
  std::vector<double> failed_alphas;       // diverged training runs
};

// Bisection-enhanced dichotomic search. Level 1 trains the two endpoint
// weights; while the level count is not exhausted, every adjacent pair of
// nondominated outcomes generates one new weight (dichotomy or, when the
// guard interval is violated, bisection of the parent alphas). Results are
// cached per alpha; duplicates are never retrained. A trainer failure marks
// the alpha failed and refills the slot once by bisecting its parents.
inline BedsResult beds_run(
    const BedsConfig& config,
    const std::function<OutcomePoint(double alpha)>& trainer) {
  validate(config);

  struct Pending {
    double alpha;
    std::optional<std::pair<double, double>> parents;
  };

  BedsResult result;
  std::map<double, OutcomePoint> cache;
  std::vector<double> failed;
  std::vector<Pending> pending = {{config.alpha1, std::nullopt},
                                  {config.alpha2, std::nullopt}};

  auto known = [&](double a) {
    if (cache.count(a) || std::count(failed.begin(), failed.end(), a))
      return true;
    for (const auto& [k, v] : cache)
      if (std::abs(k - a) < 1e-12) return true;
    for (double f : failed)
      if (std::abs(f - a) < 1e-12) return true;
    return false;
  };

  auto run_one = [&](double alpha, int level) -> bool {
    try {
      OutcomePoint y = trainer(alpha);
      y.alpha = alpha;
      y.level = level;
      if (y.run_id.empty())
        y.run_id = "run-" + std::to_string(result.all_outcomes.size() + 1);
      cache[alpha] = y;
      result.all_outcomes.push_back(y);
      return true;
    } catch (const NumericError&) {
      failed.push_back(alpha);
      result.failed_alphas.push_back(alpha);
      return false;
    }
  };

  int final_level = 0;
  for (int level = 1; level <= config.levels; ++level) {
    final_level = level;
    for (const Pending& item : pending) {
      if (known(item.alpha)) continue;
      if (run_one(item.alpha, level)) continue;
      // One refill by bisecting the parent interval; endpoints have none.
      if (!item.parents) continue;
      double retry = bisection_fallback(item.parents->first, item.parents->second);
      if (!known(retry)) run_one(retry, level);
    }
    pending.clear();

    std::vector<OutcomePoint> cand;
    for (const auto& [a, y] : cache) cand.push_back(y);
    if (cand.empty()) throw NumericError("no successful training runs");
    auto front = filter_nondominated(cand);

    if (level == config.levels) break;
    for (std::size_t i = 1; i < front.size(); ++i) {
      const OutcomePoint& prev = front[i - 1];
      const OutcomePoint& next = front[i];
      double raw;
      try {
        raw = next_alpha(prev, next);
      } catch (const NumericError&) {
        continue;  // duplicate outcomes span no interval
      }
      AlphaRecord rec;
      rec.level = level;
      rec.parent_alpha_lo = std::min(prev.alpha, next.alpha);
      rec.parent_alpha_hi = std::max(prev.alpha, next.alpha);
      rec.dichotomy_alpha = raw;
      rec.ortho_residual = std::abs(raw * (next.mse_u - prev.mse_u) +
                                    (1 - raw) * (next.mse_f - prev.mse_f));
      double chosen = raw;
      if (raw > config.fail_hi || raw < config.fail_lo) {
        chosen = bisection_fallback(rec.parent_alpha_lo, rec.parent_alpha_hi);
        rec.from_bisection = true;
      }
      rec.alpha = chosen;
      if (known(chosen)) continue;
      bool queued = false;
      for (const auto& p : pending)
        if (std::abs(p.alpha - chosen) < 1e-12) queued = true;
      if (queued) continue;
      result.generated.push_back(rec);
      pending.push_back(
          {chosen, std::make_pair(rec.parent_alpha_lo, rec.parent_alpha_hi)});
    }
    if (pending.empty()) break;  // no new subproblems
  }

  std::vector<OutcomePoint> cand;
  for (const auto& [a, y] : cache) cand.push_back(y);
  if (cand.empty()) throw NumericError("no successful training runs");
  result.front.candidates = filter_nondominated(cand);
  result.front.level = final_level;
  for (const auto& [a, y] : cache) result.front.evaluated_alphas.push_back(a);
  std::sort(result.front.evaluated_alphas.begin(),
            result.front.evaluated_alphas.end());
  return result;
}

}  // namespace svihr::pareto
