#include "ratchet/classical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "ratchet/rng.hpp"

namespace ratchet::classical {

Ensemble sample_initial(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw ConfigError("ensemble", "ensemble size must be >= 1");
  Ensemble e;
  e.seed = seed;
  e.states.resize(count);
  Rng rng(seed);
  for (auto& s : e.states) {
    s.x = kTwoPi * uniform01(rng);
    s.p = kTwoPi * uniform01(rng) - kPi;
    // Rounding can land exactly on the open end.
    if (s.x >= kTwoPi) s.x = 0.0;
    if (s.p >= kPi) s.p = -kPi;
  }
  return e;
}

namespace {

void evolve_range(std::span<State> states, const ModelParams& params, std::int64_t steps) {
  for (auto& s : states) {
    State cur = s;
    for (std::int64_t t = 0; t < steps; ++t) cur = map_step(cur, params);
    s = cur;
  }
}

}  // namespace

Ensemble evolve_ensemble(Ensemble e, const ModelParams& params, std::int64_t steps, unsigned workers) {
  if (steps < 0) throw std::invalid_argument("evolve_ensemble: steps must be >= 0");
  if (steps == 0 || e.states.empty()) return e;

  const std::size_t n = e.states.size();
  const std::size_t nw = std::clamp<std::size_t>(workers, 1, n);
  if (nw == 1) {
    evolve_range(e.states, params, steps);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(nw);
    const std::size_t chunk = (n + nw - 1) / nw;
    for (std::size_t w = 0; w < nw; ++w) {
      const std::size_t lo = w * chunk;
      if (lo >= n) break;
      const std::size_t len = std::min(chunk, n - lo);
      pool.emplace_back([&, lo, len] { evolve_range(std::span(e.states).subspan(lo, len), params, steps); });
    }
  }
  e.steps_done += steps;
  return e;
}

double classical_current(const Ensemble& e) {
  if (e.states.empty()) throw std::invalid_argument("classical_current: empty ensemble");
  double sum = 0.0;
  for (const auto& s : e.states) sum += s.p;
  return sum / static_cast<double>(e.states.size());
}

MomentumDistribution discretize_momentum(const Ensemble& e, int n_bins, double p_span) {
  if (n_bins < 2) throw ConfigError("dim", "momentum binning needs at least 2 cells");
  if (!(p_span > 0.0) || !std::isfinite(p_span)) throw ConfigError("p-span", "span must be positive");
  if (e.states.empty()) throw std::invalid_argument("discretize_momentum: empty ensemble");

  const double width = p_span / n_bins;
  const double lo = -0.5 * p_span;
  MomentumDistribution d;
  d.prob.assign(static_cast<std::size_t>(n_bins), 0.0);
  d.momentum.resize(static_cast<std::size_t>(n_bins));
  for (int i = 0; i < n_bins; ++i) d.momentum[static_cast<std::size_t>(i)] = lo + (i + 0.5) * width;

  std::size_t outside = 0;
  for (const auto& s : e.states) {
    const double cell = std::floor((s.p - lo) / width);
    long idx;
    if (!(cell >= 0.0)) {
      idx = 0;
      ++outside;
    } else if (cell >= n_bins) {
      idx = n_bins - 1;
      ++outside;
    } else {
      idx = static_cast<long>(cell);
    }
    d.prob[static_cast<std::size_t>(idx)] += 1.0;
  }
  const double total = static_cast<double>(e.states.size());
  for (auto& v : d.prob) v /= total;
  d.edge_mass = static_cast<double>(outside) / total;
  return d;
}

std::vector<State> period_one_points(std::span<const State> states, const ModelParams& params, double tol) {
  std::vector<State> fixed;
  for (const auto& s : states) {
    const State next = map_step(s, params);
    const double dx = std::remainder(next.x - s.x, kTwoPi);
    if (std::abs(dx) < tol && std::abs(next.p - s.p) < tol) fixed.push_back(s);
  }
  return fixed;
}

}  // namespace ratchet::classical
