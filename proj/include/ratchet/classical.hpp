#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ratchet/distribution.hpp"
#include "ratchet/model.hpp"

namespace ratchet::classical {

/// Point of the rescaled map: x is unbounded, p = tau * n.
struct State {
  double x = 0.0;
  double p = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

struct Ensemble {
  std::vector<State> states;
  std::uint64_t seed = 0;
  std::int64_t steps_done = 0;
};

/// x uniform on [0, 2pi), p uniform on [-pi, pi). Throws ConfigError if count == 0.
Ensemble sample_initial(std::size_t count, std::uint64_t seed);

/// One iteration: p' = gamma p + F(x), x' = x + p'. Depends on (K, gamma) only.
inline State map_step(State s, const ModelParams& params) {
  const double p_next = params.gamma() * s.p + kick_force(s.x, params);
  return {s.x + p_next, p_next};
}

/// Advances every state `steps` iterations. States are split into contiguous
/// chunks across `workers` threads; results do not depend on the split.
Ensemble evolve_ensemble(Ensemble e, const ModelParams& params, std::int64_t steps, unsigned workers = 1);

/// Mean momentum J_c. Throws std::invalid_argument on an empty ensemble.
double classical_current(const Ensemble& e);

/// Histogram of p over n_bins equal cells covering [-span/2, span/2).
/// Out-of-span mass goes to the edge cells and is reported in `edge_mass`.
MomentumDistribution discretize_momentum(const Ensemble& e, int n_bins, double p_span);

/// Above this folded fraction a binning is considered misconfigured.
inline constexpr double kOutOfSpanWarning = 1e-3;

/// States that return to themselves (x mod 2pi, p) after one more map step
/// within `tol`.
std::vector<State> period_one_points(std::span<const State> states, const ModelParams& params,
                                     double tol = 1e-9);

}  // namespace ratchet::classical
