#pragma once

#include <vector>

namespace ratchet {

/// Normalized probability over momentum cells, with the cell-centre momenta.
struct MomentumDistribution {
  std::vector<double> prob;
  std::vector<double> momentum;
  /// Fraction of raw mass that fell outside the covered span and was folded
  /// into the edge cells (classical binning), or the outer-band mass
  /// (quantum truncation diagnostic).
  double edge_mass = 0.0;

  std::size_t size() const noexcept { return prob.size(); }
};

}  // namespace ratchet
