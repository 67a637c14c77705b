#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ratchet/distribution.hpp"
#include "ratchet/model.hpp"
#include "ratchet/rng.hpp"

namespace ratchet::quantum {

using cplx = std::complex<double>;

/// Truncated integer-momentum basis n = -(N-1)/2 ... (N-1)/2 and the dual
/// position grid x_j = 2 pi j / N. Storage index i maps to n = i - max_n().
class HilbertSpec {
 public:
  int dim() const noexcept { return dim_; }
  double tau() const noexcept { return tau_; }
  int max_n() const noexcept { return (dim_ - 1) / 2; }
  int n_at(std::size_t i) const noexcept { return static_cast<int>(i) - max_n(); }
  std::size_t index_of(int n) const noexcept { return static_cast<std::size_t>(n + max_n()); }
  double momentum_at(std::size_t i) const noexcept { return tau_ * n_at(i); }
  double position_at(std::size_t j) const noexcept;
  /// Largest covered |p| = tau (N-1)/2.
  double p_max() const noexcept { return tau_ * max_n(); }

  friend bool operator==(const HilbertSpec&, const HilbertSpec&) = default;

 private:
  friend HilbertSpec build_space(int dim, double tau);
  HilbertSpec(int dim, double tau) : dim_(dim), tau_(tau) {}
  int dim_;
  double tau_;
};

/// Throws ConfigError for even or too small N, or non-positive tau.
HilbertSpec build_space(int dim, double tau);

/// Basis size keeping the covered span N tau close to the tau = 0.137,
/// N = 3^6 reference; the three reference tau values map to 243, 729, 1459.
int default_dimension(double tau);

/// Pure state over the momentum basis.
class QuantumState {
 public:
  explicit QuantumState(std::vector<cplx> amplitudes) : amp_(std::move(amplitudes)) {}
  static QuantumState basis(const HilbertSpec& spec, int n);

  std::span<const cplx> amplitudes() const noexcept { return amp_; }
  std::span<cplx> amplitudes() noexcept { return amp_; }
  std::size_t dim() const noexcept { return amp_.size(); }
  cplx operator[](std::size_t i) const noexcept { return amp_[i]; }

  double norm_squared() const noexcept;
  /// Rescales to unit norm. Throws std::domain_error on a zero vector.
  void normalize();

 private:
  std::vector<cplx> amp_;
};

/// Momentum indices n with tau n in [-pi, pi).
std::vector<int> initial_support(const HilbertSpec& spec);

/// Momentum eigenstate |n0>, n0 uniform over `initial_support`.
QuantumState sample_initial_state(const HilbertSpec& spec, Rng& rng);
QuantumState sample_initial_state(const HilbertSpec& spec, std::uint64_t seed);

/// Unitary kick exp(-i (K/tau) [cos x + (a/2) cos(2x + phi)]) applied on the
/// position grid through a DFT pair. Holds precomputed phases; `apply` may be
/// called concurrently on distinct states.
class KickOperator {
 public:
  KickOperator(const ModelParams& params, const HilbertSpec& spec);
  ~KickOperator();
  KickOperator(KickOperator&&) noexcept;
  KickOperator& operator=(KickOperator&&) noexcept;

  void apply(std::span<cplx> amplitudes) const;

 private:
  struct Plan;
  std::shared_ptr<const Plan> plan_;
  std::vector<cplx> phase_;
};

QuantumState apply_kick(QuantumState s, const ModelParams& params, const HilbertSpec& spec);

/// Jump rate coefficient g = sqrt(-ln gamma).
double jump_coupling(double gamma);

/// Solves sum_n |c_n|^2 exp(-g^2 |n| s) = r for the waiting time s of the next
/// jump. Returns nullopt when s would reach `horizon` (or never, for dark
/// states and g = 0).
std::optional<double> jump_waiting_time(const QuantumState& s, double g, double horizon, double r);

/// Same root solve on precomputed weights w_k = |c_k|^2 + |c_-k|^2, k = 0..M.
std::optional<double> waiting_time_from_weights(std::span<const double> weights_by_abs_n, double g2,
                                                double horizon, double r);

enum class JumpChannel { Lower, Raise };

/// L1 lowers n >= 1 towards 0, L2 raises n <= -1 towards 0; a channel is chosen
/// with probability proportional to its rate. Renormalizes. Throws
/// std::domain_error if both rates vanish.
JumpChannel apply_jump(QuantumState& s, Rng& rng);

/// Unit-duration dissipative flight: the no-jump decay c_n -> c_n exp(-g^2 |n| s / 2)
/// interrupted by stochastic jumps at exact waiting times. The generator has
/// no Hamiltonian part; the free rotation is a separate exact step. Throws
/// ConfigError for gamma = 0.
QuantumState dissipative_flight(QuantumState s, const ModelParams& params, const HilbertSpec& spec, Rng& rng);

/// Free rotation c_n -> c_n exp(-i tau n^2 / 2) over one kick period.
QuantumState free_rotation(QuantumState s, const HilbertSpec& spec);

/// Reusable single-trajectory integrator for one (params, spec) pair. Not
/// thread-safe; build one per worker.
///
/// A period is flight, kick, rotation. In Heisenberg form this is
/// n -> gamma n, n -> n + k F(x), x -> x + tau n: the classical map step by
/// step, so the measured momentum corresponds to the map's output momentum.
class Propagator {
 public:
  Propagator(const ModelParams& params, const HilbertSpec& spec);

  void kick(QuantumState& s) const;
  void flight(QuantumState& s, Rng& rng);
  void rotate(QuantumState& s) const;
  /// `periods` repetitions of flight, kick, rotation.
  void evolve(QuantumState& s, int periods, Rng& rng);
  void period(QuantumState& s, Rng& rng);

  const HilbertSpec& spec() const noexcept { return spec_; }
  const ModelParams& params() const noexcept { return params_; }
  std::int64_t jumps() const noexcept { return jumps_; }

 private:
  void damp(std::span<cplx> amp, double duration) const;

  ModelParams params_;
  HilbertSpec spec_;
  KickOperator kick_;
  double g2_;
  std::vector<cplx> rotation_;  // by |n|
  std::vector<double> weights_;
  std::int64_t jumps_ = 0;
};

QuantumState evolve_trajectory(QuantumState s, const ModelParams& params, const HilbertSpec& spec, int periods,
                               Rng& rng);

/// Fraction of the outer 10% of cells (5% on each side) where truncation bites.
double outer_band_mass(std::span<const cplx> amplitudes);
double outer_band_mass_prob(std::span<const double> prob);

inline constexpr double kTruncationSuspect = 1e-2;

/// Monte Carlo estimate of diag(rho) from independent trajectories.
struct TrajectoryBatch {
  std::int64_t count = 0;
  std::uint64_t seed = 0;
  int periods = 0;
  /// sum over trajectories of |c_n|^2 and of |c_n|^4, fixed trajectory order.
  std::vector<double> diag_sum;
  std::vector<double> diag_sq_sum;
  /// sum of per-trajectory <p> and <p>^2.
  double current_sum = 0.0;
  double current_sq_sum = 0.0;
  /// Largest batch-mean outer-band mass over all periods.
  double edge_mass = 0.0;
  std::int64_t jumps = 0;

  bool truncation_suspect() const noexcept { return edge_mass > kTruncationSuspect; }
  /// Standard error of the batch-mean current.
  double current_stderr() const noexcept;
  /// Standard error of each diagonal cell estimate.
  std::vector<double> diag_stderr() const;
};

/// Seed of trajectory `index` within a batch.
inline std::uint64_t trajectory_seed(std::uint64_t batch_seed, std::int64_t index) {
  return derive_seed(batch_seed, static_cast<std::uint64_t>(index));
}

/// Trajectories are reduced in fixed blocks, so the result is bit-identical
/// for any worker count.
TrajectoryBatch run_batch(const ModelParams& params, const HilbertSpec& spec, int periods, std::int64_t count,
                          std::uint64_t seed, unsigned workers = 1);

MomentumDistribution batch_distribution(const TrajectoryBatch& b, const HilbertSpec& spec);

/// J_q = sum_i tau n_i P_i.
double quantum_current(const MomentumDistribution& d, const HilbertSpec& spec);

}  // namespace ratchet::quantum
