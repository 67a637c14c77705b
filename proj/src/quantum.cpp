#include "ratchet/quantum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace ratchet::quantum {

// ---------------------------------------------------------------------------
// Basis

double HilbertSpec::position_at(std::size_t j) const noexcept {
  return kTwoPi * static_cast<double>(j) / static_cast<double>(dim_);
}

HilbertSpec build_space(int dim, double tau) {
  if (dim < 3) throw ConfigError("dim", "basis dimension must be >= 3, got " + std::to_string(dim));
  if (dim % 2 == 0)
    throw ConfigError("dim", "basis dimension must be odd for a symmetric momentum ladder, got " +
                                 std::to_string(dim));
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau", "effective Planck constant must be > 0");
  return HilbertSpec(dim, tau);
}

int default_dimension(double tau) {
  if (!(tau > 0.0)) throw ConfigError("tau", "effective Planck constant must be > 0");
  struct Entry {
    double tau;
    int dim;
  };
  static constexpr Entry reference[] = {{0.411, 243}, {0.137, 729}, {0.068, 1459}};
  for (const auto& e : reference)
    if (std::abs(tau - e.tau) < 1e-12) return e.dim;
  const double span = 729 * 0.137;
  int n = static_cast<int>(std::lround(span / tau));
  if (n % 2 == 0) n += (span / tau > n) ? 1 : -1;
  return std::max(n, 3);
}

// ---------------------------------------------------------------------------
// States

QuantumState QuantumState::basis(const HilbertSpec& spec, int n) {
  if (std::abs(n) > spec.max_n()) throw std::out_of_range("basis state outside truncated ladder");
  std::vector<cplx> amp(static_cast<std::size_t>(spec.dim()));
  amp[spec.index_of(n)] = 1.0;
  return QuantumState(std::move(amp));
}

double QuantumState::norm_squared() const noexcept {
  double s = 0.0;
  for (const auto& c : amp_) s += std::norm(c);
  return s;
}

void QuantumState::normalize() {
  const double n2 = norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw std::domain_error("cannot normalize a zero or non-finite state");
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& c : amp_) c *= inv;
}

std::vector<int> initial_support(const HilbertSpec& spec) {
  std::vector<int> support;
  for (int n = -spec.max_n(); n <= spec.max_n(); ++n) {
    const double p = spec.tau() * n;
    if (p >= -kPi && p < kPi) support.push_back(n);
  }
  return support;
}

QuantumState sample_initial_state(const HilbertSpec& spec, Rng& rng) {
  const auto support = initial_support(spec);
  const int n0 = support[uniform_index(rng, support.size())];
  return QuantumState::basis(spec, n0);
}

QuantumState sample_initial_state(const HilbertSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return sample_initial_state(spec, rng);
}

// ---------------------------------------------------------------------------
// Kick

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

// FFTW's planner is not thread-safe; plan creation and destruction go through
// one mutex, execution through the new-array interface is.
struct KickOperator::Plan {
  int n = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Plan(int size) : n(size) {
    std::lock_guard lock(planner_mutex());
    auto* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    forward = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!forward || !backward) throw std::runtime_error("FFTW planning failed");
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  static std::shared_ptr<const Plan> get(int size) {
    static std::mutex cache_mutex;
    static std::map<int, std::weak_ptr<const Plan>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[size];
    if (auto p = slot.lock()) return p;
    auto p = std::make_shared<const Plan>(size);
    slot = p;
    return p;
  }
};

KickOperator::KickOperator(const ModelParams& params, const HilbertSpec& spec)
    : plan_(Plan::get(spec.dim())), phase_(static_cast<std::size_t>(spec.dim())) {
  const double inv_n = 1.0 / spec.dim();
  for (std::size_t j = 0; j < phase_.size(); ++j) {
    const double v = potential(spec.position_at(j), params) / params.tau();
    phase_[j] = std::polar(inv_n, -v);
  }
}

KickOperator::~KickOperator() = default;
KickOperator::KickOperator(KickOperator&&) noexcept = default;
KickOperator& KickOperator::operator=(KickOperator&&) noexcept = default;

// Storage index i = n + M. The backward transform of c_i is e^{+iMx_j} times
// the position amplitude; that factor cancels in the forward transform, so the
// index offset needs no explicit shift.
void KickOperator::apply(std::span<cplx> amplitudes) const {
  if (amplitudes.size() != phase_.size()) throw std::invalid_argument("kick: dimension mismatch");
  auto* data = reinterpret_cast<fftw_complex*>(amplitudes.data());
  fftw_execute_dft(plan_->backward, data, data);
  for (std::size_t j = 0; j < phase_.size(); ++j) amplitudes[j] *= phase_[j];
  fftw_execute_dft(plan_->forward, data, data);
}

QuantumState apply_kick(QuantumState s, const ModelParams& params, const HilbertSpec& spec) {
  KickOperator(params, spec).apply(s.amplitudes());
  return s;
}

// ---------------------------------------------------------------------------
// Jumps

double jump_coupling(double gamma) {
  if (!(gamma > 0.0) || gamma > 1.0)
    throw ConfigError("gamma", "jump coupling needs 0 < gamma <= 1 (gamma = 0 is the unsupported overdamped limit)");
  return std::sqrt(-std::log(gamma));
}

namespace {

void fill_weights(std::span<const cplx> amp, std::vector<double>& w) {
  const std::size_t m = (amp.size() - 1) / 2;
  w.assign(m + 1, 0.0);
  w[0] = std::norm(amp[m]);
  for (std::size_t k = 1; k <= m; ++k) w[k] = std::norm(amp[m + k]) + std::norm(amp[m - k]);
}

}  // namespace

// Survival S(s) = sum_k w_k z^k with z = exp(-g^2 s): one exp per evaluation,
// the rest is Horner. S is convex and decreasing in s, and by Jensen
// S(s) >= exp(-g^2 kbar s), so the guess -ln r / (g^2 kbar) lies left of the
// root and Newton then converges monotonically. Bisection guards the rest.
std::optional<double> waiting_time_from_weights(std::span<const double> w, double g2, double horizon, double r) {
  if (!(g2 > 0.0) || w.size() < 2) return std::nullopt;
  std::size_t top = w.size() - 1;
  while (top > 0 && w[top] == 0.0) --top;
  if (top == 0) return std::nullopt;

  double total = 0.0;
  double kbar = 0.0;
  for (std::size_t k = 0; k <= top; ++k) {
    total += w[k];
    kbar += static_cast<double>(k) * w[k];
  }
  const double target = r * total;
  kbar /= total;

  auto eval = [&](double s, double& deriv) {
    const double z = std::exp(-g2 * s);
    double val = w[top];
    double dk = static_cast<double>(top) * w[top];
    for (std::size_t k = top; k-- > 0;) {
      val = val * z + w[k];
      dk = dk * z + static_cast<double>(k) * w[k];
    }
    deriv = -g2 * dk;
    return val - target;
  };

  double deriv = 0.0;
  if (eval(horizon, deriv) >= 0.0) return std::nullopt;

  double lo = 0.0;
  double hi = horizon;
  double s = std::clamp(-std::log(r) / (g2 * kbar), 0.0, horizon);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = eval(s, deriv);
    if (f > 0.0)
      lo = s;
    else
      hi = s;
    if (f == 0.0) break;
    double next = (deriv != 0.0) ? s - f / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - s);
    s = next;
    if (step <= 1e-14 * s || hi - lo <= 1e-15 * hi) break;
  }
  return s < horizon ? std::optional<double>(s) : std::nullopt;
}

std::optional<double> jump_waiting_time(const QuantumState& s, double g, double horizon, double r) {
  if (!(horizon > 0.0) || horizon > 1.0) throw std::invalid_argument("jump_waiting_time: horizon must be in (0, 1]");
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("jump_waiting_time: r must be in (0, 1)");
  std::vector<double> w;
  fill_weights(s.amplitudes(), w);
  return waiting_time_from_weights(w, g * g, horizon, r);
}

JumpChannel apply_jump(QuantumState& s, Rng& rng) {
  auto amp = s.amplitudes();
  const std::size_t m = (amp.size() - 1) / 2;
  double w_lower = 0.0;
  double w_raise = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    w_lower += static_cast<double>(k) * std::norm(amp[m + k]);
    w_raise += static_cast<double>(k) * std::norm(amp[m - k]);
  }
  const double total = w_lower + w_raise;
  if (!(total > 0.0)) throw std::domain_error("apply_jump: zero jump rate (dark state)");

  const JumpChannel ch = (uniform01(rng) * total < w_lower) ? JumpChannel::Lower : JumpChannel::Raise;
  if (ch == JumpChannel::Lower) {
    // |k> -> sqrt(k) |k-1> for k >= 1; negative side annihilated.
    for (std::size_t k = 0; k < m; ++k) amp[m + k] = std::sqrt(static_cast<double>(k + 1)) * amp[m + k + 1];
    amp[2 * m] = 0.0;
    for (std::size_t k = 1; k <= m; ++k) amp[m - k] = 0.0;
  } else {
    for (std::size_t k = 0; k < m; ++k) amp[m - k] = std::sqrt(static_cast<double>(k + 1)) * amp[m - k - 1];
    amp[0] = 0.0;
    for (std::size_t k = 1; k <= m; ++k) amp[m + k] = 0.0;
  }
  s.normalize();
  return ch;
}

// ---------------------------------------------------------------------------
// Propagation

Propagator::Propagator(const ModelParams& params, const HilbertSpec& spec)
    : params_(params), spec_(spec), kick_(params, spec), g2_(0.0) {
  if (!(params.gamma() > 0.0)) throw ConfigError("gamma", "gamma = 0 (overdamped limit) is not supported");
  g2_ = std::max(0.0, -std::log(params.gamma()));  // -log(1) may be -0
  rotation_.resize(static_cast<std::size_t>(spec.max_n()) + 1);
  for (std::size_t k = 0; k < rotation_.size(); ++k) {
    const double kd = static_cast<double>(k);
    rotation_[k] = std::polar(1.0, -0.5 * spec.tau() * kd * kd);
  }
}

void Propagator::kick(QuantumState& s) const { kick_.apply(s.amplitudes()); }

void Propagator::rotate(QuantumState& s) const {
  auto amp = s.amplitudes();
  const std::size_t m = rotation_.size() - 1;
  amp[m] *= rotation_[0];
  for (std::size_t k = 1; k <= m; ++k) {
    amp[m + k] *= rotation_[k];
    amp[m - k] *= rotation_[k];
  }
}

// c_{+-k} *= exp(-g^2 k d / 2), by repeated multiplication re-anchored every
// 64 cells.
void Propagator::damp(std::span<cplx> amp, double d) const {
  if (g2_ == 0.0) return;
  const std::size_t m = (amp.size() - 1) / 2;
  const double ratio = std::exp(-0.5 * g2_ * d);
  double f = 1.0;
  for (std::size_t k = 0; k <= m; ++k) {
    if (k % 64 == 0) f = std::exp(-0.5 * g2_ * d * static_cast<double>(k));
    amp[m + k] *= f;
    if (k > 0) amp[m - k] *= f;
    f *= ratio;
  }
}

void Propagator::flight(QuantumState& s, Rng& rng) {
  double remaining = 1.0;
  while (true) {
    fill_weights(s.amplitudes(), weights_);
    const double r = uniform_open01(rng);
    const auto wait = waiting_time_from_weights(weights_, g2_, remaining, r);
    if (!wait) {
      damp(s.amplitudes(), remaining);
      s.normalize();
      return;
    }
    damp(s.amplitudes(), *wait);
    apply_jump(s, rng);
    ++jumps_;
    remaining -= *wait;
  }
}

void Propagator::period(QuantumState& s, Rng& rng) {
  flight(s, rng);
  kick(s);
  rotate(s);
}

void Propagator::evolve(QuantumState& s, int periods, Rng& rng) {
  if (periods < 0) throw std::invalid_argument("evolve: periods must be >= 0");
  for (int t = 0; t < periods; ++t) period(s, rng);
}

QuantumState dissipative_flight(QuantumState s, const ModelParams& params, const HilbertSpec& spec, Rng& rng) {
  Propagator prop(params, spec);
  prop.flight(s, rng);
  return s;
}

QuantumState free_rotation(QuantumState s, const HilbertSpec& spec) {
  if (s.dim() != static_cast<std::size_t>(spec.dim())) throw std::invalid_argument("free_rotation: dimension mismatch");
  const int m = spec.max_n();
  for (int n = -m; n <= m; ++n) s.amplitudes()[spec.index_of(n)] *= std::polar(1.0, -0.5 * spec.tau() * n * n);
  return s;
}

QuantumState evolve_trajectory(QuantumState s, const ModelParams& params, const HilbertSpec& spec, int periods,
                               Rng& rng) {
  Propagator prop(params, spec);
  prop.evolve(s, periods, rng);
  return s;
}

// ---------------------------------------------------------------------------
// Batches

namespace {

std::size_t band_width(std::size_t n) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.05 * n))); }

}  // namespace

double outer_band_mass(std::span<const cplx> amp) {
  const std::size_t b = band_width(amp.size());
  double s = 0.0;
  for (std::size_t i = 0; i < b; ++i) s += std::norm(amp[i]) + std::norm(amp[amp.size() - 1 - i]);
  return s;
}

double outer_band_mass_prob(std::span<const double> prob) {
  const std::size_t b = band_width(prob.size());
  double s = 0.0;
  for (std::size_t i = 0; i < b; ++i) s += prob[i] + prob[prob.size() - 1 - i];
  return s;
}

double TrajectoryBatch::current_stderr() const noexcept {
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(count);
  const double mean = current_sum / n;
  const double var = std::max(0.0, (current_sq_sum - n * mean * mean) / (n - 1.0));
  return std::sqrt(var / n);
}

std::vector<double> TrajectoryBatch::diag_stderr() const {
  std::vector<double> se(diag_sum.size(), std::numeric_limits<double>::quiet_NaN());
  if (count < 2) return se;
  const double n = static_cast<double>(count);
  for (std::size_t i = 0; i < se.size(); ++i) {
    const double mean = diag_sum[i] / n;
    const double var = std::max(0.0, (diag_sq_sum[i] - n * mean * mean) / (n - 1.0));
    se[i] = std::sqrt(var / n);
  }
  return se;
}

namespace {

constexpr std::int64_t kBlock = 32;

struct BlockSums {
  std::vector<double> diag;
  std::vector<double> diag_sq;
  std::vector<double> edge;  // per recorded period
  double current = 0.0;
  double current_sq = 0.0;
  std::int64_t jumps = 0;
};

}  // namespace

TrajectoryBatch run_batch(const ModelParams& params, const HilbertSpec& spec, int periods, std::int64_t count,
                          std::uint64_t seed, unsigned workers) {
  if (count < 1) throw ConfigError("trajectories", "trajectory count must be >= 1");
  if (periods < 0) throw ConfigError("periods", "period count must be >= 0");

  const std::size_t dim = static_cast<std::size_t>(spec.dim());
  const std::size_t n_edge = static_cast<std::size_t>(std::max(periods, 1));
  const std::int64_t n_blocks = (count + kBlock - 1) / kBlock;
  std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));
  std::atomic<std::int64_t> next{0};

  auto work = [&] {
    Propagator prop(params, spec);
    for (std::int64_t b = next++; b < n_blocks; b = next++) {
      BlockSums& out = blocks[static_cast<std::size_t>(b)];
      out.diag.assign(dim, 0.0);
      out.diag_sq.assign(dim, 0.0);
      out.edge.assign(n_edge, 0.0);
      const std::int64_t jumps_before = prop.jumps();
      const std::int64_t end = std::min(count, (b + 1) * kBlock);
      for (std::int64_t t = b * kBlock; t < end; ++t) {
        Rng rng(trajectory_seed(seed, t));
        QuantumState s = sample_initial_state(spec, rng);
        for (int k = 0; k < periods; ++k) {
          prop.period(s, rng);
          out.edge[static_cast<std::size_t>(k)] += outer_band_mass(s.amplitudes());
        }
        if (periods == 0) out.edge[0] += outer_band_mass(s.amplitudes());
        double j = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          const double pr = std::norm(s[i]);
          out.diag[i] += pr;
          out.diag_sq[i] += pr * pr;
          j += spec.momentum_at(i) * pr;
        }
        out.current += j;
        out.current_sq += j * j;
      }
      out.jumps = prop.jumps() - jumps_before;
    }
  };

  const unsigned nw = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::min<std::int64_t>(n_blocks, 1024)));
  if (nw == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < nw; ++w) pool.emplace_back(work);
  }

  TrajectoryBatch batch;
  batch.count = count;
  batch.seed = seed;
  batch.periods = periods;
  batch.diag_sum.assign(dim, 0.0);
  batch.diag_sq_sum.assign(dim, 0.0);
  std::vector<double> edge(n_edge, 0.0);
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < dim; ++i) {
      batch.diag_sum[i] += b.diag[i];
      batch.diag_sq_sum[i] += b.diag_sq[i];
    }
    for (std::size_t k = 0; k < n_edge; ++k) edge[k] += b.edge[k];
    batch.current_sum += b.current;
    batch.current_sq_sum += b.current_sq;
    batch.jumps += b.jumps;
  }
  for (double e : edge) batch.edge_mass = std::max(batch.edge_mass, e / static_cast<double>(count));
  return batch;
}

MomentumDistribution batch_distribution(const TrajectoryBatch& b, const HilbertSpec& spec) {
  if (b.count < 1) throw std::invalid_argument("batch_distribution: empty batch");
  if (b.diag_sum.size() != static_cast<std::size_t>(spec.dim()))
    throw std::invalid_argument("batch_distribution: dimension mismatch");
  double total = 0.0;
  for (double v : b.diag_sum) total += v;
  MomentumDistribution d;
  d.prob.resize(b.diag_sum.size());
  d.momentum.resize(b.diag_sum.size());
  for (std::size_t i = 0; i < d.prob.size(); ++i) {
    d.prob[i] = std::max(0.0, b.diag_sum[i]) / total;
    d.momentum[i] = spec.momentum_at(i);
  }
  d.edge_mass = b.edge_mass;
  return d;
}

double quantum_current(const MomentumDistribution& d, const HilbertSpec& spec) {
  if (d.size() != static_cast<std::size_t>(spec.dim())) throw std::invalid_argument("quantum_current: dimension mismatch");
  double j = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) j += spec.momentum_at(i) * d.prob[i];
  return j;
}

}  // namespace ratchet::quantum
