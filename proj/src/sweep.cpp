#include "ratchet/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <iostream>
#include <mutex>
#include <thread>

#include "ratchet/analysis.hpp"
#include "ratchet/artifact.hpp"
#include "ratchet/classical.hpp"
#include "ratchet/quantum.hpp"
#include "ratchet/rng.hpp"

namespace ratchet {

std::string_view engine_name(Engine e) noexcept { return e == Engine::Classical ? "classical" : "quantum"; }

Engine parse_engine(std::string_view name) {
  if (name == "classical") return Engine::Classical;
  if (name == "quantum") return Engine::Quantum;
  throw ConfigError("engine", "expected 'classical' or 'quantum', got '" + std::string(name) + "'");
}

void EngineConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau", "effective Planck constant must be > 0");
  if (!std::isfinite(a)) throw ConfigError("a", "must be finite");
  if (!std::isfinite(phi)) throw ConfigError("phi", "must be finite");
  if (engine == Engine::Classical) {
    if (dim < 2) throw ConfigError("dim", "classical binning needs at least 2 cells");
    if (ensemble < 1) throw ConfigError("ensemble", "ensemble size must be >= 1");
    if (steps < 0) throw ConfigError("steps", "step count must be >= 0");
  } else {
    (void)quantum::build_space(dim, tau);
    if (trajectories < 1) throw ConfigError("trajectories", "trajectory count must be >= 1");
    if (periods < 0) throw ConfigError("periods", "period count must be >= 0");
  }
}

void SweepConfig::validate() const {
  grid.validate();
  engine.validate();
}

std::uint64_t cell_seed(std::uint64_t master, int i_k, int i_gamma, Engine engine) noexcept {
  constexpr std::uint64_t kClassicalTag = 0x436C617373696361ULL;  // "Classica"
  constexpr std::uint64_t kQuantumTag = 0x5175616E74756D21ULL;    // "Quantum!"
  std::uint64_t h = mix64(master);
  h = mix64(h ^ mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(i_k)) + 0xA0761D6478BD642FULL));
  h = mix64(h ^ mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(i_gamma)) + 0xE7037ED1A0B428DBULL));
  return mix64(h ^ (engine == Engine::Classical ? kClassicalTag : kQuantumTag));
}

std::vector<CellTask> plan_grid(const SweepConfig& config) {
  config.validate();
  const auto& g = config.grid;
  std::vector<CellTask> tasks;
  tasks.reserve(static_cast<std::size_t>(g.n_k) * static_cast<std::size_t>(g.n_gamma));
  for (int ig = 0; ig < g.n_gamma; ++ig)
    for (int ik = 0; ik < g.n_k; ++ik)
      tasks.push_back(CellTask{
          ik, ig, validate_params(RawParams{g.k_at(ik), g.gamma_at(ig), config.engine.a, config.engine.phi, config.engine.tau}),
          cell_seed(g.master_seed, ik, ig, config.engine.engine), config.engine});
  return tasks;
}

CellResult run_cell(const CellTask& task) {
  const auto start = std::chrono::steady_clock::now();
  CellResult r;
  r.i_k = task.i_k;
  r.i_gamma = task.i_gamma;
  r.k = task.params.kick_K();
  r.gamma = task.params.gamma();
  const auto& run = task.run;
  if (run.engine == Engine::Classical) {
    auto e = classical::sample_initial(static_cast<std::size_t>(run.ensemble), task.seed);
    e = classical::evolve_ensemble(std::move(e), task.params, run.steps);
    const auto dist = classical::discretize_momentum(e, run.dim, run.dim * run.tau);
    r.J = classical::classical_current(e);
    r.eta = analysis::participation_ratio(dist);
    r.stderr_J = std::numeric_limits<double>::quiet_NaN();
    r.edge_flag = dist.edge_mass > classical::kOutOfSpanWarning;
  } else {
    const auto spec = quantum::build_space(run.dim, run.tau);
    const auto batch = quantum::run_batch(task.params, spec, run.periods, run.trajectories, task.seed);
    const auto dist = quantum::batch_distribution(batch, spec);
    r.J = quantum::quantum_current(dist, spec);
    r.eta = analysis::participation_ratio(dist);
    r.stderr_J = batch.current_stderr();
    r.edge_flag = batch.truncation_suspect();
  }
  if (r.edge_flag && run.strict_truncation) {
    r.status = CellStatus::Error;
    r.message = "truncation-suspect under strict mode";
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<bool> SweepArtifact::completion() const {
  std::vector<bool> bits(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) bits[i] = is_complete(i);
  return bits;
}

std::size_t SweepArtifact::completed_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) n += is_complete(i) ? 1 : 0;
  return n;
}

std::size_t SweepArtifact::failed_count() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += (c && c->status == CellStatus::Error) ? 1 : 0;
  return n;
}

std::vector<CellResult> SweepArtifact::results() const {
  std::vector<CellResult> out;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (is_complete(i)) out.push_back(*cells[i]);
  return out;
}

namespace {

// Appends records as cells finish; one mutex serializes all file writes.
class CheckpointWriter {
 public:
  explicit CheckpointWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::app) {
    if (!out_) throw std::runtime_error("cannot append to " + path.string());
  }
  void commit(SweepArtifact& art, const CellResult& r) {
    std::lock_guard lock(mutex_);
    out_ << artifact::record_line(r);
    out_.flush();
    art.cells[art.cell_index(r.i_k, r.i_gamma)] = r;
  }

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

void execute(SweepArtifact& art, const std::filesystem::path& path, const SweepOptions& opt) {
  const auto tasks = plan_grid(art.config);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (!art.is_complete(i)) pending.push_back(i);
  if (pending.empty()) return;

  const std::size_t limit = std::min(pending.size(), opt.max_new_cells.value_or(pending.size()));
  CheckpointWriter writer(path);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex log_mutex;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t already = art.completed_count();

  auto work = [&] {
    while (true) {
      if (opt.stop && opt.stop->load()) return;
      const std::size_t slot = next++;
      if (slot >= limit) return;
      const auto& task = tasks[pending[slot]];
      CellResult r;
      try {
        r = run_cell(task);
      } catch (const std::exception& e) {
        r.i_k = task.i_k;
        r.i_gamma = task.i_gamma;
        r.k = task.params.kick_K();
        r.gamma = task.params.gamma();
        r.J = r.eta = r.stderr_J = std::numeric_limits<double>::quiet_NaN();
        r.status = CellStatus::Error;
        r.message = e.what();
      }
      writer.commit(art, r);
      const std::size_t n = ++done;
      if (opt.progress || r.status == CellStatus::Error) {
        std::lock_guard lock(log_mutex);
        if (r.status == CellStatus::Error)
          std::cerr << "cell (" << r.i_k << ", " << r.i_gamma << ") failed: " << r.message << '\n';
        if (opt.progress) {
          const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          const double eta = elapsed / static_cast<double>(n) * static_cast<double>(limit - n);
          std::fprintf(stderr, "[sweep] %zu/%zu cells done, ETA %.0f s\n", already + n, tasks.size(), eta);
        }
      }
    }
  };

  const unsigned nw = std::clamp<unsigned>(opt.parallelism, 1, static_cast<unsigned>(std::min<std::size_t>(limit, 4096)));
  if (nw == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < nw; ++w) pool.emplace_back(work);
  }
}

void finish(SweepArtifact& art, const std::filesystem::path& path, const SweepOptions& opt) {
  execute(art, path, opt);
  const bool interrupted = (opt.stop && opt.stop->load()) || opt.max_new_cells.has_value();
  // Canonical rewrite only on a clean finish; an interrupted run keeps its
  // append-only log exactly as a crash would.
  if (!interrupted) artifact::write_canonical(path, art);
}

// Cuts an unterminated last line so appended records start on a fresh line.
void drop_torn_tail(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  if (text.empty() || text.back() == '\n') return;
  const auto cut = text.rfind('\n');
  std::filesystem::resize_file(path, cut == std::string::npos ? 0 : cut + 1);
}

}  // namespace

SweepArtifact run_sweep(const SweepConfig& config, const std::filesystem::path& path, const SweepOptions& options) {
  config.validate();
  if (std::filesystem::exists(path))
    throw std::runtime_error("artifact " + path.string() + " already exists; use resume to continue it");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot create " + path.string());
    out << artifact::header_text(config);
  }
  SweepArtifact art;
  art.config = config;
  art.cells.assign(static_cast<std::size_t>(config.grid.n_k) * static_cast<std::size_t>(config.grid.n_gamma),
                   std::nullopt);
  finish(art, path, options);
  return art;
}

SweepArtifact resume(const std::filesystem::path& path, const SweepOptions& options,
                     const std::optional<SweepConfig>& expected) {
  SweepArtifact art = artifact::load(path);
  if (expected && !(*expected == art.config)) {
    const auto want = artifact::config_entries(*expected);
    const auto have = artifact::config_entries(art.config);
    std::string diffs;
    for (std::size_t i = 0; i < want.size(); ++i)
      if (want[i].second != have[i].second)
        diffs += (diffs.empty() ? "" : ", ") + want[i].first + " (artifact " + have[i].second + ", requested " +
                 want[i].second + ")";
    throw ConfigError("config", "requested run does not match artifact header: " + diffs);
  }
  if (art.complete()) return art;
  drop_torn_tail(path);
  finish(art, path, options);
  return art;
}

}  // namespace ratchet
