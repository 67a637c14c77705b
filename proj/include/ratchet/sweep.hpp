#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ratchet/model.hpp"

namespace ratchet {

enum class Engine { Classical, Quantum };

std::string_view engine_name(Engine e) noexcept;
/// Throws ConfigError for anything other than "classical" or "quantum".
Engine parse_engine(std::string_view name);

/// Everything besides the grid that determines a cell's numbers.
struct EngineConfig {
  Engine engine = Engine::Classical;
  double tau = 0.137;
  /// Quantum basis size; for the classical engine the number of momentum
  /// bins used for eta, laid over the span dim * tau.
  int dim = 729;
  double a = kDefaultAsymmetry;
  double phi = kDefaultPhase;
  std::int64_t ensemble = 10000;
  std::int64_t steps = 10000;
  std::int64_t trajectories = 200;
  int periods = 50;
  bool strict_truncation = false;

  void validate() const;
  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct SweepConfig {
  GridSpec grid;
  EngineConfig engine;

  void validate() const;
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

/// Stable per-cell seed: SplitMix64 chain over (master, i_k, i_gamma, engine).
std::uint64_t cell_seed(std::uint64_t master, int i_k, int i_gamma, Engine engine) noexcept;

struct CellTask {
  int i_k = 0;
  int i_gamma = 0;
  ModelParams params;
  std::uint64_t seed = 0;
  EngineConfig run;
};

enum class CellStatus { Ok, Error };

struct CellResult {
  int i_k = 0;
  int i_gamma = 0;
  double k = 0.0;
  double gamma = 0.0;
  double J = 0.0;
  double eta = 0.0;
  double stderr_J = 0.0;
  bool edge_flag = false;
  CellStatus status = CellStatus::Ok;
  double wall_time_s = 0.0;
  /// Diagnostic for failed cells; not persisted.
  std::string message;
};

/// Row-major (gamma outer, k inner) task list with endpoint-inclusive axes.
std::vector<CellTask> plan_grid(const SweepConfig& config);

/// Runs one cell single-threaded. Throws on invalid parameters.
CellResult run_cell(const CellTask& task);

/// In-memory image of a sweep artifact; `cells` is indexed like plan_grid.
struct SweepArtifact {
  SweepConfig config;
  std::vector<std::optional<CellResult>> cells;

  std::size_t cell_index(int i_k, int i_gamma) const noexcept {
    return static_cast<std::size_t>(i_gamma) * static_cast<std::size_t>(config.grid.n_k) +
           static_cast<std::size_t>(i_k);
  }
  bool is_complete(std::size_t index) const noexcept {
    return cells[index] && cells[index]->status == CellStatus::Ok;
  }
  std::vector<bool> completion() const;
  std::size_t completed_count() const;
  std::size_t failed_count() const;
  bool complete() const { return completed_count() == cells.size(); }
  /// Completed cells in task order.
  std::vector<CellResult> results() const;
};

struct SweepOptions {
  unsigned parallelism = 1;
  /// Stop claiming new cells after this many have been started in this
  /// invocation (the artifact is then left as after a crash).
  std::optional<std::size_t> max_new_cells;
  /// Set from outside (e.g. SIGINT) to stop claiming new cells.
  const std::atomic<bool>* stop = nullptr;
  bool progress = false;
};

/// Fresh sweep into `path`. Throws if the file already exists.
SweepArtifact run_sweep(const SweepConfig& config, const std::filesystem::path& path, const SweepOptions& options);

/// Continues an artifact, computing only cells without an ok record. If
/// `expected` is given its configuration must match the artifact header.
SweepArtifact resume(const std::filesystem::path& path, const SweepOptions& options,
                     const std::optional<SweepConfig>& expected = std::nullopt);

}  // namespace ratchet
