#include "ratchet/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "ratchet/analysis.hpp"
#include "ratchet/artifact.hpp"
#include "ratchet/classical.hpp"
#include "ratchet/quantum.hpp"
#include "ratchet/sweep.hpp"

namespace ratchet::cli {

namespace fs = std::filesystem;
using artifact::format_double;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_interrupt(int) { g_stop.store(true); }

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

Range parse_range(const std::string& text, const char* field) {
  Range r;
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
  if (b == std::string::npos) throw ConfigError(field, "expected MIN:MAX:COUNT, got '" + text + "'");
  try {
    r.lo = artifact::parse_double(text.substr(0, a));
    r.hi = artifact::parse_double(text.substr(a + 1, b - a - 1));
    r.count = std::stoi(text.substr(b + 1));
  } catch (const std::exception&) {
    throw ConfigError(field, "expected MIN:MAX:COUNT, got '" + text + "'");
  }
  return r;
}

/// Effective configuration of one invocation.
struct RunConfig {
  std::string subcommand;
  std::string engine = "classical";
  double k = 7.5;
  double gamma = 0.3;
  double a = kDefaultAsymmetry;
  double phi = kDefaultPhase;
  double tau = 0.137;
  int dim = 0;  // 0: derived from tau
  std::string k_range = "1.5:10:34";
  std::string gamma_range = "0.2:0.8:20";
  std::int64_t ensemble = 10000;
  std::int64_t steps = 10000;
  std::int64_t trajectories = 200;
  int periods = 50;
  std::uint64_t seed = 20240531;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string out = "out";
  bool strict_truncation = false;
  bool emit_plots = false;
  bool dump_points = false;

  // resume / analyze
  std::string artifact_path;
  std::vector<std::string> artifact_paths;
  std::string mode;
  std::vector<double> cut_gammas;
  int bins = 50;
  double eta_max = 0.5;

  int resolved_dim() const { return dim > 0 ? dim : quantum::default_dimension(tau); }

  EngineConfig engine_config() const {
    EngineConfig e;
    e.engine = parse_engine(engine);
    e.tau = tau;
    e.dim = resolved_dim();
    e.a = a;
    e.phi = phi;
    e.ensemble = ensemble;
    e.steps = steps;
    e.trajectories = trajectories;
    e.periods = periods;
    e.strict_truncation = strict_truncation;
    e.validate();
    return e;
  }

  SweepConfig sweep_config() const {
    SweepConfig c;
    const auto kr = parse_range(k_range, "k-range");
    const auto gr = parse_range(gamma_range, "gamma-range");
    c.grid = GridSpec{kr.lo, kr.hi, kr.count, gr.lo, gr.hi, gr.count, seed};
    c.engine = engine_config();
    c.validate();
    return c;
  }

  std::string point_header() const {
    std::ostringstream h;
    h << "# ratchet point run\n";
    h << "# code_version=" << artifact::kCodeVersion << '\n';
    h << "# engine=" << engine << '\n';
    h << "# k_axis=K=tau*k (classical kick amplitude)\n";
    h << "# k=" << format_double(k) << '\n';
    h << "# gamma=" << format_double(gamma) << '\n';
    h << "# a=" << format_double(a) << '\n';
    h << "# phi=" << format_double(phi) << '\n';
    h << "# tau=" << format_double(tau) << '\n';
    h << "# dim=" << resolved_dim() << '\n';
    h << "# ensemble=" << ensemble << '\n';
    h << "# steps=" << steps << '\n';
    h << "# trajectories=" << trajectories << '\n';
    h << "# periods=" << periods << '\n';
    h << "# seed=" << seed << '\n';
    h << "# strict_truncation=" << (strict_truncation ? "true" : "false") << '\n';
    return h.str();
  }
};

void add_model_options(CLI::App& app, RunConfig& c) {
  app.add_option("--engine", c.engine, "Engine: classical or quantum")
      ->check(CLI::IsMember({"classical", "quantum"}))
      ->capture_default_str();
  app.add_option("--k", c.k, "Kick amplitude K = tau*k (point runs)")->capture_default_str();
  app.add_option("--gamma", c.gamma, "Dissipation gamma in (0, 1] (point runs)")->capture_default_str();
  app.add_option("--a", c.a, "Second-harmonic amplitude")->capture_default_str();
  app.add_option("--phi", c.phi, "Second-harmonic phase (radians)")->capture_default_str();
  app.add_option("--k-range", c.k_range, "Sweep K axis MIN:MAX:COUNT")->capture_default_str();
  app.add_option("--gamma-range", c.gamma_range, "Sweep gamma axis MIN:MAX:COUNT")->capture_default_str();
  app.add_option("--tau", c.tau, "Effective Planck constant (classical: bin width for eta)")->capture_default_str();
  app.add_option("--dim", c.dim,
                 "Basis size N (odd) or classical bin count; default keeps N*tau ~ 100 "
                 "(243 @ 0.411, 729 @ 0.137, 1459 @ 0.068)");
  app.add_option("--trajectories", c.trajectories, "Quantum trajectories per cell")->capture_default_str();
  app.add_option("--ensemble", c.ensemble, "Classical initial conditions per cell")->capture_default_str();
  app.add_option("--steps", c.steps, "Classical map steps")->capture_default_str();
  app.add_option("--periods", c.periods, "Quantum kick periods")->capture_default_str();
  app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app.add_option("--jobs", c.jobs, "Worker threads")->capture_default_str();
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_flag("--strict-truncation", c.strict_truncation, "Treat truncation-suspect cells as failures");
  app.add_flag("--emit-plots", c.emit_plots, "Write gnuplot scripts next to analysis tables");
}

std::string input_header(const std::vector<SweepArtifact>& arts, const std::vector<std::string>& paths,
                         const std::string& what) {
  std::ostringstream h;
  h << "# ratchet analysis: " << what << '\n';
  h << "# code_version=" << artifact::kCodeVersion << '\n';
  for (std::size_t i = 0; i < arts.size(); ++i) {
    h << "# input[" << i << "].path=" << paths[i] << '\n';
    for (const auto& [k, v] : artifact::config_entries(arts[i].config))
      if (k != "format" && k != "code_version" && k != "k_axis") h << "# input[" << i << "]." << k << '=' << v << '\n';
  }
  return h.str();
}

int cmd_point(const RunConfig& c) {
  const auto params = validate_params(RawParams{c.k, c.gamma, c.a, c.phi, c.tau});
  const int dim = c.resolved_dim();
  const fs::path dir(c.out);
  fs::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();

  double J = 0.0;
  double eta = 0.0;
  double stderr_J = std::numeric_limits<double>::quiet_NaN();
  double edge_mass = 0.0;
  bool flagged = false;
  MomentumDistribution dist;
  std::vector<int> cell_labels;

  if (c.engine == "classical") {
    if (c.ensemble < 1) throw ConfigError("ensemble", "ensemble size must be >= 1");
    if (c.steps < 0) throw ConfigError("steps", "step count must be >= 0");
    auto e = classical::sample_initial(static_cast<std::size_t>(c.ensemble), c.seed);
    e = classical::evolve_ensemble(std::move(e), params, c.steps, c.jobs);
    dist = classical::discretize_momentum(e, dim, dim * c.tau);
    J = classical::classical_current(e);
    double sq = 0.0;
    for (const auto& s : e.states) sq += (s.p - J) * (s.p - J);
    if (e.states.size() > 1) stderr_J = std::sqrt(sq / static_cast<double>(e.states.size() - 1) / e.states.size());
    edge_mass = dist.edge_mass;
    flagged = edge_mass > classical::kOutOfSpanWarning;
    if (flagged)
      std::cerr << "warning: " << format_double(edge_mass) << " of the classical mass lies outside the binned span\n";
    for (int i = 0; i < dim; ++i) cell_labels.push_back(i);
    if (c.dump_points) {
      std::ofstream pts(dir / "point_cloud.tsv");
      pts << c.point_header() << "x_mod_2pi\tp\n";
      for (const auto& s : e.states) {
        double x = std::fmod(s.x, kTwoPi);
        if (x < 0) x += kTwoPi;
        pts << format_double(x) << '\t' << format_double(s.p) << '\n';
      }
    }
  } else {
    const auto spec = quantum::build_space(dim, c.tau);
    if (c.trajectories < 1) throw ConfigError("trajectories", "trajectory count must be >= 1");
    if (c.periods < 0) throw ConfigError("periods", "period count must be >= 0");
    if (!(params.gamma() > 0.0)) throw ConfigError("gamma", "gamma = 0 (overdamped limit) is not supported");
    const auto batch = quantum::run_batch(params, spec, c.periods, c.trajectories, c.seed, c.jobs);
    dist = quantum::batch_distribution(batch, spec);
    J = quantum::quantum_current(dist, spec);
    stderr_J = batch.current_stderr();
    edge_mass = batch.edge_mass;
    flagged = batch.truncation_suspect();
    for (std::size_t i = 0; i < static_cast<std::size_t>(spec.dim()); ++i) cell_labels.push_back(spec.n_at(i));
  }
  eta = analysis::participation_ratio(dist);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  {
    std::ofstream s(dir / "point_summary.txt");
    s << c.point_header();
    s << "J=" << format_double(J) << '\n';
    s << "eta=" << format_double(eta) << '\n';
    s << "stderr_J=" << format_double(stderr_J) << '\n';
    s << "edge_mass=" << format_double(edge_mass) << '\n';
    s << "truncation_suspect=" << (flagged ? "true" : "false") << '\n';
    char wt[32];
    std::snprintf(wt, sizeof wt, "%.3f", wall);
    s << "wall_time_s=" << wt << '\n';
  }
  {
    std::ofstream d(dir / "point_distribution.tsv");
    d << c.point_header();
    d << (c.engine == "classical" ? "bin\tp\tP\n" : "n\tp\tP\n");
    for (std::size_t i = 0; i < dist.size(); ++i)
      d << cell_labels[i] << '\t' << format_double(dist.momentum[i]) << '\t' << format_double(dist.prob[i]) << '\n';
  }
  std::cout << "J=" << format_double(J) << " eta=" << format_double(eta) << " stderr_J=" << format_double(stderr_J)
            << " edge_mass=" << format_double(edge_mass) << (flagged ? " [truncation-suspect]" : "") << '\n';
  if (flagged && c.strict_truncation) {
    std::cerr << "error: truncation-suspect result under --strict-truncation\n";
    return kPartialFailure;
  }
  return kSuccess;
}

int report(const SweepArtifact& art, const fs::path& path) {
  const auto total = art.cells.size();
  const auto done = art.completed_count();
  std::cout << path.string() << ": " << done << "/" << total << " cells complete";
  if (art.failed_count()) std::cout << ", " << art.failed_count() << " failed";
  std::cout << '\n';
  return done == total ? kSuccess : kPartialFailure;
}

int cmd_sweep(const RunConfig& c) {
  const auto config = c.sweep_config();
  const fs::path path = fs::path(c.out) / ("sweep_" + std::string(engine_name(config.engine.engine)) + ".tsv");
  SweepOptions opt;
  opt.parallelism = c.jobs;
  opt.stop = &g_stop;
  opt.progress = true;
  const auto art = run_sweep(config, path, opt);
  return report(art, path);
}

int cmd_resume(const RunConfig& c, const CLI::App& root) {
  const fs::path path(c.artifact_path);
  if (!fs::exists(path)) {
    std::cerr << "error: artifact " << path << " not found\n";
    return kMissingData;
  }
  // Any configuration flag given explicitly must agree with the header.
  auto header = artifact::load(path).config;
  SweepConfig expected = header;
  bool overridden = false;
  auto given = [&](const char* name) { return root.count(name) > 0; };
  if (given("--engine")) expected.engine.engine = parse_engine(c.engine), overridden = true;
  if (given("--tau")) expected.engine.tau = c.tau, overridden = true;
  if (given("--dim")) expected.engine.dim = c.dim, overridden = true;
  if (given("--a")) expected.engine.a = c.a, overridden = true;
  if (given("--phi")) expected.engine.phi = c.phi, overridden = true;
  if (given("--ensemble")) expected.engine.ensemble = c.ensemble, overridden = true;
  if (given("--steps")) expected.engine.steps = c.steps, overridden = true;
  if (given("--trajectories")) expected.engine.trajectories = c.trajectories, overridden = true;
  if (given("--periods")) expected.engine.periods = c.periods, overridden = true;
  if (given("--seed")) expected.grid.master_seed = c.seed, overridden = true;
  if (given("--strict-truncation")) expected.engine.strict_truncation = c.strict_truncation, overridden = true;
  if (given("--k-range")) {
    const auto r = parse_range(c.k_range, "k-range");
    expected.grid.k_min = r.lo, expected.grid.k_max = r.hi, expected.grid.n_k = r.count, overridden = true;
  }
  if (given("--gamma-range")) {
    const auto r = parse_range(c.gamma_range, "gamma-range");
    expected.grid.gamma_min = r.lo, expected.grid.gamma_max = r.hi, expected.grid.n_gamma = r.count;
    overridden = true;
  }
  SweepOptions opt;
  opt.parallelism = c.jobs;
  opt.stop = &g_stop;
  opt.progress = true;
  const auto art = resume(path, opt, overridden ? std::optional<SweepConfig>(expected) : std::nullopt);
  return report(art, path);
}

std::string stem_of(const std::string& p) { return fs::path(p).stem().string(); }

std::string gamma_label(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", g);
  return buf;
}

int cmd_analyze(const RunConfig& c) {
  if (c.artifact_paths.empty()) throw ConfigError("artifacts", "at least one artifact path is required");
  std::vector<SweepArtifact> arts;
  for (const auto& p : c.artifact_paths) {
    if (!fs::exists(p)) {
      std::cerr << "error: artifact " << p << " not found\n";
      return kMissingData;
    }
    arts.push_back(artifact::load(p));
  }
  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::vector<fs::path> written;

  if (c.mode == "heatmap") {
    for (std::size_t i = 0; i < arts.size(); ++i) {
      if (arts[i].completed_count() == 0) {
        std::cerr << "error: " << c.artifact_paths[i] << " has no completed cells\n";
        return kMissingData;
      }
      const auto file = dir / ("heatmap_" + stem_of(c.artifact_paths[i]) + ".tsv");
      analysis::heatmap_export(arts[i], file);
      written.push_back(file);
      if (c.emit_plots) {
        auto script = file;
        script.replace_extension(".gp");
        analysis::write_plot_script(analysis::PlotKind::Heatmap, file, 1, script);
        written.push_back(script);
      }
    }
  } else if (c.mode == "hist") {
    std::vector<analysis::EtaHistogram> hists;
    for (const auto& a : arts) {
      const auto cells = a.results();
      hists.push_back(analysis::eta_histogram(cells, c.bins, c.eta_max, analysis::source_tag(a.config)));
    }
    const auto file = dir / "eta_histogram.tsv";
    analysis::write_histogram_table(hists, input_header(arts, c.artifact_paths, "eta histogram"), file);
    written.push_back(file);
    if (c.emit_plots) {
      analysis::write_plot_script(analysis::PlotKind::Histogram, file, static_cast<int>(hists.size()),
                                  dir / "eta_histogram.gp");
      written.push_back(dir / "eta_histogram.gp");
    }
  } else if (c.mode == "cut") {
    if (c.cut_gammas.empty()) throw ConfigError("cut-gamma", "cut mode needs at least one --cut-gamma value");
    for (double g : c.cut_gammas) {
      std::vector<analysis::CutSeries> cuts;
      for (std::size_t i = 0; i < arts.size(); ++i) {
        try {
          cuts.push_back(analysis::transversal_cut(arts[i], g));
        } catch (const analysis::RowNotFound& e) {
          std::cerr << "error: " << c.artifact_paths[i] << ": " << e.what() << '\n';
          return kMissingData;
        }
      }
      const auto file = dir / ("cut_gamma_" + gamma_label(g) + ".tsv");
      analysis::write_cut_table(cuts, input_header(arts, c.artifact_paths, "transversal cut at gamma=" + format_double(g)),
                                file);
      written.push_back(file);
      if (c.emit_plots) {
        auto script = file;
        script.replace_extension(".gp");
        analysis::write_plot_script(analysis::PlotKind::Cut, file, static_cast<int>(cuts.size()), script);
        written.push_back(script);
      }
    }
  } else if (c.mode == "eta-vs-j") {
    for (std::size_t i = 0; i < arts.size(); ++i) {
      const auto cells = arts[i].results();
      const auto rows = analysis::eta_vs_current(cells);
      const auto file = dir / ("eta_vs_J_" + stem_of(c.artifact_paths[i]) + ".tsv");
      analysis::write_eta_current_table(rows, input_header({arts[i]}, {c.artifact_paths[i]}, "eta versus current"),
                                        file);
      written.push_back(file);
      if (c.emit_plots) {
        auto script = file;
        script.replace_extension(".gp");
        analysis::write_plot_script(analysis::PlotKind::EtaVsCurrent, file, 1, script);
        written.push_back(script);
      }
    }
  } else {
    throw ConfigError("mode", "expected heatmap, hist, cut or eta-vs-j");
  }
  for (const auto& f : written) std::cout << "wrote " << f.string() << '\n';
  return kSuccess;
}

}  // namespace

int run(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Dissipative biharmonic kicked rotor: classical map ensembles, Lindblad quantum trajectories, "
               "(K, gamma) sweeps and analysis.\nThe k axis is the classical kick K = tau*k; the quantum kick "
               "strength is K/tau.",
               "ratchet"};
  app.set_config("--config", "", "key=value configuration file (flags override it)");
  app.require_subcommand(1);
  add_model_options(app, c);

  auto* point = app.add_subcommand("point", "Run one (K, gamma) cell and dump its momentum distribution");
  point->add_flag("--dump-points", c.dump_points, "Classical: also write the final (x mod 2pi, p) cloud");
  auto* sweep = app.add_subcommand("sweep", "Run a (K, gamma) grid into a resumable artifact");
  auto* res = app.add_subcommand("resume", "Complete the missing cells of an artifact");
  res->add_option("artifact", c.artifact_path, "Artifact file")->required();
  auto* analyze = app.add_subcommand("analyze", "Derive tables (and plot scripts) from artifacts");
  analyze->add_option("--mode", c.mode, "heatmap | hist | cut | eta-vs-j")
      ->required()
      ->check(CLI::IsMember({"heatmap", "hist", "cut", "eta-vs-j"}));
  analyze->add_option("--cut-gamma", c.cut_gammas, "gamma row(s) for cut mode");
  analyze->add_option("--bins", c.bins, "Histogram bins on [0, eta-max]")->capture_default_str();
  analyze->add_option("--eta-max", c.eta_max, "Histogram upper edge before the overflow bin")->capture_default_str();
  analyze->add_option("artifacts", c.artifact_paths, "Artifact files")->required();
  for (auto* s : {point, sweep, res, analyze}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }

  g_stop.store(false);
  auto previous = std::signal(SIGINT, on_interrupt);
  int code = kSuccess;
  try {
    if (*point)
      code = cmd_point(c);
    else if (*sweep)
      code = cmd_sweep(c);
    else if (*res)
      code = cmd_resume(c, app);
    else if (*analyze)
      code = cmd_analyze(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    code = kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kRuntimeFailure;
  }
  std::signal(SIGINT, previous);
  return code;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("ratchet");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ratchet::cli
