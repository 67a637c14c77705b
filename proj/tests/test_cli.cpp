#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ratchet/cli.hpp"

using ratchet::cli::run;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ratchet_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string drop_lines_with(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find(key) == std::string::npos) out += line + '\n';
  return out;
}

std::map<std::string, std::string> summary(const fs::path& p) {
  std::map<std::string, std::string> m;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

}  // namespace

TEST_CASE("point run, classical") {
  const auto out = fresh_dir("point_c");
  const std::vector<std::string> args{"--engine", "classical", "--k", "0", "--gamma", "0.5", "--tau", "0.411",
                                      "--ensemble", "500", "--steps", "60", "--out", out.string(),
                                      "point", "--dump-points"};
  REQUIRE(run(args) == 0);
  const auto s = summary(out / "point_summary.txt");
  CHECK(std::abs(std::stod(s.at("J"))) < 1e-12);
  CHECK(fs::exists(out / "point_distribution.tsv"));
  CHECK(fs::exists(out / "point_cloud.tsv"));
  const auto text = slurp(out / "point_summary.txt");
  CHECK(text.find("# k=0") != std::string::npos);
  CHECK(text.find("# seed=20240531") != std::string::npos);

  const auto first = slurp(out / "point_distribution.tsv");
  const auto first_summary = drop_lines_with(text, "wall_time_s");
  REQUIRE(run(args) == 0);
  CHECK(slurp(out / "point_distribution.tsv") == first);
  CHECK(drop_lines_with(slurp(out / "point_summary.txt"), "wall_time_s") == first_summary);
}

TEST_CASE("point run, quantum") {
  const auto out = fresh_dir("point_q");
  REQUIRE(run({"--engine", "quantum", "--k", "0", "--gamma", "0.5", "--tau", "0.411", "--dim", "41",
               "--trajectories", "30", "--periods", "20", "--out", out.string(), "point"}) == 0);
  const auto s = summary(out / "point_summary.txt");
  // Twenty damping periods bring every initial |n| <= 7 to rest.
  CHECK(std::abs(std::stod(s.at("J"))) < 0.05);
  CHECK(s.at("truncation_suspect") == "false");

  SUBCASE("strict truncation exits with partial failure") {
    const auto o2 = fresh_dir("point_q_strict");
    CHECK(run({"--engine", "quantum", "--k", "8", "--gamma", "0.95", "--tau", "0.411", "--dim", "21",
               "--trajectories", "10", "--periods", "3", "--out", o2.string(), "--strict-truncation", "point"}) ==
          3);
  }
}

TEST_CASE("configuration errors") {
  const auto out = fresh_dir("errors");
  CHECK(run({"--gamma", "1.5", "--out", out.string(), "point"}) == 2);
  CHECK(run({"--engine", "quantum", "--dim", "40", "--tau", "0.411", "--out", out.string(), "point"}) == 2);
  CHECK(run({"--engine", "bogus", "point"}) == 2);
  CHECK(run({"--k-range", "2:1:3", "--out", out.string(), "sweep"}) == 2);
  CHECK(run(std::vector<std::string>{}) == 2);
}

TEST_CASE("config file with flag override") {
  const auto out = fresh_dir("config");
  const auto cfg = out / "run.ini";
  std::ofstream(cfg) << "engine=classical\nk=0\ngamma=0.5\ntau=0.411\nensemble=200\nsteps=30\nseed=5\n";
  REQUIRE(run({"--config", cfg.string(), "--seed", "9", "--out", out.string(), "point"}) == 0);
  const auto text = slurp(out / "point_summary.txt");
  CHECK(text.find("# seed=9") != std::string::npos);
  CHECK(text.find("# ensemble=200") != std::string::npos);
}

TEST_CASE("sweep, resume and analyze") {
  const auto out = fresh_dir("sweep");
  const std::vector<std::string> common{"--engine", "classical", "--k-range", "2:4:2", "--gamma-range", "0.4:0.6:2",
                                        "--tau", "0.411", "--dim", "61", "--ensemble", "200", "--steps", "50",
                                        "--jobs", "2", "--out", out.string()};
  auto with = [&](std::vector<std::string> extra) {
    auto a = common;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  REQUIRE(run(with({"sweep"})) == 0);
  const auto art = out / "sweep_classical.tsv";
  REQUIRE(fs::exists(art));
  const auto text = slurp(art);
  CHECK(text.find("# fingerprint=") != std::string::npos);
  CHECK(run(with({"sweep"})) == 1);  // refuses to overwrite

  CHECK(run({"resume", art.string()}) == 0);
  CHECK(slurp(art) == text);
  CHECK(run({"--tau", "0.137", "resume", art.string()}) == 2);
  CHECK(run({"resume", (out / "missing.tsv").string()}) == 4);

  const auto an = out / "analysis";
  CHECK(run({"--out", an.string(), "analyze", "--mode", "hist", "--bins", "10", art.string(), art.string()}) == 0);
  {
    std::istringstream in(slurp(an / "eta_histogram.tsv"));
    std::string line;
    while (std::getline(in, line) && line[0] == '#') {
    }
    CHECK(line == "eta_lo\teta_hi\tP_classical\tP_classical");
  }
  CHECK(run({"--out", an.string(), "--emit-plots", "analyze", "--mode", "cut", "--cut-gamma", "0.6", art.string()}) ==
        0);
  CHECK(fs::exists(an / "cut_gamma_0.6.tsv"));
  CHECK(fs::exists(an / "cut_gamma_0.6.gp"));
  CHECK(run({"--out", an.string(), "analyze", "--mode", "cut", "--cut-gamma", "0.5", art.string()}) == 4);
  CHECK(run({"--out", an.string(), "analyze", "--mode", "heatmap", art.string()}) == 0);
  CHECK(fs::exists(an / "heatmap_sweep_classical.tsv"));
  CHECK(run({"--out", an.string(), "analyze", "--mode", "eta-vs-j", art.string()}) == 0);
  CHECK(run({"--out", an.string(), "analyze", "--mode", "hist", (out / "nope.tsv").string()}) == 4);
}
