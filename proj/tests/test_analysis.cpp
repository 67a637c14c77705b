#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ratchet/analysis.hpp"
#include "ratchet/rng.hpp"

using namespace ratchet;
using namespace ratchet::analysis;
namespace fs = std::filesystem;

namespace {

CellResult cell(int ik, int ig, double J, double eta, CellStatus st = CellStatus::Ok) {
  CellResult r;
  r.i_k = ik;
  r.i_gamma = ig;
  r.J = J;
  r.eta = eta;
  r.status = st;
  return r;
}

SweepArtifact toy_artifact() {
  SweepArtifact art;
  art.config.grid = GridSpec{2.0, 4.0, 3, 0.3, 0.5, 2, 1};
  art.cells.assign(6, std::nullopt);
  for (int ig = 0; ig < 2; ++ig)
    for (int ik = 0; ik < 3; ++ik) {
      auto c = cell(ik, ig, 0.1 * ik + ig, 0.05 * (ik + 1) + 0.01 * ig);
      c.k = art.config.grid.k_at(ik);
      c.gamma = art.config.grid.gamma_at(ig);
      art.cells[art.cell_index(ik, ig)] = c;
    }
  art.cells[art.cell_index(1, 1)].reset();
  return art;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ratchet_test_analysis";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("participation_ratio") {
  std::vector<double> uniform(10, 0.1);
  CHECK(participation_ratio(uniform) == doctest::Approx(1.0));
  std::vector<double> delta(10, 0.0);
  delta[3] = 1.0;
  CHECK(participation_ratio(delta) == doctest::Approx(0.1));
  std::vector<double> half(10, 0.0);
  half[0] = half[1] = 0.5;
  CHECK(participation_ratio(half) == doctest::Approx(0.2));

  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(1 + uniform_index(rng, 50));
    for (auto& v : p) v = uniform01(rng);
    p[0] += 1e-3;
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= total;
    const double eta = participation_ratio(p);
    CHECK(eta >= 1.0 / p.size() - 1e-12);
    CHECK(eta <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(participation_ratio(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(participation_ratio(std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST_CASE("eta_histogram") {
  std::vector<CellResult> cells{cell(0, 0, 0, 0.01), cell(1, 0, 0, 0.03), cell(2, 0, 0, 0.07),
                                cell(3, 0, 0, 0.7), cell(4, 0, 0, 0.2, CellStatus::Error),
                                cell(5, 0, 0, std::nan(""))};
  const auto h = eta_histogram(cells, 10, 0.5, "classical");
  CHECK(h.mass.size() == 11);
  CHECK(h.edges.size() == 12);
  CHECK(h.edges.back() == 1.0);
  CHECK(std::accumulate(h.mass.begin(), h.mass.end(), 0.0) == doctest::Approx(1.0));
  CHECK(h.mass[0] == doctest::Approx(0.5));
  CHECK(h.mass[1] == doctest::Approx(0.25));
  CHECK(h.mass.back() == doctest::Approx(0.25));
  CHECK(h.mass_below(0.05) == doctest::Approx(0.5));
  CHECK(h.mass_above(0.05) == doctest::Approx(0.5));
  CHECK(h.source == "classical");

  const auto full = eta_histogram(cells, 4, 1.0);
  CHECK(full.mass.size() == 4);

  std::vector<CellResult> unusable{cell(0, 0, 0, 0.2, CellStatus::Error)};
  CHECK_THROWS_AS(eta_histogram(unusable), std::invalid_argument);
}

TEST_CASE("eta_vs_current is stable") {
  std::vector<CellResult> cells{cell(2, 0, 1.0, 0.3), cell(0, 1, -0.5, 0.2), cell(1, 0, 1.0, 0.1),
                                cell(0, 0, 1.0, 0.4), cell(3, 3, 2.0, 0.1, CellStatus::Error)};
  const auto rows = eta_vs_current(cells);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].J == -0.5);
  CHECK(rows[1].i_k == 0);
  CHECK(rows[2].i_k == 1);
  CHECK(rows[3].i_k == 2);
  std::reverse(cells.begin(), cells.end());
  const auto again = eta_vs_current(cells);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].i_k == rows[i].i_k);
    CHECK(again[i].i_gamma == rows[i].i_gamma);
  }
}

TEST_CASE("transversal cuts") {
  const auto art = toy_artifact();
  const auto cut = transversal_cut(art, 0.5);
  CHECK(cut.gamma == 0.5);
  REQUIRE(cut.points.size() == 3);
  CHECK(cut.points[0].k == 2.0);
  CHECK(std::isnan(cut.points[1].J));
  CHECK(adjacent_eta_steps(cut).empty());

  const auto low = transversal_cut(art, 0.3 + 1e-12);
  const auto steps = adjacent_eta_steps(low);
  REQUIRE(steps.size() == 2);
  CHECK(steps[0] == doctest::Approx(0.05));

  try {
    transversal_cut(art, 0.45);
    FAIL("expected RowNotFound");
  } catch (const RowNotFound& e) {
    CHECK(std::string(e.what()).find("0.3") != std::string::npos);
  }
}

TEST_CASE("heatmap export and import") {
  const auto art = toy_artifact();
  const auto p = scratch("heat.tsv");
  heatmap_export(art, p);
  const auto grid = heatmap_import(p);
  const auto direct = heatmap_grid(art);
  CHECK(grid.k_axis == direct.k_axis);
  CHECK(grid.gamma_axis == direct.gamma_axis);
  CHECK(grid.present == direct.present);
  CHECK_FALSE(grid.present[art.cell_index(1, 1)]);
  for (std::size_t i = 0; i < grid.J.size(); ++i)
    if (grid.present[i]) {
      CHECK(grid.J[i] == direct.J[i]);
      CHECK(grid.eta[i] == direct.eta[i]);
    }
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find(std::string(kMissingMarker)) != std::string::npos);
}

TEST_CASE("tables and plot scripts") {
  std::vector<CellResult> cells{cell(0, 0, 0, 0.01), cell(1, 0, 0, 0.3)};
  std::vector<EtaHistogram> hists{eta_histogram(cells, 5, 0.5, "classical"),
                                  eta_histogram(cells, 5, 0.5, "quantum@0.411")};
  const auto p = scratch("hist.tsv");
  write_histogram_table(hists, "# source=test\n", p);
  std::ifstream in(p);
  std::string first, columns, row;
  std::getline(in, first);
  std::getline(in, columns);
  std::getline(in, row);
  CHECK(first == "# source=test");
  CHECK(columns == "eta_lo\teta_hi\tP_classical\tP_quantum@0.411");
  CHECK(std::count(row.begin(), row.end(), '\t') == 3);

  std::vector<EtaHistogram> mismatched{hists[0], eta_histogram(cells, 4, 0.5)};
  CHECK_THROWS_AS(write_histogram_table(mismatched, "", p), std::invalid_argument);

  const auto art = toy_artifact();
  std::vector<CutSeries> cuts{transversal_cut(art, 0.3), transversal_cut(art, 0.5)};
  const auto cp = scratch("cut.tsv");
  write_cut_table(cuts, "", cp);
  CHECK(fs::file_size(cp) > 0);

  const auto script = scratch("hist.gp");
  write_plot_script(PlotKind::Histogram, "hist.tsv", 2, script);
  std::ifstream gs(script);
  std::stringstream text;
  text << gs.rdbuf();
  CHECK(text.str().find("hist.tsv") != std::string::npos);
}

TEST_CASE("source_tag") {
  SweepConfig c;
  c.engine.engine = Engine::Classical;
  CHECK(source_tag(c) == "classical");
  c.engine.engine = Engine::Quantum;
  c.engine.tau = 0.411;
  CHECK(source_tag(c) == "quantum@0.411");
}
