#include "ratchet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "ratchet/artifact.hpp"

namespace ratchet::analysis {

using artifact::format_double;

double participation_ratio(std::span<const double> prob) {
  if (prob.empty()) throw std::invalid_argument("participation_ratio: empty distribution");
  double sum_sq = 0.0;
  for (double p : prob) sum_sq += p * p;
  if (!(sum_sq > 0.0)) throw std::invalid_argument("participation_ratio: all-zero distribution");
  return 1.0 / (sum_sq * static_cast<double>(prob.size()));
}

std::string source_tag(const SweepConfig& config) {
  if (config.engine.engine == Engine::Classical) return "classical";
  return "quantum@" + format_double(config.engine.tau);
}

double EtaHistogram::mass_below(double eta) const {
  double m = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (edges[i + 1] <= eta + 1e-12) m += mass[i];
  return m;
}

double EtaHistogram::mass_above(double eta) const {
  double m = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (edges[i] >= eta - 1e-12) m += mass[i];
  return m;
}

EtaHistogram eta_histogram(std::span<const CellResult> cells, int n_bins, double upper, std::string source) {
  if (n_bins < 1) throw std::invalid_argument("eta_histogram: n_bins must be >= 1");
  if (!(upper > 0.0 && upper <= 1.0)) throw std::invalid_argument("eta_histogram: upper must be in (0, 1]");
  EtaHistogram h;
  h.source = std::move(source);
  const double width = upper / n_bins;
  for (int i = 0; i <= n_bins; ++i) h.edges.push_back(i == n_bins ? upper : i * width);
  const bool overflow = upper < 1.0;
  if (overflow) h.edges.push_back(1.0);
  h.mass.assign(h.edges.size() - 1, 0.0);

  std::size_t used = 0;
  for (const auto& c : cells) {
    if (c.status != CellStatus::Ok || !std::isfinite(c.eta)) continue;
    std::size_t idx;
    if (c.eta >= upper)
      idx = overflow ? h.mass.size() - 1 : static_cast<std::size_t>(n_bins - 1);
    else
      idx = std::min(static_cast<std::size_t>(std::max(0.0, c.eta) / width), static_cast<std::size_t>(n_bins - 1));
    h.mass[idx] += 1.0;
    ++used;
  }
  if (used == 0) throw std::invalid_argument("eta_histogram: no completed cells");
  for (auto& m : h.mass) m /= static_cast<double>(used);
  return h;
}

std::vector<EtaCurrentRow> eta_vs_current(std::span<const CellResult> cells) {
  std::vector<EtaCurrentRow> rows;
  for (const auto& c : cells)
    if (c.status == CellStatus::Ok) rows.push_back({c.J, c.eta, c.i_k, c.i_gamma, c.k, c.gamma});
  std::sort(rows.begin(), rows.end(), [](const EtaCurrentRow& a, const EtaCurrentRow& b) {
    if (a.J != b.J) return a.J < b.J;
    if (a.i_k != b.i_k) return a.i_k < b.i_k;
    return a.i_gamma < b.i_gamma;
  });
  return rows;
}

CutSeries transversal_cut(const SweepArtifact& art, double gamma) {
  const auto& g = art.config.grid;
  int row = -1;
  for (int i = 0; i < g.n_gamma; ++i)
    if (std::abs(g.gamma_at(i) - gamma) <= 1e-9) {
      row = i;
      break;
    }
  if (row < 0) {
    std::string rows;
    for (double v : g.gamma_values()) rows += (rows.empty() ? "" : ", ") + format_double(v);
    throw RowNotFound("no gamma row matches " + format_double(gamma) + "; available rows: " + rows);
  }
  CutSeries cut;
  cut.source = source_tag(art.config);
  cut.gamma = g.gamma_at(row);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < g.n_k; ++i) {
    const auto idx = art.cell_index(i, row);
    if (art.is_complete(idx))
      cut.points.push_back({g.k_at(i), art.cells[idx]->J, art.cells[idx]->eta});
    else
      cut.points.push_back({g.k_at(i), nan, nan});
  }
  return cut;
}

std::vector<double> adjacent_eta_steps(const CutSeries& cut) {
  std::vector<double> steps;
  for (std::size_t i = 1; i < cut.points.size(); ++i) {
    const double d = cut.points[i].eta - cut.points[i - 1].eta;
    if (std::isfinite(d)) steps.push_back(std::abs(d));
  }
  return steps;
}

HeatmapGrid heatmap_grid(const SweepArtifact& art) {
  HeatmapGrid h;
  h.k_axis = art.config.grid.k_values();
  h.gamma_axis = art.config.grid.gamma_values();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < art.cells.size(); ++i) {
    const bool ok = art.is_complete(i);
    h.present.push_back(ok);
    h.J.push_back(ok ? art.cells[i]->J : nan);
    h.eta.push_back(ok ? art.cells[i]->eta : nan);
  }
  return h;
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(artifact::parse_double(item));
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string value_or_missing(double v, bool present) {
  return present ? format_double(v) : std::string(kMissingMarker);
}

}  // namespace

void heatmap_export(const SweepArtifact& art, const std::filesystem::path& path) {
  const auto h = heatmap_grid(art);
  auto out = open_out(path);
  out << "# ratchet heatmap (" << source_tag(art.config) << ")\n";
  for (const auto& [k, v] : artifact::config_entries(art.config)) out << "# " << k << '=' << v << '\n';
  out << "# missing_marker=" << kMissingMarker << '\n';
  out << "# k_values=" << join(h.k_axis) << '\n';
  out << "# gamma_values=" << join(h.gamma_axis) << '\n';
  out << "i_k\ti_gamma\tk\tgamma\tJ\teta\n";
  for (std::size_t r = 0; r < h.gamma_axis.size(); ++r) {
    for (std::size_t c = 0; c < h.k_axis.size(); ++c) {
      const std::size_t i = r * h.k_axis.size() + c;
      out << c << '\t' << r << '\t' << format_double(h.k_axis[c]) << '\t' << format_double(h.gamma_axis[r]) << '\t'
          << value_or_missing(h.J[i], h.present[i]) << '\t' << value_or_missing(h.eta[i], h.present[i]) << '\n';
    }
    out << '\n';  // blank line between rows for gnuplot's pm3d
  }
}

HeatmapGrid heatmap_import(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto header = artifact::read_header(in);
  HeatmapGrid h;
  auto find = [&](const char* key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) throw std::runtime_error(std::string("heatmap header lacks ") + key);
    return it->second;
  };
  h.k_axis = split_doubles(find("k_values"));
  h.gamma_axis = split_doubles(find("gamma_values"));
  const std::size_t n = h.k_axis.size() * h.gamma_axis.size();
  h.J.assign(n, std::numeric_limits<double>::quiet_NaN());
  h.eta = h.J;
  h.present.assign(n, false);
  std::string line;
  std::getline(in, line);  // column line
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::size_t ik, ig;
    std::string k, g, j, e;
    ss >> ik >> ig >> k >> g >> j >> e;
    if (!ss || ik >= h.k_axis.size() || ig >= h.gamma_axis.size())
      throw std::runtime_error("malformed heatmap row: " + line);
    const std::size_t i = ig * h.k_axis.size() + ik;
    if (j == kMissingMarker) continue;
    h.present[i] = true;
    h.J[i] = artifact::parse_double(j);
    h.eta[i] = artifact::parse_double(e);
  }
  return h;
}

void write_histogram_table(std::span<const EtaHistogram> hists, const std::string& header,
                           const std::filesystem::path& path) {
  if (hists.empty()) throw std::invalid_argument("write_histogram_table: nothing to write");
  for (const auto& h : hists)
    if (h.edges != hists[0].edges) throw std::invalid_argument("histograms use different bin edges");
  auto out = open_out(path);
  out << header;
  out << "eta_lo\teta_hi";
  for (const auto& h : hists) out << "\tP_" << h.source;
  out << '\n';
  for (std::size_t i = 0; i < hists[0].mass.size(); ++i) {
    out << format_double(hists[0].edges[i]) << '\t' << format_double(hists[0].edges[i + 1]);
    for (const auto& h : hists) out << '\t' << format_double(h.mass[i]);
    out << '\n';
  }
}

void write_eta_current_table(std::span<const EtaCurrentRow> rows, const std::string& header,
                             const std::filesystem::path& path) {
  auto out = open_out(path);
  out << header;
  out << "J\teta\ti_k\ti_gamma\tk\tgamma\n";
  for (const auto& r : rows)
    out << format_double(r.J) << '\t' << format_double(r.eta) << '\t' << r.i_k << '\t' << r.i_gamma << '\t'
        << format_double(r.k) << '\t' << format_double(r.gamma) << '\n';
}

void write_cut_table(std::span<const CutSeries> cuts, const std::string& header, const std::filesystem::path& path) {
  std::map<double, std::vector<std::optional<double>>> rows;
  for (std::size_t s = 0; s < cuts.size(); ++s)
    for (const auto& p : cuts[s].points) {
      auto& row = rows[p.k];
      row.resize(cuts.size());
      if (std::isfinite(p.J)) row[s] = p.J;
    }
  auto out = open_out(path);
  out << header;
  out << "k";
  for (const auto& c : cuts) out << "\tJ_" << c.source;
  out << '\n';
  for (auto& [k, vals] : rows) {
    vals.resize(cuts.size());
    out << format_double(k);
    for (const auto& v : vals) out << '\t' << (v ? format_double(*v) : std::string(kMissingMarker));
    out << '\n';
  }
}

void write_plot_script(PlotKind kind, const std::filesystem::path& data_file, int n_series,
                       const std::filesystem::path& script_path) {
  auto out = open_out(script_path);
  const std::string data = data_file.filename().string();
  const std::string stem = data_file.stem().string();
  out << "# gnuplot script; run from this directory: gnuplot " << script_path.filename().string() << "\n";
  out << "set terminal pngcairo size 900,700\n";
  out << "set datafile missing '" << kMissingMarker << "'\n";
  out << "set datafile separator '\\t'\n";
  switch (kind) {
    case PlotKind::Heatmap:
      out << "set output '" << stem << "_J.png'\n";
      out << "set xlabel 'k'\nset ylabel 'gamma'\nset view map\nset palette rgb 33,13,10\n";
      out << "splot '" << data << "' using 3:4:5 with pm3d notitle\n";
      out << "set output '" << stem << "_eta.png'\n";
      out << "splot '" << data << "' using 3:4:6 with pm3d notitle\n";
      break;
    case PlotKind::Histogram:
      out << "set output '" << stem << ".png'\n";
      out << "set xlabel 'eta'\nset ylabel 'P_eta'\nset logscale y\n";
      out << "plot ";
      for (int s = 0; s < n_series; ++s)
        out << (s ? ", " : "") << "'" << data << "' using (($1+$2)/2):" << (3 + s)
            << " with linespoints title columnheader(" << (3 + s) << ")";
      out << '\n';
      break;
    case PlotKind::Cut:
      out << "set output '" << stem << ".png'\n";
      out << "set xlabel 'k'\nset ylabel 'J'\n";
      out << "plot ";
      for (int s = 0; s < n_series; ++s)
        out << (s ? ", " : "") << "'" << data << "' using 1:" << (2 + s) << " with lines title columnheader("
            << (2 + s) << ")";
      out << '\n';
      break;
    case PlotKind::EtaVsCurrent:
      out << "set output '" << stem << ".png'\n";
      out << "set xlabel 'J'\nset ylabel 'eta'\n";
      out << "plot '" << data << "' using 1:2 with points pt 7 ps 0.5 notitle\n";
      break;
  }
}

}  // namespace ratchet::analysis
