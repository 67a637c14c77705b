#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratchet/distribution.hpp"
#include "ratchet/sweep.hpp"

namespace ratchet::analysis {

/// eta = (sum_i P_i^2)^-1 / N, in [1/N, 1]. Throws std::invalid_argument for an
/// empty or all-zero distribution.
double participation_ratio(std::span<const double> prob);
inline double participation_ratio(const MomentumDistribution& d) { return participation_ratio(d.prob); }

/// "classical" or "quantum@<tau>".
std::string source_tag(const SweepConfig& config);

struct EtaHistogram {
  /// bins.size() + 1 edges; the last bin is the overflow [upper, 1] when upper < 1.
  std::vector<double> edges;
  std::vector<double> mass;
  std::string source;

  /// Mass in bins lying entirely below / above `eta`; `eta` must be a bin edge.
  double mass_below(double eta) const;
  double mass_above(double eta) const;
};

/// Unit-normalized histogram of per-cell eta with n_bins uniform bins on
/// [0, upper] plus an overflow bin. Failed and non-finite cells are skipped.
/// Throws std::invalid_argument if no usable cell remains.
EtaHistogram eta_histogram(std::span<const CellResult> cells, int n_bins = 50, double upper = 0.5,
                           std::string source = {});

struct EtaCurrentRow {
  double J;
  double eta;
  int i_k;
  int i_gamma;
  double k;
  double gamma;
};

/// (J, eta) pairs sorted by J, ties broken by (i_k, i_gamma).
std::vector<EtaCurrentRow> eta_vs_current(std::span<const CellResult> cells);

struct CutPoint {
  double k;
  double J;
  double eta;
};

struct CutSeries {
  std::string source;
  double gamma = 0.0;
  std::vector<CutPoint> points;  // NaN J / eta for missing cells
};

class RowNotFound : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// The fixed-gamma row matching `gamma` within 1e-9. Throws RowNotFound
/// listing the available rows.
CutSeries transversal_cut(const SweepArtifact& artifact, double gamma);

/// Adjacent |delta eta| along a cut, skipping pairs with a missing cell.
std::vector<double> adjacent_eta_steps(const CutSeries& cut);

struct HeatmapGrid {
  std::vector<double> k_axis;
  std::vector<double> gamma_axis;
  /// Row-major (gamma outer, k inner); NaN marks a missing cell.
  std::vector<double> J;
  std::vector<double> eta;
  std::vector<bool> present;
};

inline constexpr std::string_view kMissingMarker = "NA";

HeatmapGrid heatmap_grid(const SweepArtifact& artifact);
/// Row-major delimited grid with explicit axis vectors in the header.
void heatmap_export(const SweepArtifact& artifact, const std::filesystem::path& path);
HeatmapGrid heatmap_import(const std::filesystem::path& path);

/// Comparative tables; each begins with the given provenance header lines.
void write_histogram_table(std::span<const EtaHistogram> hists, const std::string& header,
                           const std::filesystem::path& path);
void write_eta_current_table(std::span<const EtaCurrentRow> rows, const std::string& header,
                             const std::filesystem::path& path);
/// Merged cut: one k column plus one J column per series (union of k values).
void write_cut_table(std::span<const CutSeries> cuts, const std::string& header, const std::filesystem::path& path);

/// gnuplot scripts referencing a data file by relative path.
enum class PlotKind { Heatmap, Histogram, Cut, EtaVsCurrent };
void write_plot_script(PlotKind kind, const std::filesystem::path& data_file, int n_series,
                       const std::filesystem::path& script_path);

}  // namespace ratchet::analysis
