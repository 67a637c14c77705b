#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ratchet/sweep.hpp"

namespace ratchet::artifact {

inline constexpr std::string_view kCodeVersion = "ratchet 1.0.0";
inline constexpr int kFormatVersion = 1;

/// Shortest text that parses back to the identical double ("nan", "inf" for
/// non-finite values).
std::string format_double(double v);
/// Throws std::invalid_argument on malformed input.
double parse_double(std::string_view text);

using Entries = std::vector<std::pair<std::string, std::string>>;

/// Ordered key=value provenance for a sweep configuration, excluding the
/// fingerprint.
Entries config_entries(const SweepConfig& config);
/// Throws ConfigError naming a missing or malformed key.
SweepConfig config_from_entries(const std::map<std::string, std::string>& entries);

/// 64-bit digest of the canonical configuration text.
std::uint64_t fingerprint(const SweepConfig& config);

/// Header block: "# key=value" lines followed by the column line.
std::string header_text(const SweepConfig& config);

inline constexpr std::string_view kColumns =
    "i_k\ti_gamma\tk\tgamma\tJ\teta\tstderr_J\tedge_mass_flag\tstatus\twall_time_s";

std::string record_line(const CellResult& r);

/// Parses the artifact. Incomplete trailing lines (crash mid-write) are
/// ignored; an ok record supersedes error records of the same cell.
/// Throws ConfigError if the header is inconsistent or the records do not
/// belong to the header's grid.
SweepArtifact load(const std::filesystem::path& path);

/// Writes the canonical form (all present cells in task order) atomically.
void write_canonical(const std::filesystem::path& path, const SweepArtifact& artifact);

/// Parses "# key=value" header lines from any output file.
std::map<std::string, std::string> read_header(std::istream& in);

}  // namespace ratchet::artifact
