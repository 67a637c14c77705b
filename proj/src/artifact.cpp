#include "ratchet/artifact.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace ratchet::artifact {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return v;
}

namespace {

template <typename T>
T parse_integer(std::string_view text) {
  T v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  return v;
}

const std::string& require(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw ConfigError(key, "missing from artifact header");
  return it->second;
}

template <typename F>
auto field(const std::map<std::string, std::string>& m, const std::string& key, F parse) {
  const auto& text = require(m, key);
  try {
    return parse(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Entries config_entries(const SweepConfig& c) {
  const auto& g = c.grid;
  const auto& e = c.engine;
  return {
      {"format", std::to_string(kFormatVersion)},
      {"code_version", std::string(kCodeVersion)},
      {"engine", std::string(engine_name(e.engine))},
      {"k_axis", "K=tau*k (classical kick amplitude)"},
      {"k_min", format_double(g.k_min)},
      {"k_max", format_double(g.k_max)},
      {"n_k", std::to_string(g.n_k)},
      {"gamma_min", format_double(g.gamma_min)},
      {"gamma_max", format_double(g.gamma_max)},
      {"n_gamma", std::to_string(g.n_gamma)},
      {"master_seed", std::to_string(g.master_seed)},
      {"tau", format_double(e.tau)},
      {"dim", std::to_string(e.dim)},
      {"a", format_double(e.a)},
      {"phi", format_double(e.phi)},
      {"ensemble", std::to_string(e.ensemble)},
      {"steps", std::to_string(e.steps)},
      {"trajectories", std::to_string(e.trajectories)},
      {"periods", std::to_string(e.periods)},
      {"strict_truncation", e.strict_truncation ? "true" : "false"},
  };
}

SweepConfig config_from_entries(const std::map<std::string, std::string>& m) {
  const int format = field(m, "format", parse_integer<int>);
  if (format != kFormatVersion) throw ConfigError("format", "unsupported artifact format " + std::to_string(format));
  SweepConfig c;
  c.engine.engine = parse_engine(require(m, "engine"));
  c.grid.k_min = field(m, "k_min", parse_double);
  c.grid.k_max = field(m, "k_max", parse_double);
  c.grid.n_k = field(m, "n_k", parse_integer<int>);
  c.grid.gamma_min = field(m, "gamma_min", parse_double);
  c.grid.gamma_max = field(m, "gamma_max", parse_double);
  c.grid.n_gamma = field(m, "n_gamma", parse_integer<int>);
  c.grid.master_seed = field(m, "master_seed", parse_integer<std::uint64_t>);
  c.engine.tau = field(m, "tau", parse_double);
  c.engine.dim = field(m, "dim", parse_integer<int>);
  c.engine.a = field(m, "a", parse_double);
  c.engine.phi = field(m, "phi", parse_double);
  c.engine.ensemble = field(m, "ensemble", parse_integer<std::int64_t>);
  c.engine.steps = field(m, "steps", parse_integer<std::int64_t>);
  c.engine.trajectories = field(m, "trajectories", parse_integer<std::int64_t>);
  c.engine.periods = field(m, "periods", parse_integer<int>);
  const auto& strict = require(m, "strict_truncation");
  if (strict != "true" && strict != "false") throw ConfigError("strict_truncation", "expected true or false");
  c.engine.strict_truncation = strict == "true";
  c.validate();
  return c;
}

std::uint64_t fingerprint(const SweepConfig& config) {
  // FNV-1a over the canonical entries.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : config_entries(config)) {
    if (k == "code_version") continue;
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  return h;
}

std::string header_text(const SweepConfig& config) {
  std::ostringstream out;
  out << "# ratchet sweep artifact\n";
  for (const auto& [k, v] : config_entries(config)) out << "# " << k << '=' << v << '\n';
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(fingerprint(config)));
  out << "# fingerprint=" << fp << '\n';
  out << kColumns << '\n';
  return out.str();
}

std::string record_line(const CellResult& r) {
  std::string s;
  s += std::to_string(r.i_k) + '\t' + std::to_string(r.i_gamma) + '\t';
  s += format_double(r.k) + '\t' + format_double(r.gamma) + '\t';
  s += format_double(r.J) + '\t' + format_double(r.eta) + '\t' + format_double(r.stderr_J) + '\t';
  s += r.edge_flag ? "1\t" : "0\t";
  s += r.status == CellStatus::Ok ? "ok\t" : "error\t";
  char wt[32];
  std::snprintf(wt, sizeof wt, "%.3f", r.wall_time_s);
  s += wt;
  s += '\n';
  return s;
}

std::map<std::string, std::string> read_header(std::istream& in) {
  std::map<std::string, std::string> m;
  std::string line;
  while (in.peek() == '#' && std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(1, eq - 1);
    key.erase(0, key.find_first_not_of(' '));
    key.erase(key.find_last_not_of(' ') + 1);
    m[key] = line.substr(eq + 1);
  }
  return m;
}

SweepArtifact load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open artifact " + path.string());
  const auto header = read_header(in);
  if (header.empty()) throw ConfigError("header", path.string() + " has no artifact header");
  SweepArtifact art;
  art.config = config_from_entries(header);

  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(fingerprint(art.config)));
  if (require(header, "fingerprint") != fp)
    throw ConfigError("fingerprint", "header was modified after the artifact was written (configuration mismatch)");

  std::string line;
  if (!std::getline(in, line) || line != kColumns) throw ConfigError("columns", "missing or unexpected column line");

  const auto& g = art.config.grid;
  art.cells.assign(static_cast<std::size_t>(g.n_k) * static_cast<std::size_t>(g.n_gamma), std::nullopt);
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (in.eof()) break;  // no trailing newline: torn write
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 10) throw ConfigError("records", "malformed record at data line " + std::to_string(line_no));
    CellResult r;
    try {
      r.i_k = parse_integer<int>(cols[0]);
      r.i_gamma = parse_integer<int>(cols[1]);
      r.k = parse_double(cols[2]);
      r.gamma = parse_double(cols[3]);
      r.J = parse_double(cols[4]);
      r.eta = parse_double(cols[5]);
      r.stderr_J = parse_double(cols[6]);
      r.edge_flag = cols[7] == "1";
      r.wall_time_s = parse_double(cols[9]);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("records", "data line " + std::to_string(line_no) + ": " + e.what());
    }
    if (cols[8] == "ok")
      r.status = CellStatus::Ok;
    else if (cols[8] == "error")
      r.status = CellStatus::Error;
    else
      throw ConfigError("records", "unknown status at data line " + std::to_string(line_no));

    if (r.i_k < 0 || r.i_k >= g.n_k || r.i_gamma < 0 || r.i_gamma >= g.n_gamma)
      throw ConfigError("records", "cell index outside the header grid at data line " + std::to_string(line_no));
    if (r.k != g.k_at(r.i_k) || r.gamma != g.gamma_at(r.i_gamma))
      throw ConfigError("records", "cell coordinates disagree with the header grid at data line " +
                                       std::to_string(line_no));
    auto& slot = art.cells[art.cell_index(r.i_k, r.i_gamma)];
    if (!slot || slot->status != CellStatus::Ok) slot = r;
  }
  return art;
}

void write_canonical(const std::filesystem::path& path, const SweepArtifact& artifact) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << header_text(artifact.config);
    for (const auto& c : artifact.cells)
      if (c) out << record_line(*c);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ratchet::artifact
