#include "ratchet/model.hpp"

#include <cmath>
#include <string>

namespace ratchet {

namespace {

double require_finite(const std::optional<double>& v, const char* field) {
  if (!v) throw ConfigError(field, "missing value");
  if (!std::isfinite(*v)) throw ConfigError(field, "must be finite");
  return *v;
}

double axis_value(double lo, double hi, int count, int i) {
  if (count == 1) return lo;
  if (i == count - 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

}  // namespace

ModelParams validate_params(const RawParams& raw) {
  const double K = require_finite(raw.kick_K, "k");
  if (K < 0.0) throw ConfigError("k", "kick amplitude must be >= 0, got " + std::to_string(K));

  const double gamma = require_finite(raw.gamma, "gamma");
  if (gamma < 0.0 || gamma > 1.0)
    throw ConfigError("gamma", "dissipation must lie in [0, 1], got " + std::to_string(gamma));

  const double tau = require_finite(raw.tau, "tau");
  if (tau <= 0.0) throw ConfigError("tau", "effective Planck constant must be > 0, got " + std::to_string(tau));

  const double a = raw.a ? require_finite(raw.a, "a") : kDefaultAsymmetry;
  const double phi = raw.phi ? require_finite(raw.phi, "phi") : kDefaultPhase;
  return ModelParams(K, gamma, a, phi, tau);
}

ModelParams make_params(double K, double gamma, double tau, double a, double phi) {
  return validate_params(RawParams{K, gamma, a, phi, tau});
}

double kick_force(double x, const ModelParams& p) {
  return p.kick_K() * (std::sin(x) + p.a() * std::sin(2.0 * x + p.phi()));
}

double potential(double x, std::int64_t /*kick_index*/, const ModelParams& p) {
  return potential(x, p);
}

double potential(double x, const ModelParams& p) {
  return p.kick_K() * (std::cos(x) + 0.5 * p.a() * std::cos(2.0 * x + p.phi()));
}

void GridSpec::validate() const {
  if (!std::isfinite(k_min) || !std::isfinite(k_max) || !(k_min < k_max))
    throw ConfigError("k-range", "require finite k_min < k_max");
  if (k_min < 0.0) throw ConfigError("k-range", "kick amplitude must be >= 0");
  if (!std::isfinite(gamma_min) || !std::isfinite(gamma_max) || !(gamma_min < gamma_max))
    throw ConfigError("gamma-range", "require finite gamma_min < gamma_max");
  if (gamma_min < 0.0 || gamma_max > 1.0) throw ConfigError("gamma-range", "must lie within [0, 1]");
  if (n_k < 1) throw ConfigError("k-range", "column count must be >= 1");
  if (n_gamma < 1) throw ConfigError("gamma-range", "row count must be >= 1");
}

std::vector<double> GridSpec::k_values() const {
  std::vector<double> v(static_cast<std::size_t>(n_k));
  for (int i = 0; i < n_k; ++i) v[static_cast<std::size_t>(i)] = k_at(i);
  return v;
}

std::vector<double> GridSpec::gamma_values() const {
  std::vector<double> v(static_cast<std::size_t>(n_gamma));
  for (int i = 0; i < n_gamma; ++i) v[static_cast<std::size_t>(i)] = gamma_at(i);
  return v;
}

double GridSpec::k_at(int i_k) const { return axis_value(k_min, k_max, n_k, i_k); }
double GridSpec::gamma_at(int i_gamma) const { return axis_value(gamma_min, gamma_max, n_gamma, i_gamma); }

}  // namespace ratchet
