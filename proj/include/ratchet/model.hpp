#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ratchet {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kDefaultAsymmetry = 0.5;
inline constexpr double kDefaultPhase = std::numbers::pi / 2.0;

/// Raised for any invalid user-facing configuration. `field()` names the
/// offending parameter so diagnostics can be surfaced verbatim.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Unvalidated parameter fields as they arrive from a config file or flags.
struct RawParams {
  std::optional<double> kick_K;
  std::optional<double> gamma;
  std::optional<double> a;
  std::optional<double> phi;
  std::optional<double> tau;
};

/// Parameters of the biharmonically kicked dissipative rotor.
///
/// `kick_K()` is the classical combination K = tau * k that sets the classical
/// dynamics; the quantum kick phase strength is K / tau. Instances are
/// immutable and always valid: construct through `validate_params`.
class ModelParams {
 public:
  double kick_K() const noexcept { return kick_K_; }
  double gamma() const noexcept { return gamma_; }
  double a() const noexcept { return a_; }
  double phi() const noexcept { return phi_; }
  double tau() const noexcept { return tau_; }
  double quantum_kick() const noexcept { return kick_K_ / tau_; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  friend ModelParams validate_params(const RawParams&);
  ModelParams(double K, double gamma, double a, double phi, double tau)
      : kick_K_(K), gamma_(gamma), a_(a), phi_(phi), tau_(tau) {}

  double kick_K_;
  double gamma_;
  double a_;
  double phi_;
  double tau_;
};

/// Checks ranges and applies the a = 0.5, phi = pi/2 defaults.
/// Throws ConfigError naming the first offending field.
ModelParams validate_params(const RawParams& raw);

/// Shorthand for tests and internal callers.
ModelParams make_params(double K, double gamma, double tau, double a = kDefaultAsymmetry,
                        double phi = kDefaultPhase);

/// K * [sin x + a sin(2x + phi)].
double kick_force(double x, const ModelParams& p);

/// K * [cos x + (a/2) cos(2x + phi)]; the kick is delivered at every integer
/// kick index, so the spatial profile does not depend on it.
double potential(double x, std::int64_t kick_index, const ModelParams& p);
double potential(double x, const ModelParams& p);

/// Uniform (k, gamma) sampling grid shared by both engines.
struct GridSpec {
  double k_min = 1.5;
  double k_max = 10.0;
  int n_k = 34;
  double gamma_min = 0.2;
  double gamma_max = 0.8;
  int n_gamma = 20;
  std::uint64_t master_seed = 20240531;

  /// Throws ConfigError on a malformed grid.
  void validate() const;

  /// Endpoint-inclusive axis values. A single-point axis sits at its minimum.
  std::vector<double> k_values() const;
  std::vector<double> gamma_values() const;
  double k_at(int i_k) const;
  double gamma_at(int i_gamma) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace ratchet
