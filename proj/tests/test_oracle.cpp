#include "doctest.h"

#include <cmath>

#include "ratchet/oracle.hpp"

using namespace ratchet;
using namespace ratchet::oracle;
using quantum::build_space;
using quantum::QuantumState;
using quantum::cplx;

namespace {

DensityMatrix pure(const QuantumState& s) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v * v.adjoint();
}

double mean_n(const DensityMatrix& rho, const quantum::HilbertSpec& spec) {
  double m = 0.0;
  for (int i = 0; i < spec.dim(); ++i) m += spec.n_at(static_cast<std::size_t>(i)) * rho(i, i).real();
  return m;
}

double binomial(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) * std::pow(p, k) *
         std::pow(1.0 - p, n - k);
}

}  // namespace

TEST_CASE("damping of a momentum eigenstate") {
  const auto spec = build_space(63, 0.411);
  const auto p = make_params(0.0, 0.5, 0.411);
  const auto rho = dense_lindblad_oracle(pure(QuantumState::basis(spec, 20)), p, spec, 1);
  CHECK(std::abs(mean_n(rho, spec) - 10.0) < 1e-6);
  // Populations thin binomially with survival probability gamma.
  for (int k = 0; k <= 20; ++k) {
    const auto i = static_cast<Eigen::Index>(spec.index_of(k));
    CHECK(std::abs(rho(i, i).real() - binomial(20, k, 0.5)) < 1e-7);
  }
  CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
  CHECK(hermiticity_defect(rho) < 1e-12);
}

TEST_CASE("mirror damping on the negative side") {
  const auto spec = build_space(41, 0.3);
  const auto rho = dense_lindblad_oracle(pure(QuantumState::basis(spec, -12)), make_params(0.0, 0.25, 0.3), spec, 1);
  CHECK(std::abs(mean_n(rho, spec) + 3.0) < 1e-6);
}

TEST_CASE("purity is preserved without dissipation") {
  const auto spec = build_space(31, 0.411);
  std::vector<cplx> amp(31);
  amp[spec.index_of(2)] = 0.6;
  amp[spec.index_of(-3)] = cplx(0.0, 0.8);
  const auto rho = dense_lindblad_oracle(pure(QuantumState(amp)), make_params(2.5, 1.0, 0.411), spec, 3);
  CHECK(std::abs((rho * rho).trace().real() - 1.0) < 1e-10);
  CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
}

TEST_CASE("dissipation keeps a valid density matrix") {
  const auto spec = build_space(33, 0.411);
  const auto rho = dense_lindblad_oracle(initial_mixture(spec), make_params(7.0, 0.3, 0.411), spec, 3);
  CHECK_NOTHROW(check_density(rho, 33));
  CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
  const auto d = oracle_distribution(rho, spec);
  double total = 0.0;
  for (double v : d.prob) {
    CHECK(v >= -1e-12);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("input validation") {
  const auto big = build_space(65, 0.3);
  const auto spec = build_space(9, 0.3);
  const auto p = make_params(1.0, 0.5, 0.3);
  CHECK_THROWS_AS(dense_lindblad_oracle(initial_mixture(big), p, big, 1), ConfigError);
  CHECK_THROWS_AS(dense_lindblad_oracle(initial_mixture(spec), p, spec, 1, 2e-3), ConfigError);
  CHECK_THROWS_AS(dense_lindblad_oracle(initial_mixture(spec), make_params(1.0, 0.0, 0.3), spec, 1), ConfigError);

  DensityMatrix bad = initial_mixture(spec);
  bad(0, 0) += 0.5;
  CHECK_THROWS_AS(dense_lindblad_oracle(bad, p, spec, 1), std::invalid_argument);
  DensityMatrix neg = DensityMatrix::Zero(9, 9);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(check_density(neg, 9), std::invalid_argument);
  CHECK_THROWS_AS(check_density(initial_mixture(spec), 11), std::invalid_argument);
}

TEST_CASE("kick matrix agrees with the FFT kick") {
  const auto spec = build_space(27, 0.35);
  const auto p = make_params(4.0, 0.5, 0.35, 0.7, 1.1);
  const auto u = kick_matrix(p, spec);
  const quantum::KickOperator op(p, spec);
  double worst = 0.0;
  for (int n = -13; n <= 13; ++n) {
    auto s = QuantumState::basis(spec, n);
    op.apply(s.amplitudes());
    const auto col = static_cast<Eigen::Index>(spec.index_of(n));
    for (std::size_t i = 0; i < s.dim(); ++i)
      worst = std::max(worst, std::abs(u(static_cast<Eigen::Index>(i), col) - s[i]));
  }
  CHECK(worst < 1e-12);
  CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(27, 27)).norm() < 1e-12);
}

TEST_CASE("trajectory ensemble reproduces the oracle") {
  const double tau = 0.411;
  const auto spec = build_space(21, tau);
  const auto p = make_params(2.5, 0.7, tau);
  const int periods = 3;
  const int count = 4000;
  const auto rho = dense_lindblad_oracle(initial_mixture(spec), p, spec, periods);
  const auto exact = oracle_distribution(rho, spec);
  const auto batch = quantum::run_batch(p, spec, periods, count, 2024);
  const auto est = quantum::batch_distribution(batch, spec);
  double tv = 0.0, se_half = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    tv += 0.5 * std::abs(est.prob[i] - exact.prob[i]);
    const double var = batch.diag_sq_sum[i] / count - est.prob[i] * est.prob[i];
    se_half += 0.5 * std::sqrt(std::max(var, 0.0) / (count - 1));
  }
  CHECK(tv < 3.0 * se_half);
}
