#include "ratchet/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace ratchet::oracle {

using cplx = std::complex<double>;
using SparseC = Eigen::SparseMatrix<cplx>;

Eigen::MatrixXcd kick_matrix(const ModelParams& params, const quantum::HilbertSpec& spec) {
  const int n = spec.dim();
  Eigen::VectorXcd phase(n);
  for (int j = 0; j < n; ++j) {
    const double x = spec.position_at(static_cast<std::size_t>(j));
    phase(j) = std::polar(1.0, -potential(x, params) / params.tau());
  }
  Eigen::MatrixXcd u(n, n);
  for (int r = 0; r < n; ++r) {
    const int m = spec.n_at(static_cast<std::size_t>(r));
    for (int c = 0; c < n; ++c) {
      const int k = spec.n_at(static_cast<std::size_t>(c));
      cplx acc = 0.0;
      for (int j = 0; j < n; ++j) {
        const double x = spec.position_at(static_cast<std::size_t>(j));
        acc += std::polar(1.0, static_cast<double>(k - m) * x) * phase(j);
      }
      u(r, c) = acc / static_cast<double>(n);
    }
  }
  return u;
}

std::pair<SparseC, SparseC> jump_operators(const ModelParams& params, const quantum::HilbertSpec& spec) {
  const double g = quantum::jump_coupling(params.gamma());
  const int n = spec.dim();
  const int m = spec.max_n();
  std::vector<Eigen::Triplet<cplx>> lower;
  std::vector<Eigen::Triplet<cplx>> raise;
  // L1 = g sum_{k>=0} sqrt(k+1) |k><k+1|,  L2 = g sum_{k>=0} sqrt(k+1) |-k><-k-1|
  for (int k = 0; k < m; ++k) {
    const double amp = g * std::sqrt(static_cast<double>(k + 1));
    lower.emplace_back(static_cast<int>(spec.index_of(k)), static_cast<int>(spec.index_of(k + 1)), amp);
    raise.emplace_back(static_cast<int>(spec.index_of(-k)), static_cast<int>(spec.index_of(-k - 1)), amp);
  }
  SparseC l1(n, n);
  SparseC l2(n, n);
  l1.setFromTriplets(lower.begin(), lower.end());
  l2.setFromTriplets(raise.begin(), raise.end());
  return {std::move(l1), std::move(l2)};
}

Eigen::MatrixXcd rotation_matrix(const quantum::HilbertSpec& spec) {
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(spec.dim(), spec.dim());
  for (int i = 0; i < spec.dim(); ++i) {
    const double n = spec.n_at(static_cast<std::size_t>(i));
    r(i, i) = std::polar(1.0, -0.5 * spec.tau() * n * n);
  }
  return r;
}

LindbladGenerator::LindbladGenerator(const ModelParams& params, const quantum::HilbertSpec& spec) {
  auto [l1, l2] = jump_operators(params, spec);
  decay_ = SparseC(l1.adjoint()) * l1 + SparseC(l2.adjoint()) * l2;
  jumps_.push_back(std::move(l1));
  jumps_.push_back(std::move(l2));
}

DensityMatrix LindbladGenerator::operator()(const DensityMatrix& rho) const {
  DensityMatrix out = -0.5 * (decay_ * rho + rho * decay_);
  for (const auto& l : jumps_) {
    DensityMatrix lr = l * rho;
    out += lr * SparseC(l.adjoint());
  }
  return out;
}

double hermiticity_defect(const DensityMatrix& rho) { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

void check_density(const DensityMatrix& rho, int dim) {
  if (rho.rows() != dim || rho.cols() != dim) throw std::invalid_argument("density matrix has wrong shape");
  if (!rho.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
  if (hermiticity_defect(rho) > 1e-10) throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0)) > 1e-10) throw std::invalid_argument("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) throw std::invalid_argument("density matrix is not positive semidefinite");
}

DensityMatrix dense_lindblad_oracle(const DensityMatrix& rho0, const ModelParams& params,
                                    const quantum::HilbertSpec& spec, int periods, double dt) {
  if (spec.dim() > kMaxOracleDim)
    throw ConfigError("dim", "dense oracle is limited to N <= " + std::to_string(kMaxOracleDim));
  if (!(dt > 0.0) || dt > kMaxOracleStep) throw ConfigError("dt", "oracle step must be in (0, 1e-3]");
  if (periods < 0) throw ConfigError("periods", "period count must be >= 0");
  check_density(rho0, spec.dim());

  const Eigen::MatrixXcd u = rotation_matrix(spec) * kick_matrix(params, spec);
  const LindbladGenerator rhs(params, spec);
  const int steps = static_cast<int>(std::ceil(1.0 / dt - 1e-12));
  const double h = 1.0 / steps;

  DensityMatrix rho = rho0;
  for (int t = 0; t < periods; ++t) {
    for (int s = 0; s < steps; ++s) {
      const DensityMatrix k1 = rhs(rho);
      const DensityMatrix k2 = rhs(rho + (0.5 * h) * k1);
      const DensityMatrix k3 = rhs(rho + (0.5 * h) * k2);
      const DensityMatrix k4 = rhs(rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    rho = u * rho * u.adjoint();
  }
  return rho;
}

MomentumDistribution oracle_distribution(const DensityMatrix& rho, const quantum::HilbertSpec& spec) {
  MomentumDistribution d;
  const auto n = static_cast<std::size_t>(spec.dim());
  d.prob.resize(n);
  d.momentum.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
  for (std::size_t i = 0; i < n; ++i) {
    d.prob[i] = std::max(0.0, rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real()) / total;
    d.momentum[i] = spec.momentum_at(i);
  }
  d.edge_mass = quantum::outer_band_mass_prob(d.prob);
  return d;
}

DensityMatrix initial_mixture(const quantum::HilbertSpec& spec) {
  const auto support = quantum::initial_support(spec);
  DensityMatrix rho = DensityMatrix::Zero(spec.dim(), spec.dim());
  const double w = 1.0 / static_cast<double>(support.size());
  for (int n : support) {
    const auto i = static_cast<Eigen::Index>(spec.index_of(n));
    rho(i, i) = w;
  }
  return rho;
}

}  // namespace ratchet::oracle
