#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ratchet/model.hpp"
#include "ratchet/quantum.hpp"

namespace ratchet::oracle {

using DensityMatrix = Eigen::MatrixXcd;

/// Largest basis the dense integrator accepts.
inline constexpr int kMaxOracleDim = 64;
inline constexpr double kMaxOracleStep = 1e-3;

/// Kick unitary U_{mn} = (1/N) sum_j e^{-i m x_j} e^{-i (K/tau) V(x_j)} e^{i n x_j},
/// assembled by direct summation.
Eigen::MatrixXcd kick_matrix(const ModelParams& params, const quantum::HilbertSpec& spec);

/// The two jump operators L1 (lowers n >= 1) and L2 (raises n <= -1) with
/// coupling g = sqrt(-ln gamma), as sparse matrices on the truncated ladder.
std::pair<Eigen::SparseMatrix<std::complex<double>>, Eigen::SparseMatrix<std::complex<double>>> jump_operators(
    const ModelParams& params, const quantum::HilbertSpec& spec);

/// Dissipator -1/2 sum {L^dag L, rho} + sum L rho L^dag of the unit flight.
class LindbladGenerator {
 public:
  LindbladGenerator(const ModelParams& params, const quantum::HilbertSpec& spec);
  DensityMatrix operator()(const DensityMatrix& rho) const;

 private:
  std::vector<Eigen::SparseMatrix<std::complex<double>>> jumps_;
  Eigen::SparseMatrix<std::complex<double>> decay_;  // sum of L^dag L
};

/// Throws std::invalid_argument unless rho is a Hermitian, unit-trace,
/// positive semidefinite matrix of matching size.
void check_density(const DensityMatrix& rho, int dim);

/// Free-rotation unitary diag(exp(-i tau n^2 / 2)).
Eigen::MatrixXcd rotation_matrix(const quantum::HilbertSpec& spec);

/// Per period: classical RK4 with step <= dt over the unit dissipative
/// flight, then rho -> U rho U^dag for the kick and for the free rotation. Throws ConfigError for N above kMaxOracleDim, dt above
/// kMaxOracleStep, or gamma = 0.
DensityMatrix dense_lindblad_oracle(const DensityMatrix& rho0, const ModelParams& params,
                                    const quantum::HilbertSpec& spec, int periods, double dt = kMaxOracleStep);

/// Diagonal of rho as a normalized distribution over spec's cells.
MomentumDistribution oracle_distribution(const DensityMatrix& rho, const quantum::HilbertSpec& spec);

/// Uniform mixture of the admissible initial momentum eigenstates.
DensityMatrix initial_mixture(const quantum::HilbertSpec& spec);

double hermiticity_defect(const DensityMatrix& rho);

}  // namespace ratchet::oracle
