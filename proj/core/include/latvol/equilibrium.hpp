#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "latvol/energy.hpp"

namespace latvol {

struct NewtonConfig {
  int max_iterations = 50;
  // Max-norm of the gradient on the free degrees of freedom.
  double gradient_tolerance = 1e-10;
  // Halve the step while the energy increases, at most this many times.
  int max_halvings = 30;
  // Solve H delta = -g by conjugate gradients preconditioned with the last
  // Cholesky factor, refactorizing only when that stalls.
  bool reuse_factorization = true;
  int cg_max_iterations = 25;
  double cg_relative_tolerance = 1e-10;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residuals;
  std::vector<double> energies;
  double relative_min_pivot = 0.0;
  int factorizations = 0;
  int cg_iterations = 0;
  std::string message;
};

using EnergyFunction = std::function<EnergyAssembly(const DeformationState&, unsigned)>;

struct NewtonResult {
  DeformationState state;
  NewtonReport report;
};

NewtonResult newton_solve(const EnergyFunction& energy, DeformationState y0, const NewtonConfig& cfg = {});

// True iff the matrix is positive definite with every Cholesky pivot above
// pivot_tolerance times the largest diagonal entry.
bool is_stable(const BlockSparseMatrix& h, double pivot_tolerance = 1e-10);
// Same, reusing the symbolic analysis held by `chol`.
bool is_stable(SparseCholesky& chol, const BlockSparseMatrix& h, double pivot_tolerance = 1e-10);

// H(k) = sum_{r in R} 4 sin^2(k.r / 2) D^2 phi(F A r).
Eigen::Matrix3d fourier_symbol(const Eigen::Vector3d& k, const Eigen::Matrix3d& F, const CrystalBasis& basis,
                               const std::vector<IntVec3>& directions, const PairPotential& potential);

// Positive definiteness of H(k) on the grid k = 2 pi m / n, m in [-n/2, n/2)^3 \ {0}.
bool atomistic_stability_fourier(const Eigen::Matrix3d& F, const CrystalBasis& basis,
                                 const std::vector<IntVec3>& directions, const PairPotential& potential,
                                 int grid = 32);

// Direct check on the periodic lattice Z^3 / (n Z)^3: the Hessian at y_F is
// positive definite apart from the three translation modes.
bool torus_stability(const Eigen::Matrix3d& F, const CrystalBasis& basis, const std::vector<IntVec3>& directions,
                     const PairPotential& potential, int n);

// F = [[1 + t, 0.05, 0.02], [0, 1 + s, 0.01], [0, 0, 1]].
Eigen::Matrix3d stability_template(double t, double s);

struct StabilityScan {
  double t_min = -0.2, t_max = 0.2;
  double s_min = -0.2, s_max = 0.2;
  double step = 0.02;
  int fourier_grid = 32;
  bool coupled = true;
  bool fourier = true;
};

struct StabilityPoint {
  double t = 0.0;
  double s = 0.0;
  bool coupled = false;
  bool fourier = false;
};

struct Segment2 {
  double x0, y0, x1, y1;
};

struct StabilityResult {
  std::vector<double> t_values;
  std::vector<double> s_values;
  // Row-major: index = i_t * s_values.size() + i_s.
  std::vector<StabilityPoint> points;
  std::vector<Segment2> coupled_boundary;
  std::vector<Segment2> fourier_boundary;
};

// model must be defect free; `threads` workers evaluate grid points.
StabilityResult stability_scan(const CoupledModel& model, const PairPotential& potential,
                               const StabilityScan& scan, int threads = 1);

// Marching-squares boundary between true and false cells of a grid.
std::vector<Segment2> marching_squares(const std::vector<double>& xs, const std::vector<double>& ys,
                                       const std::vector<std::uint8_t>& inside);

// max over bonds of |D_b (y_h - y)| / |A r_b|. Both models must share the
// site list (same N and vacancy setting).
double w1inf_error(const CoupledModel& exact_model, const DeformationState& y_exact,
                   const CoupledModel& coupled_model, const DeformationState& y_h);

struct ConvergenceRow {
  int N = 0;
  int K = 0;
  int dofs = 0;
  double w1inf_error = 0.0;
  double energy_error = 0.0;
  int newton_iterations = 0;
  bool ok = false;
  std::string message;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  // Least-squares slopes of log(error) against log(DoF) for each N whose
  // successful rows span at least two distinct DoF counts.
  std::vector<std::pair<int, double>> w1inf_slopes;
  std::vector<std::pair<int, double>> energy_slopes;
};

// `base` supplies the mesh grading and cutoff; N, K and vacancy are set per
// row. The reference for each N is the purely atomistic model (K = N).
ConvergenceStudy convergence_study(const std::vector<int>& Ns, const std::vector<int>& Ks,
                                   const Eigen::Matrix3d& F, const PairPotential& potential,
                                   const ProblemConfig& base = {}, const NewtonConfig& cfg = {},
                                   int threads = 1);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace latvol
