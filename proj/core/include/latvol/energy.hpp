#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "latvol/crystal_model.hpp"
#include "latvol/potential.hpp"
#include "latvol/sparse.hpp"

namespace latvol {

// Deformation values on the free degrees of freedom; Dirichlet sites follow
// y(x) = F A x.
struct DeformationState {
  Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
  Eigen::VectorXd y;
};

DeformationState uniform_state(const CoupledModel& model, const Eigen::Matrix3d& F);
Eigen::Vector3d site_position(const CoupledModel& model, const DeformationState& state, int site);

enum EnergyParts : unsigned { kValue = 1u, kGradient = 2u, kHessian = 4u, kAllParts = 7u };

struct EnergyAssembly {
  double value = 0.0;
  Eigen::VectorXd gradient;
  BlockSparseMatrix hessian;
};

enum class EnergyKind { Atomistic, Coupled };

// Atomistic: E(y) = sum over all bonds of phi(D_b y).
// Coupled: E^h(y) = sum over B_a of phi(D_b y) + sum_T sum_r Omega_{T,r} phi(G_T r).
// Summation order is fixed, so results are reproducible bit for bit.
class EnergyEvaluator {
 public:
  EnergyEvaluator(const CoupledModel& model, const PairPotential& potential, EnergyKind kind);

  EnergyAssembly operator()(const DeformationState& state, unsigned parts = kAllParts) const;
  const CoupledModel& model() const { return model_; }

 private:
  struct LinearForm;
  LinearForm bond_form(const Bond& b) const;
  void build_pattern() const;

  const CoupledModel& model_;
  const PairPotential& potential_;
  EnergyKind kind_;
  std::vector<Eigen::Matrix3d> tet_inverse_;
  mutable std::optional<BlockSparseMatrix> pattern_;
};

EnergyAssembly atomistic_energy(const CoupledModel& model, const PairPotential& potential,
                                const DeformationState& state, unsigned parts = kAllParts);
EnergyAssembly coupled_energy(const CoupledModel& model, const PairPotential& potential,
                              const DeformationState& state, unsigned parts = kAllParts);

// Max-norm of the coupled gradient at y_F over the free degrees of freedom.
double patch_test(const CoupledModel& model, const PairPotential& potential, const Eigen::Matrix3d& F);

// Mean of |grad phi(F A r_b)| over all bonds b, the force scale of the patch test.
double mean_bond_force(const CoupledModel& model, const PairPotential& potential, const Eigen::Matrix3d& F);

}  // namespace latvol
