#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "latvol/energy.hpp"
#include "random_cases.hpp"

using namespace latvol;

namespace {

CoupledModel make(int N, int K, bool vacancy, bool cauchy_born = false) {
  ProblemConfig c;
  c.N = N;
  c.K = K;
  c.vacancy = vacancy;
  return build_model(c, CrystalBasis::fcc(), cauchy_born);
}

const CoupledModel& coupled_model() {
  static const CoupledModel m = make(4, 2, true);
  return m;
}

const CoupledModel& atomistic_model() {
  static const CoupledModel m = make(3, 3, true);
  return m;
}

DeformationState perturbed(const CoupledModel& m, std::mt19937_64& rng, double amp) {
  DeformationState s = uniform_state(m, latvol::testing::random_deformation(rng));
  std::uniform_real_distribution<double> d(-amp, amp);
  for (Eigen::Index i = 0; i < s.y.size(); ++i) s.y(i) += d(rng);
  return s;
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> d;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v / v.norm();
}

// Directional checks: g.v against a fourth-order central difference of E,
// H v against the same stencil applied to g.
void check_derivatives(const CoupledModel& m, EnergyKind kind, std::uint64_t seed) {
  const LennardJones lj;
  const EnergyEvaluator eval(m, lj, kind);
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 3; ++k) {
    const DeformationState s = perturbed(m, rng, 0.03);
    const EnergyAssembly e = eval(s);
    const Eigen::VectorXd v = random_unit(rng, s.y.size());
    const double h = 1e-3;
    auto at = [&](double t) {
      DeformationState p = s;
      p.y += t * v;
      return eval(p, kValue | kGradient);
    };
    const EnergyAssembly e2 = at(2 * h), e1 = at(h), em1 = at(-h), em2 = at(-2 * h);
    const double fd = (-e2.value + 8 * e1.value - 8 * em1.value + em2.value) / (12 * h);
    const double an = e.gradient.dot(v);
    EXPECT_LE(std::abs(fd - an), 1e-6 * std::max(1.0, std::abs(an)));
    const Eigen::VectorXd hv_fd = (-e2.gradient + 8 * e1.gradient - 8 * em1.gradient + em2.gradient) / (12 * h);
    const Eigen::VectorXd hv = e.hessian.multiply(v);
    EXPECT_LE((hv_fd - hv).norm(), 1e-5 * std::max(1.0, hv.norm()));
  }
}

}  // namespace

TEST(LennardJones, Examples) {
  EXPECT_DOUBLE_EQ(lj(Eigen::Vector3d(1, 0, 0)), -1.0);
  const LennardJones p;
  double phi, dphi, ddphi;
  p.radial(1.0, phi, dphi, ddphi);
  EXPECT_DOUBLE_EQ(dphi, 0.0);
  const double s0 = std::pow(0.5, 1.0 / 6.0);
  EXPECT_NEAR(lj(Eigen::Vector3d(0, s0, 0)), 0.0, 1e-14);
  // Truncation happens in the neighbor set, not in phi.
  EXPECT_DOUBLE_EQ(lj(Eigen::Vector3d(0, 0, 3.3)), -2 * std::pow(3.3, -6) + std::pow(3.3, -12));
}

TEST(LennardJones, RadialGradientAndFiniteDifferences) {
  const LennardJones p;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    Eigen::Vector3d z(d(rng), d(rng), d(rng));
    if (z.norm() < 0.8 || z.norm() > 3.1) continue;
    const Eigen::Vector3d g = p.gradient(z);
    EXPECT_NEAR(g.cross(z).norm(), 0.0, 1e-12 * std::max(1.0, g.norm()));
    const Eigen::Matrix3d H = p.hessian(z);
    EXPECT_NEAR((H - H.transpose()).norm(), 0.0, 1e-12);
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e(i) = h;
      const double fd = (p.value(z + e) - p.value(z - e)) / (2 * h);
      EXPECT_NEAR(fd, g(i), 1e-6 * std::max(1.0, std::abs(g(i))));
      const Eigen::Vector3d hd = (p.gradient(z + e) - p.gradient(z - e)) / (2 * h);
      EXPECT_LE((hd - H.col(i)).norm(), 1e-5 * std::max(1.0, H.col(i).norm()));
    }
  }
}

TEST(AtomisticEnergy, UniformStateIsAnEquilibrium) {
  const CoupledModel m = make(3, 3, false);
  const LennardJones p;
  std::mt19937_64 rng(42);
  const Eigen::Matrix3d F = latvol::testing::random_deformation(rng);
  const EnergyAssembly e = atomistic_energy(m, p, uniform_state(m, F), kGradient);
  EXPECT_LE(e.gradient.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AtomisticEnergy, VacancyBreaksTheUniformEquilibrium) {
  const CoupledModel& m = atomistic_model();
  const LennardJones p;
  const EnergyAssembly e = atomistic_energy(m, p, uniform_state(m, Eigen::Matrix3d::Identity()), kGradient);
  EXPECT_GT(e.gradient.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(AtomisticEnergy, DerivativesMatchFiniteDifferences) {
  check_derivatives(atomistic_model(), EnergyKind::Atomistic, 43);
}

TEST(CoupledEnergy, DerivativesMatchFiniteDifferences) {
  check_derivatives(coupled_model(), EnergyKind::Coupled, 44);
}

TEST(CoupledEnergy, HessianIsSymmetricAndPatternIsStable) {
  const CoupledModel& m = coupled_model();
  const LennardJones p;
  const EnergyEvaluator eval(m, p, EnergyKind::Coupled);
  std::mt19937_64 rng(45);
  const EnergyAssembly a = eval(perturbed(m, rng, 0.02));
  const EnergyAssembly b = eval(perturbed(m, rng, 0.02));
  EXPECT_TRUE(a.hessian.same_pattern(b.hessian));
  const Eigen::VectorXd u = random_unit(rng, a.gradient.size()), v = random_unit(rng, a.gradient.size());
  EXPECT_NEAR(u.dot(a.hessian.multiply(v)), v.dot(a.hessian.multiply(u)), 1e-10);
}

TEST(CoupledEnergy, IsDeterministic) {
  const CoupledModel& m = coupled_model();
  const LennardJones p;
  std::mt19937_64 rng(46);
  const DeformationState s = perturbed(m, rng, 0.02);
  const EnergyAssembly a = coupled_energy(m, p, s), b = coupled_energy(m, p, s);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.gradient, b.gradient);
  EXPECT_EQ(a.hessian.values(), b.hessian.values());
}

TEST(CoupledEnergy, ReducesToAtomisticWhenAtomisticRegionIsEverything) {
  const CoupledModel m = make(3, 3, true);
  const LennardJones p;
  std::mt19937_64 rng(47);
  for (int k = 0; k < 3; ++k) {
    const DeformationState s = perturbed(m, rng, 0.02);
    const EnergyAssembly c = coupled_energy(m, p, s), a = atomistic_energy(m, p, s);
    EXPECT_NEAR(c.value, a.value, 1e-12 * std::abs(a.value));
    EXPECT_LE((c.gradient - a.gradient).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CoupledEnergy, DirichletSitesFollowTheDeformation) {
  const CoupledModel& m = coupled_model();
  std::mt19937_64 rng(48);
  const DeformationState s = perturbed(m, rng, 0.05);
  const Eigen::Matrix3d FA = s.F * m.basis.A;
  for (std::size_t i = 0; i < m.domain.sites.size(); i += 11) {
    if (m.domain.kind[i] != SiteKind::Dirichlet) continue;
    const IntVec3 x = m.domain.sites[i];
    EXPECT_LE((site_position(m, s, int(i)) - FA * Eigen::Vector3d(double(x.x), double(x.y), double(x.z))).norm(),
              1e-14);
  }
}

TEST(PatchTest, ConsistentWeightsHaveNoGhostForce) {
  const CoupledModel m = make(4, 2, false);
  const LennardJones p;
  std::mt19937_64 rng(49);
  for (int k = 0; k < 2; ++k) {
    const Eigen::Matrix3d F = latvol::testing::random_deformation(rng);
    EXPECT_LE(patch_test(m, p, F), 1e-10 * mean_bond_force(m, p, F));
  }
  EXPECT_LE(patch_test(m, p, Eigen::Matrix3d::Identity()), 1e-10 * mean_bond_force(m, p, Eigen::Matrix3d::Identity()));
}

TEST(PatchTest, CauchyBornWeightsHaveGhostForces) {
  const CoupledModel m = make(4, 2, false, true);
  const LennardJones p;
  std::mt19937_64 rng(50);
  const Eigen::Matrix3d F = latvol::testing::random_deformation(rng);
  EXPECT_GE(patch_test(m, p, F), 1e-3 * mean_bond_force(m, p, F));
}
