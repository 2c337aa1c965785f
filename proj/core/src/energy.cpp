#include "latvol/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace latvol {
namespace {

// Compensated (Neumaier) summation. Energies are sums of ~1e5 terms whose
// differences feed line searches and finite-difference checks.
struct NeumaierSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double total() const { return sum + carry; }
};

}  // namespace

struct EnergyEvaluator::LinearForm {
  int n = 0;
  std::array<int, 8> dof{};
  std::array<double, 8> coef{};
  Eigen::Vector3d constant = Eigen::Vector3d::Zero();
  // Sites with fixed values, resolved against F at evaluation time.
  int n_fixed = 0;
  std::array<int, 8> fixed_site{};
  std::array<double, 8> fixed_coef{};
};

DeformationState uniform_state(const CoupledModel& model, const Eigen::Matrix3d& F) {
  DeformationState s;
  s.F = F;
  s.y.resize(3 * model.num_dofs());
  const Eigen::Matrix3d FA = F * model.basis.A;
  for (int d = 0; d < model.num_dofs(); ++d) {
    const IntVec3 x = model.domain.sites[model.dof_site[d]];
    s.y.segment<3>(3 * d) = FA * Eigen::Vector3d(double(x.x), double(x.y), double(x.z));
  }
  return s;
}

Eigen::Vector3d site_position(const CoupledModel& model, const DeformationState& state, int site) {
  const SiteRep& rep = model.site_rep[site];
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
  for (int k = 0; k < rep.n; ++k) {
    const int p = rep.site[k];
    const int d = model.site_dof[p];
    if (d >= 0) {
      y += rep.weight[k] * state.y.segment<3>(3 * d);
    } else {
      y += rep.weight[k] * (state.F * model.basis.physical(model.domain.sites[p]));
    }
  }
  return y;
}

EnergyEvaluator::EnergyEvaluator(const CoupledModel& model, const PairPotential& potential,
                                 EnergyKind kind)
    : model_(model), potential_(potential), kind_(kind) {
  if (kind_ == EnergyKind::Coupled) {
    tet_inverse_.reserve(model_.mesh.tets.size());
    for (std::size_t t = 0; t < model_.mesh.tets.size(); ++t) {
      const LatticeTet tet = model_.mesh.tet(t);
      Eigen::Matrix3d e;
      for (int k = 0; k < 3; ++k) {
        const IntVec3 d = tet.v[k + 1] - tet.v[0];
        e.col(k) = Eigen::Vector3d(double(d.x), double(d.y), double(d.z));
      }
      tet_inverse_.push_back(e.inverse());
    }
  }
}

EnergyEvaluator::LinearForm EnergyEvaluator::bond_form(const Bond& b) const {
  LinearForm f;
  auto add = [&](int site, double sign) {
    const SiteRep& rep = model_.site_rep[site];
    for (int k = 0; k < rep.n; ++k) {
      const int p = rep.site[k];
      const double w = sign * rep.weight[k];
      const int d = model_.site_dof[p];
      if (d < 0) {
        f.fixed_site[f.n_fixed] = p;
        f.fixed_coef[f.n_fixed++] = w;
        continue;
      }
      int slot = 0;
      while (slot < f.n && f.dof[slot] != d) ++slot;
      if (slot == f.n) {
        f.dof[f.n] = d;
        f.coef[f.n++] = 0.0;
      }
      f.coef[slot] += w;
    }
  };
  add(b.j, 1.0);
  add(b.i, -1.0);
  return f;
}

void EnergyEvaluator::build_pattern() const {
  PatternBuilder pb(model_.num_dofs());
  for (std::size_t b = 0; b < model_.bonds.bonds.size(); ++b) {
    if (kind_ == EnergyKind::Coupled && model_.bonds.continuum[b]) continue;
    const LinearForm f = bond_form(model_.bonds.bonds[b]);
    for (int k = 0; k < f.n; ++k)
      for (int l = k; l < f.n; ++l) pb.add(f.dof[k], f.dof[l]);
  }
  if (kind_ == EnergyKind::Coupled) {
    for (const auto& q : model_.mesh.tets) {
      for (int k = 0; k < 4; ++k) {
        const int dk = model_.site_dof[model_.mesh.vertex_site[q[k]]];
        if (dk < 0) continue;
        for (int l = k; l < 4; ++l) {
          const int dl = model_.site_dof[model_.mesh.vertex_site[q[l]]];
          if (dl >= 0) pb.add(dk, dl);
        }
      }
    }
  }
  pattern_ = pb.build();
}

EnergyAssembly EnergyEvaluator::operator()(const DeformationState& state, unsigned parts) const {
  if (state.y.size() != 3 * model_.num_dofs())
    throw std::invalid_argument("EnergyEvaluator: state size does not match the model");
  const bool want_g = parts & kGradient;
  const bool want_h = parts & kHessian;
  EnergyAssembly out;
  if (want_g) out.gradient = Eigen::VectorXd::Zero(3 * model_.num_dofs());
  if (want_h) {
    if (!pattern_) build_pattern();
    out.hessian = *pattern_;
    out.hessian.set_zero();
  }
  const Eigen::Matrix3d FA = state.F * model_.basis.A;
  auto fixed_value = [&](int site) {
    const IntVec3 x = model_.domain.sites[site];
    return Eigen::Vector3d(FA * Eigen::Vector3d(double(x.x), double(x.y), double(x.z)));
  };

  NeumaierSum value;
  Eigen::Vector3d grad;
  Eigen::Matrix3d hess;
  for (std::size_t b = 0; b < model_.bonds.bonds.size(); ++b) {
    if (kind_ == EnergyKind::Coupled && model_.bonds.continuum[b]) continue;
    const LinearForm f = bond_form(model_.bonds.bonds[b]);
    Eigen::Vector3d z = Eigen::Vector3d::Zero();
    for (int k = 0; k < f.n; ++k) z += f.coef[k] * state.y.segment<3>(3 * f.dof[k]);
    for (int k = 0; k < f.n_fixed; ++k) z += f.fixed_coef[k] * fixed_value(f.fixed_site[k]);
    double phi;
    potential_.evaluate(z, &phi, (want_g && f.n) ? &grad : nullptr, (want_h && f.n) ? &hess : nullptr);
    value.add(phi);
    if (want_g)
      for (int k = 0; k < f.n; ++k) out.gradient.segment<3>(3 * f.dof[k]) += f.coef[k] * grad;
    if (want_h)
      for (int k = 0; k < f.n; ++k)
        for (int l = k; l < f.n; ++l) out.hessian.add(f.dof[k], f.dof[l], (f.coef[k] * f.coef[l]) * hess);
  }

  if (kind_ == EnergyKind::Coupled) {
    const int nd = static_cast<int>(model_.directions.size());
    for (std::size_t t = 0; t < model_.mesh.tets.size(); ++t) {
      const auto& q = model_.mesh.tets[t];
      std::array<int, 4> dof;
      std::array<Eigen::Vector3d, 4> yv;
      bool any_dof = false;
      for (int k = 0; k < 4; ++k) {
        const int s = model_.mesh.vertex_site[q[k]];
        dof[k] = model_.site_dof[s];
        yv[k] = dof[k] >= 0 ? Eigen::Vector3d(state.y.segment<3>(3 * dof[k])) : fixed_value(s);
        any_dof = any_dof || dof[k] >= 0;
      }
      Eigen::Matrix3d dy;
      for (int k = 0; k < 3; ++k) dy.col(k) = yv[k + 1] - yv[0];
      // G_T = dy * E^{-1}, with E the lattice edge matrix.
      const Eigen::Matrix3d G = dy * tet_inverse_[t];
      std::array<Eigen::Vector3d, 4> g_local;
      for (auto& g : g_local) g.setZero();
      std::array<std::array<Eigen::Matrix3d, 4>, 4> h_local;
      if (want_h)
        for (auto& row : h_local)
          for (auto& m : row) m.setZero();
      const bool local = any_dof && (want_g || want_h);
      for (int d = 0; d < nd; ++d) {
        const double w = model_.omega(t, d);
        if (w == 0.0) continue;
        const IntVec3 r = model_.directions[d];
        const Eigen::Vector3d rv(double(r.x), double(r.y), double(r.z));
        const Eigen::Vector3d z = G * rv;
        double phi;
        potential_.evaluate(z, &phi, local && want_g ? &grad : nullptr, local && want_h ? &hess : nullptr);
        value.add(w * phi);
        if (!local) continue;
        const Eigen::Vector3d c = tet_inverse_[t] * rv;
        const std::array<double, 4> beta{-c.sum(), c[0], c[1], c[2]};
        if (want_g)
          for (int k = 0; k < 4; ++k) g_local[k] += (w * beta[k]) * grad;
        if (want_h)
          for (int k = 0; k < 4; ++k)
            for (int l = k; l < 4; ++l) h_local[k][l] += (w * beta[k] * beta[l]) * hess;
      }
      if (!local) continue;
      for (int k = 0; k < 4; ++k) {
        if (dof[k] < 0) continue;
        if (want_g) out.gradient.segment<3>(3 * dof[k]) += g_local[k];
        if (want_h)
          for (int l = k; l < 4; ++l)
            if (dof[l] >= 0) out.hessian.add(dof[k], dof[l], h_local[k][l]);
      }
    }
  }
  out.value = value.total();
  return out;
}

EnergyAssembly atomistic_energy(const CoupledModel& model, const PairPotential& potential,
                                const DeformationState& state, unsigned parts) {
  return EnergyEvaluator(model, potential, EnergyKind::Atomistic)(state, parts);
}

EnergyAssembly coupled_energy(const CoupledModel& model, const PairPotential& potential,
                              const DeformationState& state, unsigned parts) {
  return EnergyEvaluator(model, potential, EnergyKind::Coupled)(state, parts);
}

double patch_test(const CoupledModel& model, const PairPotential& potential, const Eigen::Matrix3d& F) {
  const EnergyAssembly e = coupled_energy(model, potential, uniform_state(model, F), kGradient);
  return e.gradient.size() ? e.gradient.cwiseAbs().maxCoeff() : 0.0;
}

double mean_bond_force(const CoupledModel& model, const PairPotential& potential, const Eigen::Matrix3d& F) {
  const Eigen::Matrix3d FA = F * model.basis.A;
  std::vector<double> force(model.directions.size());
  for (std::size_t d = 0; d < model.directions.size(); ++d) {
    const IntVec3 r = model.directions[d];
    force[d] = potential.gradient(FA * Eigen::Vector3d(double(r.x), double(r.y), double(r.z))).norm();
  }
  double sum = 0.0;
  for (const Bond& b : model.bonds.bonds) sum += force[b.dir];
  return model.bonds.bonds.empty() ? 0.0 : sum / double(model.bonds.bonds.size());
}

}  // namespace latvol
