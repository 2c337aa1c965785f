#include "latvol/potential.hpp"

#include <stdexcept>

namespace latvol {

void PairPotential::evaluate(const Eigen::Vector3d& z, double* value, Eigen::Vector3d* gradient,
                             Eigen::Matrix3d* hessian) const {
  const double s = z.norm();
  if (s < 1e-8) throw std::domain_error("PairPotential: coincident atoms");
  double phi, d1, d2;
  radial(s, phi, d1, d2);
  if (value) *value = phi;
  const Eigen::Vector3d u = z / s;
  if (gradient) *gradient = d1 * u;
  if (hessian) {
    const Eigen::Matrix3d uu = u * u.transpose();
    *hessian = d2 * uu + (d1 / s) * (Eigen::Matrix3d::Identity() - uu);
  }
}

double PairPotential::value(const Eigen::Vector3d& z) const {
  double v;
  evaluate(z, &v, nullptr, nullptr);
  return v;
}

Eigen::Vector3d PairPotential::gradient(const Eigen::Vector3d& z) const {
  Eigen::Vector3d g;
  evaluate(z, nullptr, &g, nullptr);
  return g;
}

Eigen::Matrix3d PairPotential::hessian(const Eigen::Vector3d& z) const {
  Eigen::Matrix3d h;
  evaluate(z, nullptr, nullptr, &h);
  return h;
}

void LennardJones::radial(double s, double& phi, double& dphi, double& ddphi) const {
  const double i2 = 1.0 / (s * s);
  const double i6 = i2 * i2 * i2;
  const double i12 = i6 * i6;
  phi = -2.0 * i6 + i12;
  dphi = (12.0 * i6 - 12.0 * i12) / s;
  ddphi = (-84.0 * i6 + 156.0 * i12) * i2;
}

double lj(const Eigen::Vector3d& z) { return LennardJones().value(z); }

}  // namespace latvol
