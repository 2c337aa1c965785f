#pragma once

#include <Eigen/Dense>

namespace latvol {

// Radial two-body potential phi(z), z the physical bond vector.
class PairPotential {
 public:
  virtual ~PairPotential() = default;

  // phi(s) and its first two derivatives at s = |z| > 0.
  virtual void radial(double s, double& phi, double& dphi, double& ddphi) const = 0;
  virtual double cutoff() const = 0;

  double value(const Eigen::Vector3d& z) const;
  Eigen::Vector3d gradient(const Eigen::Vector3d& z) const;
  Eigen::Matrix3d hessian(const Eigen::Vector3d& z) const;
  // Any of the outputs may be null.
  void evaluate(const Eigen::Vector3d& z, double* value, Eigen::Vector3d* gradient,
                Eigen::Matrix3d* hessian) const;
};

// phi(z) = -2 |z|^-6 + |z|^-12, minimum -1 at |z| = 1.
class LennardJones final : public PairPotential {
 public:
  explicit LennardJones(double cutoff = 3.2) : cutoff_(cutoff) {}
  void radial(double s, double& phi, double& dphi, double& ddphi) const override;
  double cutoff() const override { return cutoff_; }

 private:
  double cutoff_;
};

double lj(const Eigen::Vector3d& z);

}  // namespace latvol
