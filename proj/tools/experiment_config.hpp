#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "latvol/crystal_model.hpp"
#include "latvol/equilibrium.hpp"

namespace latvol::cli {

inline constexpr const char* kOutputFormatVersion = "latvol-output/1";

// Every parameter of every subcommand. Runs embed the full config in their
// output, so a saved output can be fed back through --config.
struct ExperimentConfig {
  // bondvol
  std::vector<std::int64_t> tet{0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::vector<std::int64_t> r{0, 0, 1};
  bool oracle = false;
  std::int64_t oracle_budget = 10'000'000;

  // model geometry (patchtest, stability, model)
  int N = 4;
  int K = 2;
  bool vacancy = false;
  int fine_width = 2;
  double cutoff = 3.2;
  bool cauchy_born = false;

  // converge
  std::vector<int> Ns{4, 6, 8};
  std::vector<int> Ks{2, 3, 4, 5, 6, 7};
  int converge_fine_width = 1;
  double w1inf_slope_bound = -0.7;
  double energy_slope_bound = -1.2;
  int max_iterations = 50;
  double gradient_tolerance = 1e-10;

  // deformation (patchtest, converge), row-major
  std::vector<double> F{1.0, 0.01, 0.02, 0.0, 1.0, 0.015, 0.0, 0.0, 1.0};

  // stability
  double t_min = -0.2, t_max = 0.2;
  double s_min = -0.2, s_max = 0.2;
  double step = 0.02;
  int fourier_grid = 32;

  std::uint64_t seed = 20260101;
  int threads = 1;

  Eigen::Matrix3d deformation() const;
  ProblemConfig problem() const;
  NewtonConfig newton() const;
  StabilityScan scan() const;
  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base = {});

}  // namespace latvol::cli
