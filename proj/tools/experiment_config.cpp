#include "experiment_config.hpp"

#include <set>
#include <stdexcept>

namespace latvol::cli {

namespace {

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Eigen::Matrix3d ExperimentConfig::deformation() const {
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = F.at(i);
  return m;
}

ProblemConfig ExperimentConfig::problem() const {
  ProblemConfig p;
  p.N = N;
  p.K = K;
  p.vacancy = vacancy;
  p.fine_width = fine_width;
  p.cutoff = cutoff;
  return p;
}

NewtonConfig ExperimentConfig::newton() const {
  NewtonConfig n;
  n.max_iterations = max_iterations;
  n.gradient_tolerance = gradient_tolerance;
  return n;
}

StabilityScan ExperimentConfig::scan() const {
  StabilityScan s;
  s.t_min = t_min;
  s.t_max = t_max;
  s.s_min = s_min;
  s.s_max = s_max;
  s.step = step;
  s.fourier_grid = fourier_grid;
  return s;
}

void ExperimentConfig::validate() const {
  if (tet.size() != 12) throw std::invalid_argument("tet needs 12 integers");
  if (r.size() != 3) throw std::invalid_argument("r needs 3 integers");
  if (F.size() != 9) throw std::invalid_argument("F needs 9 numbers");
  if (oracle_budget <= 0) throw std::invalid_argument("oracle_budget must be positive");
  if (K < 2 || N < K) throw std::invalid_argument("need 2 <= K <= N");
  if (fine_width < 0 || converge_fine_width < 0) throw std::invalid_argument("fine_width must be >= 0");
  if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be positive");
  if (Ns.empty()) throw std::invalid_argument("Ns is empty");
  for (int n : Ns)
    if (n < 3) throw std::invalid_argument("every N in Ns must be >= 3");
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("gradient_tolerance must be positive");
  if (!(step > 0.0) || t_max < t_min || s_max < s_min) throw std::invalid_argument("bad stability grid");
  if (fourier_grid < 2) throw std::invalid_argument("fourier_grid must be >= 2");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"tet", c.tet},
          {"r", c.r},
          {"oracle", c.oracle},
          {"oracle_budget", c.oracle_budget},
          {"N", c.N},
          {"K", c.K},
          {"vacancy", c.vacancy},
          {"fine_width", c.fine_width},
          {"cutoff", c.cutoff},
          {"cauchy_born", c.cauchy_born},
          {"Ns", c.Ns},
          {"Ks", c.Ks},
          {"converge_fine_width", c.converge_fine_width},
          {"w1inf_slope_bound", c.w1inf_slope_bound},
          {"energy_slope_bound", c.energy_slope_bound},
          {"max_iterations", c.max_iterations},
          {"gradient_tolerance", c.gradient_tolerance},
          {"F", c.F},
          {"t_min", c.t_min},
          {"t_max", c.t_max},
          {"s_min", c.s_min},
          {"s_max", c.s_max},
          {"step", c.step},
          {"fourier_grid", c.fourier_grid},
          {"seed", c.seed},
          {"threads", c.threads}};
}

ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  const nlohmann::json known = to_json(c);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key()) && it.key() != "format_version")
      throw std::invalid_argument("unknown config key: " + it.key());
  try {
    read(j, "tet", c.tet);
    read(j, "r", c.r);
    read(j, "oracle", c.oracle);
    read(j, "oracle_budget", c.oracle_budget);
    read(j, "N", c.N);
    read(j, "K", c.K);
    read(j, "vacancy", c.vacancy);
    read(j, "fine_width", c.fine_width);
    read(j, "cutoff", c.cutoff);
    read(j, "cauchy_born", c.cauchy_born);
    read(j, "Ns", c.Ns);
    read(j, "Ks", c.Ks);
    read(j, "converge_fine_width", c.converge_fine_width);
    read(j, "w1inf_slope_bound", c.w1inf_slope_bound);
    read(j, "energy_slope_bound", c.energy_slope_bound);
    read(j, "max_iterations", c.max_iterations);
    read(j, "gradient_tolerance", c.gradient_tolerance);
    read(j, "F", c.F);
    read(j, "t_min", c.t_min);
    read(j, "t_max", c.t_max);
    read(j, "s_min", c.s_min);
    read(j, "s_max", c.s_max);
    read(j, "step", c.step);
    read(j, "fourier_grid", c.fourier_grid);
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

}  // namespace latvol::cli
