#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"

using namespace latvol::cli;

namespace {

// --config is applied before the other flags so that explicit flags win.
std::string find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  // A previous run's output can be used as a config.
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  return from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig cfg;
  try {
    const std::string path = find_config_path(argc, argv);
    if (!path.empty()) cfg = load_config(path);
  } catch (const std::exception& e) {
    std::cerr << "latvol: " << e.what() << "\n";
    return kInvalidInput;
  }
  if (const char* env = std::getenv("LATVOL_THREADS")) {
    try {
      cfg.threads = std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "latvol: LATVOL_THREADS is not an integer\n";
      return kInvalidInput;
    }
  }

  CLI::App app{"Bond volumes and consistent atomistic/continuum coupling on the FCC lattice"};
  app.require_subcommand(1);
  std::string config_path, out_path;
  bool check = false;
  app.add_option("--config", config_path, "JSON config; explicit flags override it");
  app.add_option("--out", out_path, "Write the result here instead of stdout");
  app.add_option("--threads", cfg.threads, "Worker threads (default: LATVOL_THREADS or 1)");
  app.add_flag("--assert", check, "Exit 1 if the command's acceptance check fails");
  app.add_option("--seed", cfg.seed, "Random seed");

  auto* bondvol = app.add_subcommand("bondvol", "Effective bond volume Len(T, r) of a lattice tetrahedron");
  bondvol->add_option("--tet", cfg.tet, "12 integers: the four vertices")->expected(12);
  bondvol->add_option("--r", cfg.r, "3 integers: the bond direction")->expected(3);
  bondvol->add_flag("--oracle", cfg.oracle, "Also evaluate the brute-force sum");
  bondvol->add_option("--budget", cfg.oracle_budget, "Bond budget of the brute-force sum");

  auto geometry = [&](CLI::App* sub) {
    sub->add_option("--N", cfg.N, "Half-width of the free region in cube units");
    sub->add_option("--K", cfg.K, "Half-width of the atomistic region");
    sub->add_option("--fine-width", cfg.fine_width, "Width of the fully refined mesh shell");
    sub->add_flag("--cauchy-born", cfg.cauchy_born, "Use plain Cauchy-Born weights |T|");
  };
  auto* patch = app.add_subcommand("patchtest", "Ghost force of the coupled energy at a uniform deformation");
  geometry(patch);
  patch->add_option("--F", cfg.F, "9 numbers, row-major")->expected(9);

  auto* converge = app.add_subcommand("converge", "Errors of the coupled vacancy solution against the atomistic one");
  converge->add_option("--Ns", cfg.Ns, "Problem sizes")->delimiter(',');
  converge->add_option("--Ks", cfg.Ks, "Atomistic region sizes (rows with K >= N are skipped)")->delimiter(',');
  converge->add_option("--F", cfg.F, "9 numbers, row-major")->expected(9);
  converge->add_option("--fine-width", cfg.converge_fine_width, "Width of the fully refined mesh shell");
  converge->add_option("--tolerance", cfg.gradient_tolerance, "Newton gradient tolerance");
  converge->add_option("--max-iterations", cfg.max_iterations, "Newton iteration limit");

  auto* stability = app.add_subcommand("stability", "Stability regions of the coupled and the atomistic model");
  geometry(stability);
  stability->add_option("--step", cfg.step, "Grid step in t and s");
  stability->add_option("--fourier-grid", cfg.fourier_grid, "k-points per axis of the Fourier test");

  auto* selftest = app.add_subcommand("selftest", "Oracle and patch-test checks at fixed seeds");

  auto* model = app.add_subcommand("model", "Export the mesh, sites and effective volumes as JSON");
  geometry(model);
  model->add_flag("--vacancy", cfg.vacancy, "Remove the site at the origin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidInput;
  }

  std::ostringstream buf;
  int code = kOk;
  try {
    cfg.validate();
    if (*bondvol) code = cmd_bondvol(cfg, check, buf);
    else if (*patch) code = cmd_patchtest(cfg, check, buf);
    else if (*converge) code = cmd_converge(cfg, check, buf);
    else if (*stability) code = cmd_stability(cfg, check, buf);
    else if (*selftest) code = cmd_selftest(cfg, buf);
    else if (*model) code = cmd_model(cfg, buf);
  } catch (const std::invalid_argument& e) {
    std::cerr << "latvol: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "latvol: " << e.what() << "\n";
    return kSolverFailure;
  }

  if (out_path.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream f(out_path);
    if (!(f << buf.str())) {
      std::cerr << "latvol: cannot write " << out_path << "\n";
      return kInvalidInput;
    }
  }
  return code;
}
