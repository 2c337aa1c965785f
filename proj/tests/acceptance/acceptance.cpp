// Acceptance suite: one PASS/FAIL line per criterion.
//
//   latvol_acceptance [--only 1,4,9]

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "latvol/bond_volume.hpp"
#include "latvol/equilibrium.hpp"
#include "latvol/exact_sums.hpp"
#include "random_cases.hpp"

using namespace latvol;
using latvol::testing::random_deformation;
using latvol::testing::random_direction;
using latvol::testing::random_point;
using latvol::testing::random_tet;
using latvol::testing::tet_volume;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

CoupledModel make(int N, int K, bool vacancy, bool cauchy_born = false, int fine_width = 2) {
  ProblemConfig c;
  c.N = N;
  c.K = K;
  c.vacancy = vacancy;
  c.fine_width = fine_width;
  return build_model(c, CrystalBasis::fcc(), cauchy_born);
}

Eigen::Matrix3d shear_F() {
  Eigen::Matrix3d F;
  F << 1, 0.01, 0.02, 0, 1, 0.015, 0, 0, 1;
  return F;
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  const auto dirs = latvol::testing::all_nonzero_component_directions(3);
  double worst = 0.0;
  long pairs = 0, bad = 0;
  for (int k = 0; k < 200; ++k) {
    const LatticeTet t = random_tet(rng, -5, 5);
    const double scale = std::max(1.0, tet_volume(t));
    for (IntVec3 r : dirs) {
      const double err = std::abs(len_tetra(t, r) - len_bruteforce(t, r)) / scale;
      worst = std::max(worst, err);
      bad += err > 1e-9;
      ++pairs;
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs <= 600.0,
          fmt("%ld pairs, %ld over tolerance, worst scaled error %.2e, %.1f s", pairs, bad, worst, secs)};
}

Outcome invariance_suite() {
  std::mt19937_64 rng(102);
  const int cases = 60;
  double gcd = 0, shift = 0, rev = 0, split = 0;
  for (int k = 0; k < cases; ++k) {
    const LatticeTet t = random_tet(rng);
    const IntVec3 r = random_direction(rng);
    const double len = len_tetra(t, r);
    const std::int64_t m = 2 + k % 3;
    gcd = std::max(gcd, std::abs(len_tetra(t, m * r) - len));
    shift = std::max(shift, std::abs(len_tetra(translated(t, random_point(rng, -1000, 1000)), r) - len));
    rev = std::max(rev, std::abs(len_tetra(t, -r) - len));
  }
  // Cut through an edge midpoint: conv(A, B, C, D) = conv(A, M, C, D) + conv(M, B, C, D).
  for (int k = 0; k < cases; ++k) {
    LatticeTet t = random_tet(rng);
    const IntVec3 a = t.v[0];
    t.v[1] = a + 2 * random_point(rng, -3, 3);
    const IntVec3 mid{(t.v[0].x + t.v[1].x) / 2, (t.v[0].y + t.v[1].y) / 2, (t.v[0].z + t.v[1].z) / 2};
    LatticeTet p = t, q = t;
    p.v[1] = mid;
    q.v[0] = mid;
    const IntVec3 r = random_direction(rng);
    split = std::max(split, std::abs(len_tetra(p, r) + len_tetra(q, r) - len_tetra(t, r)));
  }
  const double worst = std::max({gcd, shift, rev, split});
  return {worst <= 1e-9, fmt("%d cases each; worst gcd %.1e, translation %.1e, reversal %.1e, splitting %.1e", cases,
                             gcd, shift, rev, split)};
}

Outcome sab_exactness() {
  long wrong = 0, deep = 0;
  int max_depth = 0;
  for (long b = 0; b <= 200; ++b) {
    for (long a = 0; a <= 200; ++a) {
      BigRational ref = 0;
      for (long i = 0; i < b; ++i) ref += BigRational(BigInt(i * ((a * i) % b)), BigInt(b));
      ref.canonicalize();
      const SabTrace t = s_ab_traced(a, b);
      wrong += t.value != ref;
      max_depth = std::max(max_depth, t.depth);
      if (a + b > 0 && t.depth > 2.0 * std::log2(double(a + b)) + 2.0) ++deep;
    }
  }
  return {wrong == 0 && deep == 0,
          fmt("41209 pairs, %ld mismatches, %ld over the depth bound, deepest %d", wrong, deep, max_depth)};
}

Outcome complexity() {
  std::mt19937_64 rng(104);
  const LatticeTet base = latvol::testing::nondegenerate_tet(rng);
  const IntVec3 r{3, -2, 1};
  std::vector<double> logs, med;
  std::string detail;
  double sink = 0.0;
  for (long s : {1L, 10L, 100L, 1000L, 10000L}) {
    LatticeTet t;
    for (int i = 0; i < 4; ++i) t.v[i] = s * base.v[i];
    std::vector<double> times;
    for (int rep = 0; rep < 41; ++rep) {
      const auto t0 = Clock::now();
      sink += len_tetra(t, r);
      times.push_back(seconds_since(t0));
    }
    std::nth_element(times.begin(), times.begin() + 20, times.end());
    logs.push_back(std::log(double(s)));
    med.push_back(times[20]);
    detail += fmt("s=%ld %.1fus; ", s, 1e6 * times[20]);
  }
  const double n = double(logs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    mx += logs[i] / n;
    my += med[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    sxy += (logs[i] - mx) * (med[i] - my);
    sxx += (logs[i] - mx) * (logs[i] - mx);
    syy += (med[i] - my) * (med[i] - my);
  }
  const double c1 = sxy / sxx;
  const double r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  detail += fmt("c1=%.2fus per log-unit, R^2=%.3f", 1e6 * c1, r2);
  if (!std::isfinite(sink)) detail += " (non-finite)";
  return {r2 >= 0.9, detail};
}

Outcome patch_tests() {
  std::mt19937_64 rng(105);
  std::vector<Eigen::Matrix3d> Fs;
  for (int k = 0; k < 5; ++k) Fs.push_back(random_deformation(rng));
  const LennardJones lj;
  double worst = 0.0, least_cb = 1e300;
  for (int N : {4, 6})
    for (int K : {2, 3}) {
      const CoupledModel m = make(N, K, false);
      const CoupledModel cb = make(N, K, false, true);
      for (const Eigen::Matrix3d& F : Fs) {
        const double scale = mean_bond_force(m, lj, F);
        worst = std::max(worst, patch_test(m, lj, F) / scale);
        least_cb = std::min(least_cb, patch_test(cb, lj, F) / scale);
      }
    }
  return {worst <= 1e-10 && least_cb >= 1e-3,
          fmt("worst relative ghost force %.2e; Cauchy-Born smallest %.2e", worst, least_cb)};
}

Outcome finite_differences() {
  const LennardJones lj;
  const CoupledModel coupled = make(4, 2, true);
  const CoupledModel atomistic = make(3, 3, true);
  std::mt19937_64 rng(106);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> amp(-0.03, 0.03);
  double worst_g = 0.0, worst_h = 0.0;
  for (int k = 0; k < 20; ++k) {
    const CoupledModel& m = k % 2 ? atomistic : coupled;
    const EnergyEvaluator eval(m, lj, k % 2 ? EnergyKind::Atomistic : EnergyKind::Coupled);
    DeformationState s = uniform_state(m, random_deformation(rng));
    for (Eigen::Index i = 0; i < s.y.size(); ++i) s.y(i) += amp(rng);
    const EnergyAssembly e = eval(s);
    for (int d = 0; d < 3; ++d) {
      Eigen::VectorXd v(s.y.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = nd(rng);
      v /= v.norm();
      const double h = 1e-3;
      auto at = [&](double t) {
        DeformationState p = s;
        p.y += t * v;
        return eval(p, kValue | kGradient);
      };
      const EnergyAssembly e2 = at(2 * h), e1 = at(h), em1 = at(-h), em2 = at(-2 * h);
      const double an = e.gradient.dot(v);
      const double fd = (-e2.value + 8 * e1.value - 8 * em1.value + em2.value) / (12 * h);
      worst_g = std::max(worst_g, std::abs(fd - an) / std::abs(an));
      const Eigen::VectorXd hv = e.hessian.multiply(v);
      const Eigen::VectorXd hv_fd = (-e2.gradient + 8 * e1.gradient - 8 * em1.gradient + em2.gradient) / (12 * h);
      worst_h = std::max(worst_h, (hv_fd - hv).norm() / hv.norm());
    }
  }
  return {worst_g <= 1e-6 && worst_h <= 1e-5,
          fmt("20 states x 3 directions; gradient %.2e, Hessian action %.2e", worst_g, worst_h)};
}

Outcome convergence() {
  const auto t0 = Clock::now();
  const LennardJones lj;
  ProblemConfig base;
  base.fine_width = 1;
  const ConvergenceStudy s = convergence_study({4, 6, 8}, {2, 3, 4, 5, 6, 7}, shear_F(), lj, base);
  const double secs = seconds_since(t0);
  bool solved = true;
  for (const ConvergenceRow& r : s.rows) {
    std::printf("  N=%d K=%d dof=%d w1inf=%.3e energy=%.3e newton=%d %s\n", r.N, r.K, r.dofs, r.w1inf_error,
                r.energy_error, r.newton_iterations, r.message.c_str());
    solved = solved && r.ok;
  }
  std::string detail;
  bool within = !s.w1inf_slopes.empty();
  for (std::size_t i = 0; i < s.w1inf_slopes.size(); ++i) {
    const double w = s.w1inf_slopes[i].second, e = s.energy_slopes[i].second;
    detail += fmt("N=%d slopes %.2f / %.2f; ", s.w1inf_slopes[i].first, w, e);
    within = within && w <= -0.7 && e <= -1.2;
  }
  for (int N : {4, 6, 8}) {
    const bool has = std::any_of(s.w1inf_slopes.begin(), s.w1inf_slopes.end(), [&](auto p) { return p.first == N; });
    if (!has) detail += fmt("N=%d no slope (DoF constant over K); ", N);
  }
  detail += fmt("%.0f s", secs);
  return {solved && within && secs <= 1800.0, detail};
}

Outcome stability_containment() {
  const auto t0 = Clock::now();
  const LennardJones lj;
  const CoupledModel m = make(6, 3, false);
  const StabilityResult res = stability_scan(m, lj, StabilityScan{}, 1);
  int coupled = 0, fourier = 0, violations = 0;
  for (const StabilityPoint& p : res.points) {
    coupled += p.coupled;
    fourier += p.fourier;
    violations += p.fourier && !p.coupled;
  }
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  const auto R = neighbor_set(CrystalBasis::fcc(), 3.2);
  int agree = 0;
  for (int k = 0; k < 10; ++k) {
    const Eigen::Matrix3d F = stability_template(d(rng), d(rng));
    agree += atomistic_stability_fourier(F, CrystalBasis::fcc(), R, lj, 4) ==
             torus_stability(F, CrystalBasis::fcc(), R, lj, 4);
  }
  return {res.points.size() == 441 && violations == 0 && agree == 10,
          fmt("%zu points: coupled stable %d, Fourier stable %d, containment violations %d; torus agreement %d/10; "
              "%.0f s",
              res.points.size(), coupled, fourier, violations, agree, seconds_since(t0))};
}

Outcome degenerate_coupling() {
  const LennardJones lj;
  const CoupledModel m = make(4, 4, true);
  const EnergyEvaluator a(m, lj, EnergyKind::Atomistic), c(m, lj, EnergyKind::Coupled);
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> amp(-0.03, 0.03);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    DeformationState s = uniform_state(m, random_deformation(rng));
    for (Eigen::Index i = 0; i < s.y.size(); ++i) s.y(i) += amp(rng);
    const double ea = a(s, kValue).value, ec = c(s, kValue).value;
    worst = std::max(worst, std::abs(ea - ec) / std::abs(ea));
  }
  return {m.mesh.tets.empty() && worst <= 1e-12, fmt("10 states, worst relative difference %.2e", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else {
      std::fprintf(stderr, "usage: %s [--only 1,2,...]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle equivalence of Len", oracle_equivalence},
      {"invariance suite", invariance_suite},
      {"S_ab exactness and depth", sab_exactness},
      {"logarithmic complexity", complexity},
      {"patch test", patch_tests},
      {"finite-difference consistency", finite_differences},
      {"convergence study", convergence},
      {"stability containment", stability_containment},
      {"degenerate coupling", degenerate_coupling},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
