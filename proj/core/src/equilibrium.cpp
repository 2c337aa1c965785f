#include "latvol/equilibrium.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <mutex>
#include <thread>
#include <tuple>

namespace latvol {

namespace {

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i, t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Eigen::Vector3d vec(IntVec3 r) { return {double(r.x), double(r.y), double(r.z)}; }

// Preconditioned CG on h x = b. Returns false on stagnation or nonpositive
// curvature; x is then meaningless.
bool pcg(const BlockSparseMatrix& h, const SparseCholesky& m, const Eigen::VectorXd& b, Eigen::VectorXd& x,
         int max_iterations, double tolerance, int& iterations) {
  const double stop = tolerance * b.norm();
  x = m.solve(b);
  Eigen::VectorXd r = b - h.multiply(x);
  Eigen::VectorXd z = m.solve(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iterations; ++it) {
    if (r.norm() <= stop) return true;
    ++iterations;
    const Eigen::VectorXd hp = h.multiply(p);
    const double php = p.dot(hp);
    if (!(php > 0.0)) return false;
    const double alpha = rz / php;
    x += alpha * p;
    r -= alpha * hp;
    z = m.solve(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return r.norm() <= stop;
}

}  // namespace

NewtonResult newton_solve(const EnergyFunction& energy, DeformationState y0, const NewtonConfig& cfg) {
  NewtonResult out{std::move(y0), {}};
  NewtonReport& rep = out.report;
  SparseCholesky chol;
  for (int it = 0;; ++it) {
    const EnergyAssembly e = energy(out.state, kAllParts);
    const double res = e.gradient.size() ? e.gradient.cwiseAbs().maxCoeff() : 0.0;
    rep.residuals.push_back(res);
    rep.energies.push_back(e.value);
    rep.iterations = it;
    if (!std::isfinite(res) || !std::isfinite(e.value)) {
      rep.message = "non-finite energy or gradient";
      return out;
    }
    if (res <= cfg.gradient_tolerance) {
      rep.converged = true;
      rep.message = "converged";
      return out;
    }
    if (it >= cfg.max_iterations) {
      rep.message = "no convergence after " + std::to_string(it) + " iterations";
      return out;
    }
    Eigen::VectorXd delta;
    bool solved = false;
    if (cfg.reuse_factorization && rep.factorizations > 0)
      solved = pcg(e.hessian, chol, -e.gradient, delta, cfg.cg_max_iterations, cfg.cg_relative_tolerance,
                   rep.cg_iterations);
    if (!solved) {
      ++rep.factorizations;
      if (!chol.factorize(e.hessian)) {
        rep.message = "Hessian not positive definite at iteration " + std::to_string(it);
        return out;
      }
      rep.relative_min_pivot = chol.relative_min_pivot();
      delta = chol.solve(-e.gradient);
    }

    // Energies near the minimum agree to rounding, so allow a relative slack.
    const double slack = 1e-12 * std::max(1.0, std::abs(e.value));
    double alpha = 1.0;
    DeformationState trial = out.state;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h, alpha *= 0.5) {
      trial.y = out.state.y + alpha * delta;
      const double v = energy(trial, kValue).value;
      if (std::isfinite(v) && v <= e.value + slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.message = "line search failed at iteration " + std::to_string(it);
      return out;
    }
    out.state.y = std::move(trial.y);
  }
}

bool is_stable(SparseCholesky& chol, const BlockSparseMatrix& h, double pivot_tolerance) {
  return chol.factorize(h) && chol.relative_min_pivot() >= pivot_tolerance;
}

bool is_stable(const BlockSparseMatrix& h, double pivot_tolerance) {
  SparseCholesky chol;
  return is_stable(chol, h, pivot_tolerance);
}

Eigen::Matrix3d fourier_symbol(const Eigen::Vector3d& k, const Eigen::Matrix3d& F, const CrystalBasis& basis,
                               const std::vector<IntVec3>& directions, const PairPotential& potential) {
  const Eigen::Matrix3d FA = F * basis.A;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (IntVec3 r : directions) {
    const double s = std::sin(0.5 * k.dot(vec(r)));
    h += 4.0 * s * s * potential.hessian(FA * vec(r));
  }
  return h;
}

bool atomistic_stability_fourier(const Eigen::Matrix3d& F, const CrystalBasis& basis,
                                 const std::vector<IntVec3>& directions, const PairPotential& potential,
                                 int grid) {
  if (grid < 2) throw std::invalid_argument("atomistic_stability_fourier: grid must be >= 2");
  // H(k) is even in r and in k: sum over one of each +-r, doubled, and skip -k.
  const std::vector<IntVec3> half = canonical_half(directions);
  const Eigen::Matrix3d FA = F * basis.A;
  std::vector<Eigen::Matrix3d> hr(half.size());
  double scale = 0.0;
  for (std::size_t d = 0; d < half.size(); ++d) {
    hr[d] = 2.0 * potential.hessian(FA * vec(half[d]));
    scale += hr[d].cwiseAbs().maxCoeff();
  }
  const double tol = 1e-12 * std::max(scale, 1e-300);

  const double w = 2.0 * std::numbers::pi / grid;
  const int lo = -grid / 2, hi = lo + grid;
  for (int m1 = lo; m1 < hi; ++m1)
    for (int m2 = lo; m2 < hi; ++m2)
      for (int m3 = lo; m3 < hi; ++m3) {
        if (m1 == 0 && m2 == 0 && m3 == 0) continue;
        // m and -m (mod grid) give the same symbol.
        const int n1 = (-m1 - lo) % grid + lo, n2 = (-m2 - lo) % grid + lo, n3 = (-m3 - lo) % grid + lo;
        if (std::tie(n1, n2, n3) < std::tie(m1, m2, m3)) continue;
        Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
        for (std::size_t d = 0; d < half.size(); ++d) {
          const IntVec3 r = half[d];
          const std::int64_t kr = m1 * r.x + m2 * r.y + m3 * r.z;
          const double s = std::sin(0.5 * w * double(kr));
          h += (2.0 * s * s) * hr[d];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
        es.computeDirect(h, Eigen::EigenvaluesOnly);
        if (!(es.eigenvalues()(0) > tol)) return false;
      }
  return true;
}

bool torus_stability(const Eigen::Matrix3d& F, const CrystalBasis& basis, const std::vector<IntVec3>& directions,
                     const PairPotential& potential, int n) {
  if (n < 2) throw std::invalid_argument("torus_stability: n must be >= 2");
  const std::vector<IntVec3> half = canonical_half(directions);
  const Eigen::Matrix3d FA = F * basis.A;
  const int ns = n * n * n;
  auto wrap = [n](std::int64_t v) { return int(((v % n) + n) % n); };
  auto index = [&](std::int64_t a, std::int64_t b, std::int64_t c) { return (wrap(a) * n + wrap(b)) * n + wrap(c); };
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3 * ns, 3 * ns);
  for (IntVec3 r : half) {
    const Eigen::Matrix3d k = potential.hessian(FA * vec(r));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const int i = index(a, b, c), j = index(a + r.x, b + r.y, c + r.z);
          h.block<3, 3>(3 * i, 3 * i) += k;
          h.block<3, 3>(3 * j, 3 * j) += k;
          h.block<3, 3>(3 * i, 3 * j) -= k;
          h.block<3, 3>(3 * j, 3 * i) -= k;
        }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double tol = 1e-9 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  // Three translation modes sit at zero; everything else must be positive.
  for (int i = 0; i < 3; ++i)
    if (std::abs(ev(i)) > tol) return false;
  return ev(3) > tol;
}

Eigen::Matrix3d stability_template(double t, double s) {
  Eigen::Matrix3d F;
  F << 1.0 + t, 0.05, 0.02, 0.0, 1.0 + s, 0.01, 0.0, 0.0, 1.0;
  return F;
}

std::vector<Segment2> marching_squares(const std::vector<double>& xs, const std::vector<double>& ys,
                                       const std::vector<std::uint8_t>& inside) {
  const std::size_t nx = xs.size(), ny = ys.size();
  if (inside.size() != nx * ny) throw std::invalid_argument("marching_squares: size mismatch");
  auto in = [&](std::size_t i, std::size_t j) { return inside[i * ny + j] != 0; };
  std::vector<Segment2> out;
  for (std::size_t i = 0; i + 1 < nx; ++i)
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const bool c00 = in(i, j), c10 = in(i + 1, j), c11 = in(i + 1, j + 1), c01 = in(i, j + 1);
      const double xm = 0.5 * (xs[i] + xs[i + 1]), ym = 0.5 * (ys[j] + ys[j + 1]);
      // Edge midpoints: bottom, right, top, left.
      const std::array<std::pair<double, double>, 4> mid{
          {{xm, ys[j]}, {xs[i + 1], ym}, {xm, ys[j + 1]}, {xs[i], ym}}};
      const std::array<bool, 4> cut{c00 != c10, c10 != c11, c01 != c11, c00 != c01};
      const int ncut = cut[0] + cut[1] + cut[2] + cut[3];
      auto seg = [&](int a, int b) {
        out.push_back({mid[a].first, mid[a].second, mid[b].first, mid[b].second});
      };
      if (ncut == 2) {
        int a = -1, b = -1;
        for (int e = 0; e < 4; ++e)
          if (cut[e]) (a < 0 ? a : b) = e;
        seg(a, b);
      } else if (ncut == 4) {
        // Saddle: cut off the (0,0) and (1,1) corners.
        seg(0, 3);
        seg(1, 2);
      }
    }
  return out;
}

StabilityResult stability_scan(const CoupledModel& model, const PairPotential& potential,
                               const StabilityScan& scan, int threads) {
  if (model.config.vacancy) throw std::invalid_argument("stability_scan: defect-free model required");
  if (!(scan.step > 0.0) || scan.t_max < scan.t_min || scan.s_max < scan.s_min)
    throw std::invalid_argument("stability_scan: bad grid");
  StabilityResult res;
  auto axis = [&](double lo, double hi) {
    std::vector<double> v;
    const int n = int(std::floor((hi - lo) / scan.step + 1e-9)) + 1;
    for (int i = 0; i < n; ++i) v.push_back(lo + i * scan.step);
    return v;
  };
  res.t_values = axis(scan.t_min, scan.t_max);
  res.s_values = axis(scan.s_min, scan.s_max);
  const std::size_t ns = res.s_values.size();
  res.points.resize(res.t_values.size() * ns);

  std::vector<IntVec3> full;
  for (IntVec3 r : model.directions) {
    full.push_back(r);
    full.push_back(-r);
  }
  EnergyEvaluator eval(model, potential, EnergyKind::Coupled);
  // Builds the shared Hessian pattern before the workers start.
  if (scan.coupled) (void)eval(uniform_state(model, Eigen::Matrix3d::Identity()), kHessian);

  threads = std::max(1, threads);
  std::vector<std::unique_ptr<SparseCholesky>> chol(threads);
  for (auto& c : chol) c = std::make_unique<SparseCholesky>();
  parallel_for(int(res.points.size()), threads, [&](int p, int worker) {
    StabilityPoint& pt = res.points[p];
    pt.t = res.t_values[p / ns];
    pt.s = res.s_values[p % ns];
    const Eigen::Matrix3d F = stability_template(pt.t, pt.s);
    if (scan.coupled) pt.coupled = is_stable(*chol[worker], eval(uniform_state(model, F), kHessian).hessian);
    if (scan.fourier)
      pt.fourier = atomistic_stability_fourier(F, model.basis, full, potential, scan.fourier_grid);
  });

  std::vector<std::uint8_t> c(res.points.size()), f(res.points.size());
  for (std::size_t p = 0; p < res.points.size(); ++p) {
    c[p] = res.points[p].coupled;
    f[p] = res.points[p].fourier;
  }
  if (scan.coupled) res.coupled_boundary = marching_squares(res.t_values, res.s_values, c);
  if (scan.fourier) res.fourier_boundary = marching_squares(res.t_values, res.s_values, f);
  return res;
}

double w1inf_error(const CoupledModel& exact_model, const DeformationState& y_exact,
                   const CoupledModel& coupled_model, const DeformationState& y_h) {
  if (exact_model.domain.sites != coupled_model.domain.sites)
    throw std::invalid_argument("w1inf_error: models do not share the site list");
  const Eigen::Matrix3d& A = exact_model.basis.A;
  double worst = 0.0;
  for (const Bond& b : exact_model.bonds.bonds) {
    const Eigen::Vector3d de = site_position(exact_model, y_exact, b.j) - site_position(exact_model, y_exact, b.i);
    const Eigen::Vector3d dh = site_position(coupled_model, y_h, b.j) - site_position(coupled_model, y_h, b.i);
    const double len = (A * vec(exact_model.directions[b.dir])).norm();
    worst = std::max(worst, (dh - de).norm() / len);
  }
  return worst;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
  Eigen::MatrixXd M(x.size(), 2);
  Eigen::VectorXd b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope: non-positive value");
    M(i, 0) = 1.0;
    M(i, 1) = std::log(x[i]);
    b(i) = std::log(y[i]);
  }
  if (M.col(1).maxCoeff() == M.col(1).minCoeff()) throw std::invalid_argument("loglog_slope: x values all equal");
  return M.colPivHouseholderQr().solve(b)(1);
}

ConvergenceStudy convergence_study(const std::vector<int>& Ns, const std::vector<int>& Ks,
                                   const Eigen::Matrix3d& F, const PairPotential& potential,
                                   const ProblemConfig& base, const NewtonConfig& cfg, int threads) {
  ConvergenceStudy study;
  for (int N : Ns) {
    ProblemConfig ec = base;
    ec.N = N;
    ec.K = N;
    ec.vacancy = true;
    const CoupledModel exact = build_model(ec);
    EnergyEvaluator exact_eval(exact, potential, EnergyKind::Atomistic);
    const NewtonResult ex = newton_solve(
        [&](const DeformationState& s, unsigned parts) { return exact_eval(s, parts); },
        uniform_state(exact, F), cfg);

    std::vector<int> ks;
    for (int K : Ks)
      if (K >= 2 && K < N) ks.push_back(K);
    std::vector<ConvergenceRow> rows(ks.size());
    parallel_for(int(ks.size()), threads, [&](int q, int) {
      ConvergenceRow& row = rows[q];
      row.N = N;
      row.K = ks[q];
      if (!ex.report.converged) {
        row.message = "exact solve: " + ex.report.message;
        return;
      }
      ProblemConfig pc = ec;
      pc.K = ks[q];
      const CoupledModel model = build_model(pc);
      row.dofs = model.num_dofs();
      EnergyEvaluator eval(model, potential, EnergyKind::Coupled);
      const NewtonResult r = newton_solve(
          [&](const DeformationState& s, unsigned parts) { return eval(s, parts); }, uniform_state(model, F), cfg);
      row.newton_iterations = r.report.iterations;
      row.message = r.report.message;
      if (!r.report.converged) return;
      row.w1inf_error = w1inf_error(exact, ex.state, model, r.state);
      row.energy_error = std::abs(r.report.energies.back() - ex.report.energies.back());
      row.ok = true;
    });

    std::vector<double> d, w, e;
    for (const ConvergenceRow& row : rows) {
      study.rows.push_back(row);
      if (row.ok && row.w1inf_error > 0.0 && row.energy_error > 0.0) {
        d.push_back(row.dofs);
        w.push_back(row.w1inf_error);
        e.push_back(row.energy_error);
      }
    }
    if (d.size() >= 2 && *std::max_element(d.begin(), d.end()) > *std::min_element(d.begin(), d.end())) {
      study.w1inf_slopes.emplace_back(N, loglog_slope(d, w));
      study.energy_slopes.emplace_back(N, loglog_slope(d, e));
    }
  }
  return study;
}

}  // namespace latvol
