#include "latvol/crystal_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "latvol/bond_volume.hpp"

namespace latvol {

namespace {

using Tau = std::array<std::int64_t, 3>;

std::int64_t inf_norm(const Tau& t) {
  return std::max({std::abs(t[0]), std::abs(t[1]), std::abs(t[2])});
}

bool is_fcc(const CrystalBasis& basis) {
  Eigen::Matrix3d u;
  u << -1, 1, 1, 1, -1, 1, 1, 1, -1;
  return ((basis.A * u) - std::sqrt(2.0) * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12;
}

// Len values keyed by translation-normalized vertex set and direction.
struct LenKey {
  std::array<std::int64_t, 12> v;
  bool operator==(const LenKey&) const = default;
};

struct LenKeyHash {
  std::size_t operator()(const LenKey& k) const {
    std::size_t h = 1469598103934665603ull;
    for (std::int64_t x : k.v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
    return h;
  }
};

double cached_len(const LatticeTet& t, IntVec3 r) {
  static std::mutex mu;
  static std::unordered_map<LenKey, double, LenKeyHash> cache;
  std::array<IntVec3, 4> v = t.v;
  std::sort(v.begin(), v.end());
  LenKey key;
  for (int k = 0; k < 4; ++k) {
    IntVec3 d = v[k] - v[0];
    key.v[3 * k] = d.x;
    key.v[3 * k + 1] = d.y;
    key.v[3 * k + 2] = d.z;
  }
  key.v[0] = r.x;
  key.v[1] = r.y;
  key.v[2] = r.z;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  double value = len_tetra(t, r);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, value);
  return value;
}

// Lambda interval of the segment a + lambda d inside the closed box
// |tau|_inf <= h; returns false if empty. Bounds are num/den with den > 0.
struct Interval {
  std::int64_t lo_num = 0, lo_den = 1, hi_num = 1, hi_den = 1;
};

bool clip_to_box(const Tau& a, const Tau& d, std::int64_t h, Interval& out) {
  Interval iv;
  // Only lambda in [0, 1] matters to the callers.
  iv.lo_num = -1;
  iv.lo_den = 1;
  iv.hi_num = 2;
  iv.hi_den = 1;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0) {
      if (std::abs(a[i]) > h) return false;
      continue;
    }
    // -h <= a + lambda d <= h
    std::int64_t n1 = -h - a[i], n2 = h - a[i], den = d[i];
    if (den < 0) {
      std::swap(n1, n2);
      n1 = -n1;
      n2 = -n2;
      den = -den;
    }
    if (n1 * iv.lo_den > iv.lo_num * den) {
      iv.lo_num = n1;
      iv.lo_den = den;
    }
    if (n2 * iv.hi_den < iv.hi_num * den) {
      iv.hi_num = n2;
      iv.hi_den = den;
    }
  }
  if (iv.lo_num * iv.hi_den > iv.hi_num * iv.lo_den) return false;
  out = iv;
  return true;
}

// Does the segment meet the closed box in some lambda of the open range (0, 1)?
bool open_segment_meets_box(const Tau& a, const Tau& b, std::int64_t h) {
  Tau d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  Interval iv;
  if (!clip_to_box(a, d, h, iv)) return false;
  return iv.lo_num < iv.lo_den && iv.hi_num > 0;
}

// Closed segment meets the closed box.
bool closed_segment_meets_box(const Tau& a, const Tau& b, std::int64_t h) {
  Tau d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  Interval iv;
  if (!clip_to_box(a, d, h, iv)) return false;
  return iv.lo_num <= iv.lo_den && iv.hi_num >= 0;
}

// Index of the grid interval containing v, preferring the lower one on a
// breakpoint; -1 outside.
int interval_of(const std::vector<int>& grid, std::int64_t v2) {
  // v2 is in tau units (twice the cube coordinate).
  auto it = std::upper_bound(grid.begin(), grid.end(), v2, [](std::int64_t x, int g) { return x < 2 * std::int64_t(g); });
  int idx = static_cast<int>(it - grid.begin()) - 1;
  if (idx < 0) return -1;
  if (idx == static_cast<int>(grid.size()) - 1) {
    if (2 * std::int64_t(grid.back()) == v2) return idx - 1;
    return -1;
  }
  return idx;
}

struct TetPlanes {
  std::array<IntVec3, 4> n;
  std::array<std::int64_t, 4> d;
  std::array<std::int64_t, 4> scale;  // n_i . v_i - d_i > 0
};

TetPlanes tet_planes(const LatticeTet& t) {
  TetPlanes p;
  for (int i = 0; i < 4; ++i) {
    const IntVec3& a = t.v[(i + 1) % 4];
    const IntVec3& b = t.v[(i + 2) % 4];
    const IntVec3& c = t.v[(i + 3) % 4];
    IntVec3 n = cross(b - a, c - a);
    if (dot(n, t.v[i] - a) < 0) n = -n;
    p.n[i] = n;
    p.d[i] = dot(n, a);
    p.scale[i] = dot(n, t.v[i]) - p.d[i];
  }
  return p;
}

}  // namespace

CrystalBasis CrystalBasis::fcc() {
  const double s = 1.0 / std::sqrt(2.0);
  CrystalBasis b;
  b.A << 0, s, s, s, 0, s, s, s, 0;
  return b;
}

std::vector<IntVec3> neighbor_set(const CrystalBasis& basis, double cutoff) {
  if (!(cutoff > 0)) throw std::invalid_argument("neighbor_set: cutoff must be positive");
  // |A r| >= sigma_min |r|, so |r|_inf <= cutoff / sigma_min bounds the search.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(basis.A);
  const double smin = svd.singularValues().minCoeff();
  if (!(smin > 0)) throw std::invalid_argument("neighbor_set: singular basis");
  const std::int64_t m = static_cast<std::int64_t>(std::floor(cutoff / smin)) + 1;
  std::vector<IntVec3> out;
  for (std::int64_t i = -m; i <= m; ++i)
    for (std::int64_t j = -m; j <= m; ++j)
      for (std::int64_t k = -m; k <= m; ++k) {
        IntVec3 r{i, j, k};
        if (r == IntVec3{}) continue;
        if (basis.physical(r).norm() <= cutoff) out.push_back(r);
      }
  return out;
}

bool is_canonical(IntVec3 r) {
  for (int i = 0; i < 3; ++i)
    if (r[i] != 0) return r[i] > 0;
  return false;
}

std::vector<IntVec3> canonical_half(const std::vector<IntVec3>& directions) {
  std::vector<IntVec3> out;
  for (const IntVec3& r : directions)
    if (is_canonical(r)) out.push_back(r);
  return out;
}

std::array<std::int64_t, 3> to_tau(IntVec3 x) { return {x.y + x.z, x.x + x.z, x.x + x.y}; }

IntVec3 from_tau(const std::array<std::int64_t, 3>& t) {
  return {(-t[0] + t[1] + t[2]) / 2, (t[0] - t[1] + t[2]) / 2, (t[0] + t[1] - t[2]) / 2};
}

std::int64_t tau_norm(IntVec3 x) { return inf_norm(to_tau(x)); }

int DomainDecomposition::find(IntVec3 x) const {
  Tau t = to_tau(x);
  const std::int64_t e = tau_extent;
  if (inf_norm(t) > e) return -1;
  const std::int64_t w = 2 * e + 1;
  return lookup[static_cast<std::size_t>(((t[0] + e) * w + (t[1] + e)) * w + (t[2] + e))];
}

std::size_t DomainDecomposition::count(SiteKind k) const {
  return static_cast<std::size_t>(std::count(kind.begin(), kind.end(), k));
}

LatticeTet Mesh::tet(std::size_t t) const {
  const auto& q = tets[t];
  return LatticeTet{{vertices[q[0]], vertices[q[1]], vertices[q[2]], vertices[q[3]]}};
}

int Mesh::box_index(int i, int j, int k) const {
  const int n = static_cast<int>(num_intervals());
  return (i * n + j) * n + k;
}

std::size_t BondSets::count_continuum() const {
  return static_cast<std::size_t>(std::count(continuum.begin(), continuum.end(), 1));
}

DomainDecomposition build_domain(const ProblemConfig& cfg) {
  if (cfg.K < 2 || cfg.K > cfg.N) throw std::invalid_argument("build_domain: need 2 <= K <= N");
  DomainDecomposition dd;
  dd.N = cfg.N;
  dd.K = cfg.K;
  dd.vacancy = cfg.vacancy;
  // Bonds reach at most cutoff / sqrt(2) in cube units, i.e. sqrt(2) cutoff in tau.
  const std::int64_t reach = static_cast<std::int64_t>(std::floor(std::sqrt(2.0) * cfg.cutoff));
  dd.tau_extent = static_cast<int>(2 * cfg.N + reach);
  const std::int64_t e = dd.tau_extent;
  const std::int64_t w = 2 * e + 1;
  dd.lookup.assign(static_cast<std::size_t>(w * w * w), -1);
  for (std::int64_t a = -e; a <= e; ++a)
    for (std::int64_t b = -e; b <= e; ++b)
      for (std::int64_t c = -e; c <= e; ++c) {
        if (((a + b + c) & 1) != 0) continue;
        Tau t{a, b, c};
        IntVec3 x = from_tau(t);
        if (cfg.vacancy && x == IntVec3{}) continue;
        const std::int64_t n = inf_norm(t);
        SiteKind k = SiteKind::Continuum;
        if (n >= 2 * cfg.N) {
          k = SiteKind::Dirichlet;
        } else if (n < 2 * cfg.K) {
          k = SiteKind::Atomistic;
        }
        dd.lookup[static_cast<std::size_t>(((a + e) * w + (b + e)) * w + (c + e))] =
            static_cast<int>(dd.sites.size());
        dd.sites.push_back(x);
        dd.kind.push_back(k);
      }
  return dd;
}

Mesh build_mesh(const ProblemConfig& cfg, const DomainDecomposition& dd) {
  Mesh mesh;
  if (cfg.K >= cfg.N) return mesh;
  const int N = cfg.N, K = cfg.K;
  const int fine = std::min(K + cfg.fine_width, N);
  std::vector<int> pos;
  for (int p = 0; p <= fine; ++p) pos.push_back(p);
  for (int p = fine, h = 2; p < N; h *= 2) {
    p = std::min(p + h, N);
    pos.push_back(p);
  }
  for (auto it = pos.rbegin(); it != pos.rend(); ++it)
    if (*it != 0) mesh.grid.push_back(-*it);
  mesh.grid.insert(mesh.grid.end(), pos.begin(), pos.end());

  const int n = static_cast<int>(mesh.num_intervals());
  const std::int64_t span = 2 * N;
  const std::int64_t width = 2 * span + 1;
  std::vector<int> vertex_of(static_cast<std::size_t>(width * width * width), -1);
  auto vertex = [&](const Tau& t) {
    std::size_t key = static_cast<std::size_t>(((t[0] + span) * width + (t[1] + span)) * width + (t[2] + span));
    int& slot = vertex_of[key];
    if (slot < 0) {
      IntVec3 x = from_tau(t);
      int site = dd.find(x);
      if (site < 0) throw std::logic_error("build_mesh: vertex is not a lattice site");
      slot = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(x);
      mesh.vertex_site.push_back(site);
    }
    return slot;
  };
  auto add_tet = [&](std::array<int, 4> q) {
    LatticeTet t{{mesh.vertices[q[0]], mesh.vertices[q[1]], mesh.vertices[q[2]], mesh.vertices[q[3]]}};
    int o = orientation(t);
    if (o == 0) throw std::logic_error("build_mesh: degenerate tetrahedron");
    if (o < 0) std::swap(q[0], q[1]);
    mesh.tets.push_back(q);
  };
  auto less_tau = [&](int u, int v) { return to_tau(mesh.vertices[u]) < to_tau(mesh.vertices[v]); };
  // Prism with bottom (a0, a1, a2) and top (b0, b1, b2), a_i -- b_i edges.
  // Quad diagonals go through the smallest vertex, which keeps neighbouring
  // cells conforming.
  auto add_prism = [&](std::array<int, 3> a, std::array<int, 3> b) {
    int best = a[0];
    for (int v : a)
      if (less_tau(v, best)) best = v;
    for (int v : b)
      if (less_tau(v, best)) best = v;
    if (std::find(a.begin(), a.end(), best) == a.end()) std::swap(a, b);
    while (a[0] != best) {
      std::rotate(a.begin(), a.begin() + 1, a.end());
      std::rotate(b.begin(), b.begin() + 1, b.end());
    }
    add_tet({a[0], b[0], b[1], b[2]});
    int m12 = less_tau(a[1], b[2]) ? a[1] : b[2];
    int m21 = less_tau(a[2], b[1]) ? a[2] : b[1];
    if (less_tau(m12, m21)) {
      add_tet({a[0], a[1], a[2], b[2]});
      add_tet({a[0], a[1], b[2], b[1]});
    } else {
      add_tet({a[0], a[1], a[2], b[1]});
      add_tet({a[0], a[2], b[2], b[1]});
    }
  };

  mesh.box_first.assign(static_cast<std::size_t>(n) * n * n + 1, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const int b = mesh.box_index(i, j, k);
        mesh.box_first[b] = static_cast<int>(mesh.tets.size());
        const std::array<int, 3> idx{i, j, k};
        Tau lo, hi;
        bool inner = true;
        for (int a = 0; a < 3; ++a) {
          lo[a] = 2 * mesh.grid[idx[a]];
          hi[a] = 2 * mesh.grid[idx[a] + 1];
          if (lo[a] < -2 * K || hi[a] > 2 * K) inner = false;
        }
        if (inner) continue;
        std::array<int, 3> unit{};
        int n_unit = 0;
        for (int a = 0; a < 3; ++a) {
          unit[a] = (hi[a] - lo[a] == 2);
          n_unit += unit[a];
        }
        auto corner = [&](int bx, int by, int bz) {
          return vertex({bx ? hi[0] : lo[0], by ? hi[1] : lo[1], bz ? hi[2] : lo[2]});
        };
        if (n_unit == 3) {
          // Corners plus the six face centres: 8 corner tets, 12 edge tets and
          // the central octahedron cut along the axis-0 diagonal.
          auto face = [&](int axis, int side) {
            Tau t{lo[0] + 1, lo[1] + 1, lo[2] + 1};
            t[axis] = side ? hi[axis] : lo[axis];
            return vertex(t);
          };
          for (int c = 0; c < 8; ++c) {
            int bx = c & 1, by = (c >> 1) & 1, bz = (c >> 2) & 1;
            add_tet({corner(bx, by, bz), face(0, bx), face(1, by), face(2, bz)});
          }
          for (int axis = 0; axis < 3; ++axis) {
            const int u = (axis + 1) % 3, v = (axis + 2) % 3;
            for (int su = 0; su < 2; ++su)
              for (int sv = 0; sv < 2; ++sv) {
                std::array<int, 3> bits{};
                bits[u] = su;
                bits[v] = sv;
                bits[axis] = 0;
                int p0 = corner(bits[0], bits[1], bits[2]);
                bits[axis] = 1;
                int p1 = corner(bits[0], bits[1], bits[2]);
                add_tet({p0, p1, face(u, su), face(v, sv)});
              }
          }
          const int f0 = face(0, 0), f1 = face(0, 1);
          const std::array<int, 4> ring{face(1, 0), face(2, 0), face(1, 1), face(2, 1)};
          for (int q = 0; q < 4; ++q) add_tet({f0, f1, ring[q], ring[(q + 1) % 4]});
        } else if (n_unit == 2) {
          // 1 x 1 x L column: four prisms around the axis through the end-face
          // centres.
          int axis = 0;
          while (unit[axis]) ++axis;
          const int u = (axis + 1) % 3, v = (axis + 2) % 3;
          auto point = [&](int su, int sv, bool top) {
            Tau t;
            t[axis] = top ? hi[axis] : lo[axis];
            t[u] = su ? hi[u] : lo[u];
            t[v] = sv ? hi[v] : lo[v];
            return vertex(t);
          };
          auto centre = [&](bool top) {
            Tau t{lo[0] + 1, lo[1] + 1, lo[2] + 1};
            t[axis] = top ? hi[axis] : lo[axis];
            return vertex(t);
          };
          const int ring[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
          for (int q = 0; q < 4; ++q) {
            const int* p = ring[q];
            const int* r = ring[(q + 1) % 4];
            add_prism({point(p[0], p[1], false), point(r[0], r[1], false), centre(false)},
                      {point(p[0], p[1], true), point(r[0], r[1], true), centre(true)});
          }
        } else {
          // Kuhn split: one tet per monotone corner path.
          static constexpr int kPerm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                              {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
          for (const auto& perm : kPerm) {
            std::array<int, 3> bits{0, 0, 0};
            std::array<int, 4> q;
            q[0] = corner(0, 0, 0);
            for (int s = 0; s < 3; ++s) {
              bits[perm[s]] = 1;
              q[s + 1] = corner(bits[0], bits[1], bits[2]);
            }
            add_tet(q);
          }
        }
      }
  mesh.box_first.back() = static_cast<int>(mesh.tets.size());
  return mesh;
}

std::pair<DomainDecomposition, Mesh> build_vacancy_problem(int N, int K, const CrystalBasis& basis) {
  if (K < 2 || K >= N) throw std::invalid_argument("build_vacancy_problem: need 2 <= K < N");
  if (!is_fcc(basis)) throw std::invalid_argument("build_vacancy_problem: FCC basis required");
  ProblemConfig cfg;
  cfg.N = N;
  cfg.K = K;
  cfg.vacancy = true;
  DomainDecomposition dd = build_domain(cfg);
  Mesh mesh = build_mesh(cfg, dd);
  return {std::move(dd), std::move(mesh)};
}

bool segment_in_continuum(const DomainDecomposition& dd, IntVec3 a, IntVec3 b) {
  if (dd.K >= dd.N) return false;
  Tau ta = to_tau(a), tb = to_tau(b);
  const std::int64_t outer = 2 * dd.N;
  if (inf_norm(ta) > outer || inf_norm(tb) > outer) return false;
  Tau mid{ta[0] + tb[0], ta[1] + tb[1], ta[2] + tb[2]};
  if (inf_norm(mid) >= 2 * outer) return false;
  return !open_segment_meets_box(ta, tb, 2 * dd.K);
}

BondSets classify_bonds(const DomainDecomposition& dd, const Mesh& /*mesh*/,
                        const std::vector<IntVec3>& directions) {
  BondSets out;
  for (std::size_t i = 0; i < dd.sites.size(); ++i) {
    for (std::size_t d = 0; d < directions.size(); ++d) {
      const IntVec3 y = dd.sites[i] + directions[d];
      const int j = dd.find(y);
      if (j < 0) continue;
      out.bonds.push_back({static_cast<int>(i), j, static_cast<int>(d)});
      out.continuum.push_back(segment_in_continuum(dd, dd.sites[i], y) ? 1 : 0);
    }
  }
  return out;
}

EffectiveVolumes effective_volumes(const BondSets& bonds, const Mesh& mesh,
                                   const std::vector<IntVec3>& directions,
                                   const DomainDecomposition& dd) {
  EffectiveVolumes ev;
  ev.num_dirs = static_cast<int>(directions.size());
  ev.omega.assign(mesh.tets.size() * directions.size(), 0.0);
  if (mesh.tets.empty()) return ev;

  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const LatticeTet tet = mesh.tet(t);
    for (std::size_t d = 0; d < directions.size(); ++d) ev(t, int(d)) = cached_len(tet, directions[d]);
  }

  std::vector<SegmentAverager> averagers;
  averagers.reserve(mesh.tets.size());
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) averagers.emplace_back(mesh.tet(t));

  const std::int64_t outer = 2 * dd.N;
  const std::int64_t inner = 2 * dd.K;
  const int n = static_cast<int>(mesh.num_intervals());
  auto subtract = [&](IntVec3 a, int dir) {
    const IntVec3 r = directions[dir];
    const IntVec3 b = a + r;
    const Tau ta = to_tau(a), tb = to_tau(b);
    if (inf_norm(ta) < inner && inf_norm(tb) < inner) return;
    if (!closed_segment_meets_box(ta, tb, outer)) return;
    std::array<int, 3> lo_box, hi_box;
    for (int k = 0; k < 3; ++k) {
      std::int64_t lo = std::max(std::min(ta[k], tb[k]), -outer);
      std::int64_t hi = std::min(std::max(ta[k], tb[k]), outer);
      auto first = std::upper_bound(mesh.grid.begin(), mesh.grid.end(), lo,
                                    [](std::int64_t x, int g) { return x < 2 * std::int64_t(g); });
      auto last = std::lower_bound(mesh.grid.begin(), mesh.grid.end(), hi,
                                   [](int g, std::int64_t x) { return 2 * std::int64_t(g) < x; });
      // Boxes whose closed extent meets [lo, hi].
      lo_box[k] = std::max(0, static_cast<int>(first - mesh.grid.begin()) - 2);
      hi_box[k] = std::min(n - 1, static_cast<int>(last - mesh.grid.begin()));
    }
    for (int i = lo_box[0]; i <= hi_box[0]; ++i)
      for (int j = lo_box[1]; j <= hi_box[1]; ++j)
        for (int k = lo_box[2]; k <= hi_box[2]; ++k) {
          const int box = mesh.box_index(i, j, k);
          for (int t = mesh.box_first[box]; t < mesh.box_first[box + 1]; ++t) {
            const double avg = averagers[t](a, r);
            if (avg != 0.0) ev(t, dir) -= avg;
          }
        }
  };

  for (std::size_t b = 0; b < bonds.bonds.size(); ++b) {
    if (bonds.continuum[b]) continue;
    const Bond& bond = bonds.bonds[b];
    subtract(dd.sites[bond.i], bond.dir);
  }
  // Segments through the vacancy are lattice bonds that are not in B.
  if (dd.vacancy) {
    for (std::size_t d = 0; d < directions.size(); ++d) {
      const IntVec3 r = directions[d];
      if (dd.find(r) >= 0) subtract(IntVec3{}, int(d));
      if (dd.find(-r) >= 0) subtract(-r, int(d));
    }
  }

  for (std::size_t t = 0; t < mesh.tets.size(); ++t)
    for (int d = 0; d < ev.num_dirs; ++d) {
      double& w = ev(t, d);
      if (w < -1e-9) {
        std::ostringstream msg;
        msg << "effective_volumes: negative weight " << w << " at tet " << t << " direction " << d;
        throw std::logic_error(msg.str());
      }
      if (std::abs(w) < 1e-13) w = 0.0;
    }
  return ev;
}

EffectiveVolumes cauchy_born_volumes(const Mesh& mesh, int num_dirs) {
  EffectiveVolumes ev;
  ev.num_dirs = num_dirs;
  ev.omega.resize(mesh.tets.size() * num_dirs);
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const double vol = std::abs(signed_volume6(mesh.tet(t)).get_d()) / 6.0;
    for (int d = 0; d < num_dirs; ++d) ev(t, d) = vol;
  }
  return ev;
}

CoupledModel build_model(const ProblemConfig& cfg, const CrystalBasis& basis, bool cauchy_born) {
  if (!is_fcc(basis)) throw std::invalid_argument("build_model: FCC basis required");
  CoupledModel m;
  m.config = cfg;
  m.basis = basis;
  m.cauchy_born = cauchy_born;
  m.directions = canonical_half(neighbor_set(basis, cfg.cutoff));
  m.domain = build_domain(cfg);
  m.mesh = build_mesh(cfg, m.domain);
  m.bonds = classify_bonds(m.domain, m.mesh, m.directions);
  m.omega = cauchy_born ? cauchy_born_volumes(m.mesh, int(m.directions.size()))
                        : effective_volumes(m.bonds, m.mesh, m.directions, m.domain);

  const DomainDecomposition& dd = m.domain;
  const std::size_t ns = dd.sites.size();
  std::vector<std::uint8_t> is_vertex(ns, 0);
  for (int s : m.mesh.vertex_site) is_vertex[s] = 1;

  m.site_dof.assign(ns, -1);
  for (std::size_t s = 0; s < ns; ++s) {
    const SiteKind k = dd.kind[s];
    if (k == SiteKind::Atomistic || (k == SiteKind::Continuum && is_vertex[s])) {
      m.site_dof[s] = m.num_dofs();
      m.dof_site.push_back(static_cast<int>(s));
    }
  }

  m.site_rep.resize(ns);
  const int n = static_cast<int>(m.mesh.num_intervals());
  for (std::size_t s = 0; s < ns; ++s) {
    SiteRep& rep = m.site_rep[s];
    if (dd.kind[s] != SiteKind::Continuum || is_vertex[s]) {
      rep.n = 1;
      rep.site[0] = static_cast<int>(s);
      rep.weight[0] = 1.0;
      continue;
    }
    const IntVec3 x = dd.sites[s];
    const Tau t = to_tau(x);
    std::array<int, 3> box;
    for (int a = 0; a < 3; ++a) box[a] = interval_of(m.mesh.grid, t[a]);
    if (box[0] < 0 || box[1] < 0 || box[2] < 0 || box[0] >= n || box[1] >= n || box[2] >= n)
      throw std::logic_error("build_model: continuum site outside the mesh");
    const int b = m.mesh.box_index(box[0], box[1], box[2]);
    bool found = false;
    for (int ti = m.mesh.box_first[b]; ti < m.mesh.box_first[b + 1] && !found; ++ti) {
      const LatticeTet tet = m.mesh.tet(ti);
      const TetPlanes p = tet_planes(tet);
      std::array<std::int64_t, 4> g;
      bool inside = true;
      for (int i = 0; i < 4; ++i) {
        g[i] = dot(p.n[i], x) - p.d[i];
        if (g[i] < 0) inside = false;
      }
      if (!inside) continue;
      rep.n = 0;
      for (int i = 0; i < 4; ++i) {
        if (g[i] == 0) continue;
        rep.site[rep.n] = m.mesh.vertex_site[m.mesh.tets[ti][i]];
        rep.weight[rep.n] = double(g[i]) / double(p.scale[i]);
        ++rep.n;
      }
      found = true;
    }
    if (!found) throw std::logic_error("build_model: failed to locate continuum site");
  }
  return m;
}

std::string describe(const CoupledModel& m) {
  std::ostringstream os;
  os << "N=" << m.config.N << " K=" << m.config.K << " vacancy=" << (m.config.vacancy ? 1 : 0)
     << " fine_width=" << m.config.fine_width << " cutoff=" << m.config.cutoff
     << " directions=" << m.directions.size() << " sites=" << m.domain.sites.size()
     << " atomistic=" << m.domain.count(SiteKind::Atomistic)
     << " continuum=" << m.domain.count(SiteKind::Continuum)
     << " dirichlet=" << m.domain.count(SiteKind::Dirichlet) << " vertices=" << m.mesh.vertices.size()
     << " tets=" << m.mesh.tets.size() << " dofs=" << m.num_dofs() << " grid=";
  for (std::size_t i = 0; i < m.mesh.grid.size(); ++i) os << (i ? "," : "") << m.mesh.grid[i];
  return os.str();
}

}  // namespace latvol
