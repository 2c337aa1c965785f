#include "latvol/lattice_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace latvol {

namespace {

__extension__ typedef __int128 i128;

constexpr double kPi = std::numbers::pi;

struct DVec3 {
  double x, y, z;
};

double norm(const DVec3& a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }

double angle_between(const DVec3& a, const DVec3& b) {
  DVec3 c{a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
  return std::atan2(norm(c), a.x * b.x + a.y * b.y + a.z * b.z);
}

// Solid-angle fraction of the cone {d : n_i . d >= 0}.
double cone_fraction(const std::vector<DVec3>& n) {
  switch (n.size()) {
    case 0:
      return 1.0;
    case 1:
      return 0.5;
    case 2:
      return (kPi - angle_between(n[0], n[1])) / (2.0 * kPi);
    case 3: {
      double sum = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) sum += kPi - angle_between(n[i], n[j]);
      return (sum - kPi) / (4.0 * kPi);
    }
    default:
      throw std::domain_error("cone_fraction: more than three active constraints");
  }
}

DVec3 to_double(const BigVec3& v) { return {v[0].get_d(), v[1].get_d(), v[2].get_d()}; }

// Inward normal of the face opposite vertex i and its offset: n . p >= d inside.
struct FacePlane {
  IntVec3 n;
  i128 d;
};

std::array<FacePlane, 4> face_planes(const LatticeTet& t) {
  std::array<FacePlane, 4> out;
  for (int i = 0; i < 4; ++i) {
    const IntVec3& a = t.v[(i + 1) % 4];
    const IntVec3& b = t.v[(i + 2) % 4];
    const IntVec3& c = t.v[(i + 3) % 4];
    IntVec3 n = cross(b - a, c - a);
    if (dot(n, t.v[i] - a) < 0) n = -n;
    out[i] = {n, static_cast<i128>(dot(n, a))};
  }
  return out;
}

// Nonnegative fraction num/den, den > 0.
struct Frac {
  i128 num;
  i128 den;
};

bool less(const Frac& a, const Frac& b) { return a.num * b.den < b.num * a.den; }

}  // namespace

std::int64_t max_abs(IntVec3 a) {
  return std::max({a.x < 0 ? -a.x : a.x, a.y < 0 ? -a.y : a.y, a.z < 0 ? -a.z : a.z});
}

BigVec3 to_big(IntVec3 a) {
  return {BigInt(static_cast<long>(a.x)), BigInt(static_cast<long>(a.y)),
          BigInt(static_cast<long>(a.z))};
}

BigVec3 cross(const BigVec3& a, const BigVec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

BigInt dot(const BigVec3& a, const BigVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

IntMat3 identity_mat3() {
  IntMat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = (i == j) ? 1 : 0;
  return m;
}

IntMat3 multiply(const IntMat3& a, const IntMat3& b) {
  IntMat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return m;
}

BigVec3 apply(const IntMat3& m, const BigVec3& v) {
  BigVec3 out;
  for (int i = 0; i < 3; ++i) out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return out;
}

BigInt determinant(const IntMat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

BigVec3 column(const IntMat3& m, int j) { return {m[0][j], m[1][j], m[2][j]}; }

UnimodularMap::UnimodularMap() : m_(identity_mat3()) {}

UnimodularMap::UnimodularMap(IntMat3 m) : m_(std::move(m)) {
  if (determinant(m_) != 1) throw std::invalid_argument("UnimodularMap: determinant must be 1");
}

UnimodularMap UnimodularMap::inverse() const {
  // det = 1, so the inverse is the adjugate.
  IntMat3 inv;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = m_[r0][c0] * m_[r1][c1] - m_[r0][c1] * m_[r1][c0];
    }
  }
  return UnimodularMap(std::move(inv));
}

UnimodularMap unimodular_to_e3(IntVec3 r) {
  if (r == IntVec3{}) throw std::invalid_argument("unimodular_to_e3: r must be nonzero");
  BigVec3 rb = to_big(r);
  if (gcd(gcd(rb[0], rb[1]), rb[2]) != 1)
    throw std::invalid_argument("unimodular_to_e3: components of r must be coprime");

  IntMat3 m = identity_mat3();
  if (r.x == 0 && r.y == 0) {
    if (r.z == -1) {
      m[1][1] = -1;
      m[2][2] = -1;
    }
    return UnimodularMap(m);
  }
  // First (r1, r2, r3) -> (g12, 0, r3), then (g12, 0, r3) -> (0, 0, 1).
  BezoutTriple b12 = extended_gcd(rb[0], rb[1]);
  IntMat3 m2 = identity_mat3();
  m2[0][0] = b12.c;
  m2[0][1] = b12.d;
  m2[1][0] = -rb[1] / b12.g;
  m2[1][1] = rb[0] / b12.g;

  BezoutTriple b3 = extended_gcd(b12.g, rb[2]);
  IntMat3 m1 = identity_mat3();
  m1[0][0] = rb[2];
  m1[0][2] = -b12.g;
  m1[2][0] = b3.c;
  m1[2][2] = b3.d;
  return UnimodularMap(multiply(m1, m2));
}

BigInt signed_volume6(const LatticeTet& t) {
  IntMat3 m;
  for (int k = 0; k < 3; ++k) {
    BigVec3 e = to_big(t.v[k + 1] - t.v[0]);
    for (int i = 0; i < 3; ++i) m[i][k] = e[i];
  }
  return determinant(m);
}

LatticeTet translated(const LatticeTet& t, IntVec3 shift) {
  LatticeTet out = t;
  for (auto& p : out.v) p = p + shift;
  return out;
}

template <std::size_t D>
int orientation(const std::array<std::array<BigRational, D>, D + 1>& p) {
  if constexpr (D == 1) {
    return sgn(p[1][0] - p[0][0]);
  } else if constexpr (D == 2) {
    BigRational det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) -
                      (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    return sgn(det);
  } else {
    static_assert(D == 3);
    std::array<std::array<BigRational, 3>, 3> e;
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i) e[i][k] = p[k + 1][i] - p[0][i];
    BigRational det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) -
                      e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
                      e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
    return sgn(det);
  }
}

template int orientation<1>(const std::array<std::array<BigRational, 1>, 2>&);
template int orientation<2>(const std::array<std::array<BigRational, 2>, 3>&);
template int orientation<3>(const std::array<std::array<BigRational, 3>, 4>&);

int orientation(const BigVec2& a, const BigVec2& b, const BigVec2& c) {
  return sgn((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

int orientation(const LatticeTet& t) { return sgn(signed_volume6(t)); }

double angle_between(const BigVec3& a, const BigVec3& b) {
  BigVec3 c = cross(a, b);
  BigInt c2 = dot(c, c);
  return std::atan2(std::sqrt(c2.get_d()), dot(a, b).get_d());
}

double edge_angle_in_pulled_back_frame(const BigVec3& v, const BigVec3& w, const IntMat3& minv) {
  BigVec3 axis = column(minv, 2);
  BigVec3 p = cross(apply(minv, v), axis);
  BigVec3 q = cross(apply(minv, w), axis);
  if (dot(p, p) == 0 || dot(q, q) == 0)
    throw std::domain_error("edge_angle_in_pulled_back_frame: edge parallel to bond direction");
  return angle_between(p, q);
}

double chi_point(const LatticeTet& t, const RatVec3& x) {
  if (orientation(t) == 0) return 0.0;
  std::vector<DVec3> active;
  for (const FacePlane& f : face_planes(t)) {
    BigVec3 n = to_big(f.n);
    BigRational g = n[0] * x[0] + n[1] * x[1] + n[2] * x[2] -
                    BigRational(BigInt(static_cast<long>(f.d)));
    int s = sgn(g);
    if (s < 0) return 0.0;
    if (s == 0) active.push_back(to_double(n));
  }
  return cone_fraction(active);
}

SegmentAverager::SegmentAverager(const LatticeTet& t) {
  constexpr std::int64_t kLimit = std::int64_t{1} << 16;
  for (const IntVec3& p : t.v)
    if (max_abs(p) > kLimit) throw std::out_of_range("segment_chi_average: coordinate too large");
  degenerate_ = orientation(t) == 0;
  if (degenerate_) return;
  const auto planes = face_planes(t);
  for (int i = 0; i < 4; ++i) faces_[i] = {planes[i].n, planes[i].d};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      DVec3 a{double(faces_[i].n.x), double(faces_[i].n.y), double(faces_[i].n.z)};
      DVec3 b{double(faces_[j].n.x), double(faces_[j].n.y), double(faces_[j].n.z)};
      edge_weight_[i][j] = cone_fraction({a, b});
    }
  }
}

double SegmentAverager::operator()(IntVec3 start, IntVec3 dir) const {
  if (degenerate_) return 0.0;
  constexpr std::int64_t kLimit = std::int64_t{1} << 16;
  if (max_abs(start) > kLimit || max_abs(dir) > kLimit)
    throw std::out_of_range("segment_chi_average: coordinate too large");

  Frac lo{0, 1};
  Frac hi{1, 1};
  int on_plane[2] = {-1, -1};
  int n_on_plane = 0;
  for (int i = 0; i < 4; ++i) {
    const Face& f = faces_[i];
    // Along the segment the face function is alpha + lambda * beta, >= 0 inside.
    i128 alpha = static_cast<i128>(dot(f.n, start)) - f.d;
    i128 beta = static_cast<i128>(dot(f.n, dir));
    if (beta == 0) {
      if (alpha < 0) return 0.0;
      if (alpha == 0) {
        if (n_on_plane == 2) return 0.0;
        on_plane[n_on_plane++] = i;
      }
    } else if (beta > 0) {
      Frac b{-alpha, beta};
      if (less(lo, b)) lo = b;
    } else {
      Frac b{alpha, -beta};
      if (less(b, hi)) hi = b;
    }
  }
  if (!less(lo, hi)) return 0.0;
  long double len = static_cast<long double>(hi.num * lo.den - lo.num * hi.den) /
                    static_cast<long double>(hi.den * lo.den);
  double weight = 1.0;
  if (n_on_plane == 1) weight = 0.5;
  if (n_on_plane == 2) weight = edge_weight_[on_plane[0]][on_plane[1]];
  return static_cast<double>(weight * len);
}

double segment_chi_average(const LatticeTet& t, const Segment3& s) {
  return SegmentAverager(t)(s.start, s.end - s.start);
}

PlaneCoeffs plane_through(const BigVec3& a, const BigVec3& b, const BigVec3& c) {
  BigInt det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  if (det == 0) throw std::domain_error("plane_through: plane is vertical");
  BigInt n1 = (b[2] - a[2]) * (c[1] - a[1]) - (c[2] - a[2]) * (b[1] - a[1]);
  BigInt n2 = (b[0] - a[0]) * (c[2] - a[2]) - (c[0] - a[0]) * (b[2] - a[2]);
  PlaneCoeffs p;
  p.c1 = BigRational(n1, det);
  p.c1.canonicalize();
  p.c2 = BigRational(n2, det);
  p.c2.canonicalize();
  p.c3 = BigRational(a[2]) - p.c1 * a[0] - p.c2 * a[1];
  return p;
}

std::array<PrismTerm, 4> split_simplex_into_prisms(const LatticeTet& t) {
  LatticeTet pos = t;
  if (orientation(t) < 0) std::swap(pos.v[0], pos.v[1]);
  // Face opposite vertex k, with alternating sign +, -, +, -.
  static constexpr int kFaces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  static constexpr int kEps[4] = {1, -1, 1, -1};
  std::array<PrismTerm, 4> out;
  for (int k = 0; k < 4; ++k) {
    PrismTerm& term = out[k];
    for (int j = 0; j < 3; ++j) term.base[j] = pos.v[kFaces[k][j]];
    BigVec3 a = to_big(term.base[0]), b = to_big(term.base[1]), c = to_big(term.base[2]);
    int o = orientation(BigVec2{a[0], a[1]}, BigVec2{b[0], b[1]}, BigVec2{c[0], c[1]});
    term.sign = kEps[k] * o;
    if (o != 0) term.plane = plane_through(a, b, c);
  }
  return out;
}

double chi_prism(const PrismTerm& p, const RatVec3& x) {
  if (!p.plane) return 0.0;
  const PlaneCoeffs& pl = *p.plane;
  BigVec3 a = to_big(p.base[0]), b = to_big(p.base[1]), c = to_big(p.base[2]);
  const int o = orientation(BigVec2{a[0], a[1]}, BigVec2{b[0], b[1]}, BigVec2{c[0], c[1]});

  struct Constraint {
    BigRational value;
    DVec3 normal;
  };
  std::vector<Constraint> sides;
  const BigVec3* corners[3] = {&a, &b, &c};
  for (int i = 0; i < 3; ++i) {
    const BigVec3& u = *corners[i];
    const BigVec3& v = *corners[(i + 1) % 3];
    BigRational val = (v[0] - u[0]) * (x[1] - u[1]) - (v[1] - u[1]) * (x[0] - u[0]);
    BigInt nx = -(v[1] - u[1]), ny = v[0] - u[0];
    if (o < 0) {
      val = -val;
      nx = -nx;
      ny = -ny;
    }
    sides.push_back({val, {nx.get_d(), ny.get_d(), 0.0}});
  }
  BigRational h = pl.c1 * x[0] + pl.c2 * x[1] + pl.c3;
  const DVec3 under{pl.c1.get_d(), pl.c2.get_d(), -1.0};

  auto part = [&](int s) {
    std::vector<Constraint> cs = sides;
    cs.push_back({s * x[2], {0.0, 0.0, double(s)}});
    cs.push_back({s * (h - x[2]), {s * under.x, s * under.y, s * under.z}});
    std::vector<DVec3> active;
    for (const Constraint& con : cs) {
      int sg = sgn(con.value);
      if (sg < 0) return 0.0;
      if (sg == 0) active.push_back(con.normal);
    }
    if (active.size() >= 3) throw std::domain_error("chi_prism: degenerate evaluation point");
    return cone_fraction(active);
  };
  return part(1) - part(-1);
}

}  // namespace latvol
