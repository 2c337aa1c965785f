#include "latvol/bond_volume.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace latvol {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Angle at a vertex between local edge directions p and q, measured in the
// original frame around the bond axis.
double vertex_angle(const IntMat3& frame, const BigVec3& p, const BigVec3& q) {
  return edge_angle_in_pulled_back_frame(p, q, frame);
}

IntMat3 scale_columns(const IntMat3& m, int s0, int s1) {
  IntMat3 out = m;
  for (int i = 0; i < 3; ++i) {
    out[i][0] *= s0;
    out[i][1] *= s1;
  }
  return out;
}

IntMat3 swap_xy_columns(const IntMat3& m) {
  IntMat3 out = m;
  for (int i = 0; i < 3; ++i) std::swap(out[i][0], out[i][1]);
  return out;
}

// Right triangle anchored at `origin`, legs b along e1 then a along e2.
LenValue anchored_right_triangle(const BigVec2& origin, const BigInt& b, const BigInt& a,
                                 const PlaneCoeffs& coeffs, const IntMat3& frame) {
  RightTriangleSpec spec;
  spec.a = a;
  spec.b = b;
  spec.coeffs.c1 = coeffs.c1;
  spec.coeffs.c2 = coeffs.c2;
  spec.coeffs.c3 = coeffs.c1 * origin[0] + coeffs.c2 * origin[1] + coeffs.c3;
  spec.frame = frame;
  return right_triangle_sum(spec);
}

}  // namespace

std::pair<IntVec3, std::int64_t> reduce_direction(IntVec3 r) {
  if (r == IntVec3{}) throw std::invalid_argument("reduce_direction: r must be nonzero");
  std::int64_t g = std::gcd(std::gcd(r.x, r.y), r.z);
  return {{r.x / g, r.y / g, r.z / g}, g};
}

LenValue right_triangle_sum(const RightTriangleSpec& spec) {
  LenValue out;
  const int sa = sgn(spec.a);
  const int sb = sgn(spec.b);
  if (sa == 0 || sb == 0) return out;

  // Reflect so that both legs are positive.
  const BigInt a = abs(spec.a);
  const BigInt b = abs(spec.b);
  const BigRational c1 = spec.coeffs.c1 * sb;
  const BigRational c2 = spec.coeffs.c2 * sa;
  const BigRational& c0 = spec.coeffs.c3;
  const IntMat3 frame = scale_columns(spec.frame, sb, sa);
  const int orient = sa * sb;

  const BigInt g = gcd(a, b);
  const BigRational s = s_ab(a, b);
  const BigRational sum_i2 = sum_powers(b, 2);
  const BigRational sum_i = sum_powers(b, 1);
  const BigRational sum_m = sum_ai_mod_b(a, b, 1);
  const BigRational sum_m2 = sum_ai_mod_b(a, b, 2);
  const BigRational ab(a, b);
  const BigRational inv_b(1, b);

  // Points with 0 <= i < b and 1 <= j <= floor(a i / b).
  // x1 = sum_i i q_i, x2 = sum_i q_i (q_i + 1) / 2, q_i = floor(a i / b).
  BigRational x1 = ab * sum_i2 - s;
  BigRational sum_q = ab * sum_i - inv_b * sum_m;
  BigRational sum_q2 = ab * ab * sum_i2 - 2 * ab * s + inv_b * inv_b * sum_m2;
  BigRational x2 = (sum_q2 + sum_q) / 2;

  BigRational w = BigRational(a * b, 2) * c0 + c1 * x1 + c2 * x2;
  // Edge points carry weight 1/2. Bottom edge (0 < i < b, j = 0):
  w += c1 * sum_powers(b, 1) / 2;
  // Right edge (i = b, 0 < j < a):
  w += (BigRational(a - 1) * b * c1 + c2 * sum_powers(a, 1)) / 2;
  // Hypotenuse interior points were counted with weight 1.
  w -= BigRational(g - 1) * (b * c1 + a * c2) / 4;

  // Vertex corrections; the constant part is already exact in a b c0 / 2 and
  // f vanishes at the origin vertex.
  const BigVec3 e1{1, 0, 0}, e2{0, 1, 0};
  const BigVec3 ne1{-1, 0, 0}, ne2{0, -1, 0};
  const BigVec3 to_origin{-b, -a, 0};
  const double beta = vertex_angle(frame, ne1, e2);
  const double gamma = vertex_angle(frame, ne2, to_origin);
  const double f_b = BigRational(b * c1).get_d();
  const double f_c = BigRational(b * c1 + a * c2).get_d();
  double angular = beta / kTwoPi * f_b + gamma / kTwoPi * f_c;

  out.exact = orient * w;
  out.angular = orient * angular;
  return out;
}

LenValue rectangle_sum(const BigVec2& p, const BigVec2& q, const PlaneCoeffs& coeffs) {
  LenValue out;
  BigRational cx = BigRational(p[0] + q[0], 2);
  BigRational cy = BigRational(p[1] + q[1], 2);
  cx.canonicalize();
  cy.canonicalize();
  out.exact = BigRational((q[0] - p[0]) * (q[1] - p[1])) * (coeffs.c1 * cx + coeffs.c2 * cy + coeffs.c3);
  return out;
}

LenValue triangle_sum(const BigVec2& a, const BigVec2& b, const BigVec2& c,
                      const PlaneCoeffs& coeffs, const IntMat3& frame) {
  LenValue out;
  if (orientation(a, b, c) == 0) return out;
  // D = (b1, a2), E = (c1, a2), F = (c1, b2):
  // [ABC] = -[ADB] + [AEC] + [FBC] + o(EDB) |EDBF| f(center).
  out -= anchored_right_triangle(a, b[0] - a[0], b[1] - a[1], coeffs, frame);
  out += anchored_right_triangle(a, c[0] - a[0], c[1] - a[1], coeffs, frame);
  {
    // [FBC] = [CFB]: from C vertically to F, then horizontally to B. Swapping
    // the axes reverses the orientation.
    PlaneCoeffs swapped{coeffs.c2, coeffs.c1, coeffs.c3};
    BigVec2 c_sw{c[1], c[0]};
    out -= anchored_right_triangle(c_sw, b[1] - c[1], b[0] - c[0], swapped, swap_xy_columns(frame));
  }
  out += rectangle_sum(BigVec2{c[0], a[1]}, b, coeffs);
  return out;
}

LenValue len_prism(const std::array<BigVec3, 3>& base, const IntMat3& minv) {
  BigVec2 a{base[0][0], base[0][1]}, b{base[1][0], base[1][1]}, c{base[2][0], base[2][1]};
  if (orientation(a, b, c) == 0) return {};
  PlaneCoeffs plane = plane_through(base[0], base[1], base[2]);
  return triangle_sum(a, b, c, plane, minv);
}

LenValue len_tetra_exact(const LatticeTet& t, IntVec3 r) {
  auto [dir, g] = reduce_direction(r);
  (void)g;
  if (orientation(t) == 0) return {};

  const UnimodularMap m = unimodular_to_e3(dir);
  const IntMat3 minv = m.inverse().matrix();
  std::array<BigVec3, 4> v;
  for (int k = 0; k < 4; ++k) v[k] = m.apply(t.v[k]);

  // Lift so that every vertex sits at z >= 1.
  BigInt zmin = v[0][2];
  for (const auto& p : v) zmin = std::min(zmin, p[2]);
  const BigInt shift = 1 - zmin;
  for (auto& p : v) p[2] += shift;

  // M has determinant 1, so orientation is preserved.
  if (orientation(t) < 0) std::swap(v[0], v[1]);

  LenValue out;
  out += len_prism({v[1], v[2], v[3]}, minv);
  out -= len_prism({v[0], v[2], v[3]}, minv);
  out += len_prism({v[0], v[1], v[3]}, minv);
  out -= len_prism({v[0], v[1], v[2]}, minv);
  return out;
}

double len_tetra(const LatticeTet& t, IntVec3 r) { return len_tetra_exact(t, r).value(); }

double len_bruteforce(const LatticeTet& t, IntVec3 r, std::int64_t budget) {
  if (r == IntVec3{}) throw std::invalid_argument("len_bruteforce: r must be nonzero");
  if (orientation(t) == 0) return 0.0;
  IntVec3 lo = t.v[0], hi = t.v[0];
  for (const IntVec3& p : t.v) {
    for (int i = 0; i < 3; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  // Segments (x, x + r) that can meet the bounding box.
  for (int i = 0; i < 3; ++i) {
    lo[i] -= std::max<std::int64_t>(r[i], 0);
    hi[i] -= std::min<std::int64_t>(r[i], 0);
  }
  std::int64_t count = 1;
  for (int i = 0; i < 3; ++i) {
    count *= hi[i] - lo[i] + 1;
    if (count > budget) throw std::length_error("len_bruteforce: enumeration budget exceeded");
  }
  const SegmentAverager avg(t);
  double total = 0.0;
  IntVec3 x;
  for (x.x = lo.x; x.x <= hi.x; ++x.x)
    for (x.y = lo.y; x.y <= hi.y; ++x.y)
      for (x.z = lo.z; x.z <= hi.z; ++x.z) total += avg(x, r);
  return total;
}

}  // namespace latvol
