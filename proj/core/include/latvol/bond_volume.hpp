#pragma once

#include <cstdint>
#include <utility>

#include "latvol/exact_sums.hpp"
#include "latvol/lattice_geometry.hpp"

namespace latvol {

// Len split into its exact rational part and the float angle corrections.
struct LenValue {
  BigRational exact = 0;
  double angular = 0.0;

  double value() const { return exact.get_d() + angular; }
  LenValue& operator+=(const LenValue& o) {
    exact += o.exact;
    angular += o.angular;
    return *this;
  }
  LenValue& operator-=(const LenValue& o) {
    exact -= o.exact;
    angular -= o.angular;
    return *this;
  }
  LenValue operator-() const { return {-exact, -angular}; }
  friend LenValue operator*(int s, LenValue v) {
    v.exact *= s;
    v.angular *= s;
    return v;
  }
};

// Right triangle X, X + b e1, X + b e1 + a e2 with X at the origin of the
// local coordinates, f(i, j) = c1 i + c2 j + c3. `frame` maps local vectors
// back to the original lattice frame; its third column is the bond direction.
struct RightTriangleSpec {
  BigInt a;
  BigInt b;
  PlaneCoeffs coeffs;
  IntMat3 frame;
};

// (r / g, g) with g the gcd of the components. Throws on r = 0.
std::pair<IntVec3, std::int64_t> reduce_direction(IntVec3 r);

// Oriented weighted lattice sum over the right triangle.
LenValue right_triangle_sum(const RightTriangleSpec& spec);

// Axis-aligned rectangle with opposite corners p and q: signed area times f at
// the center.
LenValue rectangle_sum(const BigVec2& p, const BigVec2& q, const PlaneCoeffs& coeffs);

// Oriented weighted lattice sum over the triangle abc.
LenValue triangle_sum(const BigVec2& a, const BigVec2& b, const BigVec2& c,
                      const PlaneCoeffs& coeffs, const IntMat3& frame);

// o(A'B'C') Len(P(ABC), e3) for a base with every vertex strictly above z = 0,
// angles measured through minv. Vertical bases give 0.
LenValue len_prism(const std::array<BigVec3, 3>& base, const IntMat3& minv);

LenValue len_tetra_exact(const LatticeTet& t, IntVec3 r);
double len_tetra(const LatticeTet& t, IntVec3 r);

// Literal sum of segment_chi_average over all bonds (x, x + r) near t.
// Throws std::length_error if more than `budget` bonds would be visited.
double len_bruteforce(const LatticeTet& t, IntVec3 r, std::int64_t budget = 10'000'000);

}  // namespace latvol
