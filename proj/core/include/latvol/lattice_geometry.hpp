#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "latvol/exact_sums.hpp"

namespace latvol {

// Lattice point or bond direction. Components are 64-bit; quantities that can
// outgrow 64 bits are formed in BigInt.
struct IntVec3 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  constexpr std::int64_t operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr std::int64_t& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  auto operator<=>(const IntVec3&) const = default;
};

constexpr IntVec3 operator+(IntVec3 a, IntVec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr IntVec3 operator-(IntVec3 a, IntVec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr IntVec3 operator-(IntVec3 a) { return {-a.x, -a.y, -a.z}; }
constexpr IntVec3 operator*(std::int64_t s, IntVec3 a) { return {s * a.x, s * a.y, s * a.z}; }
constexpr std::int64_t dot(IntVec3 a, IntVec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr IntVec3 cross(IntVec3 a, IntVec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
std::int64_t max_abs(IntVec3 a);

using BigVec2 = std::array<BigInt, 2>;
using BigVec3 = std::array<BigInt, 3>;
using RatVec3 = std::array<BigRational, 3>;

BigVec3 to_big(IntVec3 a);
BigVec3 cross(const BigVec3& a, const BigVec3& b);
BigInt dot(const BigVec3& a, const BigVec3& b);

// Row-major 3x3 integer matrix.
using IntMat3 = std::array<std::array<BigInt, 3>, 3>;

IntMat3 identity_mat3();
IntMat3 multiply(const IntMat3& a, const IntMat3& b);
BigVec3 apply(const IntMat3& m, const BigVec3& v);
BigInt determinant(const IntMat3& m);
BigVec3 column(const IntMat3& m, int j);

class UnimodularMap {
 public:
  UnimodularMap();
  // Throws std::invalid_argument unless det m == 1.
  explicit UnimodularMap(IntMat3 m);

  const IntMat3& matrix() const { return m_; }
  BigVec3 apply(const BigVec3& v) const { return latvol::apply(m_, v); }
  BigVec3 apply(IntVec3 v) const { return latvol::apply(m_, to_big(v)); }
  UnimodularMap inverse() const;

 private:
  IntMat3 m_;
};

// M with M r = e3. r must be nonzero with coprime components.
UnimodularMap unimodular_to_e3(IntVec3 r);

struct LatticeTet {
  std::array<IntVec3, 4> v;
};

// Six times the signed volume, det[B-A, C-A, D-A].
BigInt signed_volume6(const LatticeTet& t);
LatticeTet translated(const LatticeTet& t, IntVec3 shift);

// Closed lattice segment from start to end.
struct Segment3 {
  IntVec3 start;
  IntVec3 end;
};

// Sign of det[p1-p0, ..., pD-p0].
template <std::size_t D>
int orientation(const std::array<std::array<BigRational, D>, D + 1>& p);
int orientation(const BigVec2& a, const BigVec2& b, const BigVec2& c);
int orientation(const LatticeTet& t);

// Angle in [0, pi] between two nonzero vectors, computed as atan2(|a x b|, a.b)
// with the cross and dot products formed exactly.
double angle_between(const BigVec3& a, const BigVec3& b);

// Angle between (Minv v) x (Minv e3) and (Minv w) x (Minv e3). Throws
// std::domain_error if either cross product vanishes.
double edge_angle_in_pulled_back_frame(const BigVec3& v, const BigVec3& w, const IntMat3& minv);

// Fraction of a small ball around x inside the closed tetrahedron.
double chi_point(const LatticeTet& t, const RatVec3& x);

// Average of chi over the segment. Coordinates must satisfy |c| <= 2^16.
double segment_chi_average(const LatticeTet& t, const Segment3& s);

// segment_chi_average with the face planes of one tetrahedron precomputed.
class SegmentAverager {
 public:
  explicit SegmentAverager(const LatticeTet& t);
  double operator()(IntVec3 start, IntVec3 dir) const;

 private:
  struct Face {
    IntVec3 n;
    __extension__ __int128 d;
  };
  std::array<Face, 4> faces_{};
  std::array<std::array<double, 4>, 4> edge_weight_{};
  bool degenerate_ = false;
};

// Plane z = c1 x + c2 y + c3.
struct PlaneCoeffs {
  BigRational c1;
  BigRational c2;
  BigRational c3;
};

// Truncated prism between the triangle `base` and its projection to z = 0.
// `sign` already folds in the orientation of the projected base; it is 0 when
// the base is vertical.
struct PrismTerm {
  int sign = 0;
  std::array<IntVec3, 3> base;
  std::optional<PlaneCoeffs> plane;
};

PlaneCoeffs plane_through(const BigVec3& a, const BigVec3& b, const BigVec3& c);

// chi_T = sum_k sign_k * chi_{P_k} almost everywhere, with chi_P the signed
// prism indicator (negative below z = 0).
std::array<PrismTerm, 4> split_simplex_into_prisms(const LatticeTet& t);

// Signed prism indicator at x. Throws std::domain_error where three or more
// constraints of one part are active.
double chi_prism(const PrismTerm& p, const RatVec3& x);

}  // namespace latvol
