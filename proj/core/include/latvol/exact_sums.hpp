#pragma once

#include <gmpxx.h>

namespace latvol {

using BigInt = mpz_class;
using BigRational = mpq_class;

// a*c + b*d == g with g = gcd(|a|, |b|) >= 0.
struct BezoutTriple {
  BigInt g;
  BigInt c;
  BigInt d;
};

// For b != 0 the coefficient c is normalized to 0 <= c < |b|/g.
BezoutTriple extended_gcd(const BigInt& a, const BigInt& b);

// Sum of i^p for i = 0..n-1, p in {1, 2}.
BigRational sum_powers(const BigInt& n, int p);

// Sum of (a*i mod b)^p for i = 0..b-1, p in {1, 2}. Requires b >= 1.
BigRational sum_ai_mod_b(const BigInt& a, const BigInt& b, int p);

// S_{a,b} = sum_{i=0}^{b-1} (i/b) * (a*i mod b) for a, b >= 0.
BigRational s_ab(const BigInt& a, const BigInt& b);

struct SabTrace {
  BigRational value;
  int depth = 0;
};

// Same as s_ab, also reporting the number of reduction steps taken.
SabTrace s_ab_traced(const BigInt& a, const BigInt& b);

}  // namespace latvol
