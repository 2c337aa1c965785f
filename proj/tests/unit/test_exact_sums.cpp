#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "latvol/exact_sums.hpp"

using namespace latvol;

namespace {

BigRational direct_s_ab(long a, long b) {
  BigRational s = 0;
  for (long i = 0; i < b; ++i) s += BigRational(BigInt(i) * ((a * i) % b), b);
  s.canonicalize();
  return s;
}

}  // namespace

TEST(ExtendedGcd, Examples) {
  const BezoutTriple t = extended_gcd(6, 4);
  EXPECT_EQ(t.g, 2);
  EXPECT_EQ(6 * t.c + 4 * t.d, 2);

  const BezoutTriple u = extended_gcd(1, 0);
  EXPECT_EQ(u.g, 1);
  EXPECT_EQ(u.c, 1);
  EXPECT_EQ(u.d, 0);

  const BezoutTriple v = extended_gcd(240, 46);
  EXPECT_EQ(v.g, 2);
  EXPECT_EQ(240 * v.c + 46 * v.d, 2);
}

TEST(ExtendedGcd, BezoutIdentityHoldsForSignedInputs) {
  for (long a = -30; a <= 30; ++a)
    for (long b = -30; b <= 30; ++b) {
      const BezoutTriple t = extended_gcd(a, b);
      EXPECT_EQ(a * t.c + b * t.d, t.g) << a << " " << b;
      EXPECT_EQ(t.g, BigInt(std::gcd(std::abs(a), std::abs(b))));
      if (b != 0) {
        EXPECT_GE(t.c, 0);
        EXPECT_LT(t.c, std::abs(b) / t.g);
      }
    }
  EXPECT_EQ(extended_gcd(0, 0).g, 0);
}

TEST(SumPowers, Examples) {
  EXPECT_EQ(sum_powers(4, 1), 6);
  EXPECT_EQ(sum_powers(4, 2), 14);
  EXPECT_EQ(sum_powers(0, 1), 0);
}

TEST(SumPowers, MatchesDirectSum) {
  for (long n = 0; n < 60; ++n) {
    BigRational s1 = 0, s2 = 0;
    for (long i = 0; i < n; ++i) {
      s1 += i;
      s2 += i * i;
    }
    EXPECT_EQ(sum_powers(n, 1), s1);
    EXPECT_EQ(sum_powers(n, 2), s2);
  }
}

TEST(SumAiModB, Examples) {
  EXPECT_EQ(sum_ai_mod_b(2, 4, 1), 4);
  EXPECT_EQ(sum_ai_mod_b(1, 3, 2), 5);
  EXPECT_EQ(sum_ai_mod_b(0, 5, 1), 0);
}

TEST(SumAiModB, MatchesDirectSumIncludingNegativeA) {
  for (long a = -20; a <= 20; ++a)
    for (long b = 1; b <= 20; ++b) {
      BigRational s1 = 0, s2 = 0;
      for (long i = 0; i < b; ++i) {
        const long m = ((a * i) % b + b) % b;
        s1 += m;
        s2 += m * m;
      }
      EXPECT_EQ(sum_ai_mod_b(a, b, 1), s1) << a << " " << b;
      EXPECT_EQ(sum_ai_mod_b(a, b, 2), s2) << a << " " << b;
    }
}

TEST(Sab, Examples) {
  EXPECT_EQ(s_ab(0, 7), 0);
  EXPECT_EQ(s_ab(2, 4), 2);
  EXPECT_EQ(s_ab(1, 3), BigRational(5, 3));
}

TEST(Sab, MatchesDirectSumAndLogDepth) {
  for (long a = 0; a <= 60; ++a)
    for (long b = 0; b <= 60; ++b) {
      const SabTrace t = s_ab_traced(a, b);
      EXPECT_EQ(t.value, direct_s_ab(a, b)) << a << " " << b;
      if (a + b > 0) EXPECT_LE(t.depth, 2.0 * std::log2(double(a + b)) + 2.0) << a << " " << b;
    }
}

TEST(Sab, ResultIsInLowestTerms) {
  const BigRational v = s_ab(123456789, 987654321);
  BigRational c = v;
  c.canonicalize();
  EXPECT_EQ(v.get_num(), c.get_num());
  EXPECT_GT(v.get_den(), 0);
}

TEST(Sab, HugeArgumentsStayShallow) {
  const BigInt a("123456789012345678901234567890");
  const BigInt b("987654321098765432109876543210");
  const SabTrace t = s_ab_traced(a, b);
  EXPECT_LE(t.depth, 2.0 * std::log2(a.get_d() + b.get_d()) + 2.0);
  EXPECT_GT(t.value, 0);
}
