#include "latvol/exact_sums.hpp"

#include <stdexcept>

namespace latvol {
namespace {

BigRational reduced(const BigInt& num, const BigInt& den) {
  BigRational q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace

BezoutTriple extended_gcd(const BigInt& a, const BigInt& b) {
  BezoutTriple out;
  if (b == 0) {
    out.g = abs(a);
    out.c = sgn(a);
    out.d = 0;
    return out;
  }
  mpz_gcdext(out.g.get_mpz_t(), out.c.get_mpz_t(), out.d.get_mpz_t(), a.get_mpz_t(),
             b.get_mpz_t());
  BigInt period = abs(b) / out.g;
  mpz_fdiv_r(out.c.get_mpz_t(), out.c.get_mpz_t(), period.get_mpz_t());
  out.d = (out.g - a * out.c) / b;
  return out;
}

BigRational sum_powers(const BigInt& n, int p) {
  if (n < 0) throw std::invalid_argument("sum_powers: n must be nonnegative");
  switch (p) {
    case 1:
      return reduced(n * (n - 1), 2);
    case 2:
      return reduced(n * (n - 1) * (2 * n - 1), 6);
    default:
      throw std::invalid_argument("sum_powers: p must be 1 or 2");
  }
}

BigRational sum_ai_mod_b(const BigInt& a, const BigInt& b, int p) {
  if (b < 1) throw std::invalid_argument("sum_ai_mod_b: b must be positive");
  BigInt g = gcd(a, b);
  switch (p) {
    case 1:
      return reduced(b * (b - g), 2);
    case 2:
      return reduced(b * (b - g) * (2 * b - g), 6);
    default:
      throw std::invalid_argument("sum_ai_mod_b: p must be 1 or 2");
  }
}

SabTrace s_ab_traced(const BigInt& a_in, const BigInt& b_in) {
  if (a_in < 0 || b_in < 0) throw std::invalid_argument("s_ab: arguments must be nonnegative");
  SabTrace out;
  out.value = 0;
  if (b_in == 0 || a_in == 0) return out;

  BigInt a = a_in;
  BigInt b = b_in;
  // gcd(a, b) is invariant under (a, b) -> (b mod a, a).
  const BigInt g = gcd(a, b);
  BigRational multiplier = 1;
  while (a != 0) {
    BigInt num = 3 * b * a * a + 3 * b * b * a + a * a - 3 * a * b + b * b - 6 * a * b * g + g * g;
    BigRational term(num, 12 * a);
    term.canonicalize();
    out.value += multiplier * term;
    multiplier *= BigRational(-b, a);
    multiplier.canonicalize();
    BigInt next = b % a;
    b = a;
    a = next;
    ++out.depth;
  }
  return out;
}

BigRational s_ab(const BigInt& a, const BigInt& b) { return s_ab_traced(a, b).value; }

}  // namespace latvol
