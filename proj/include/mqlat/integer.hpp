#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mqlat/error.hpp"

namespace mqlat {

inline std::int64_t checked_add(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_add_overflow(x, y, &r)) throw Error(ErrorCode::Overflow, "integer addition");
  return r;
}

inline std::int64_t checked_sub(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_sub_overflow(x, y, &r)) throw Error(ErrorCode::Overflow, "integer subtraction");
  return r;
}

inline std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_mul_overflow(x, y, &r)) throw Error(ErrorCode::Overflow, "integer multiplication");
  return r;
}

// Non-negative residue of x modulo m > 0.
inline std::int64_t mod_floor(std::int64_t x, std::int64_t m) {
  std::int64_t r = x % m;
  return r < 0 ? r + m : r;
}

std::int64_t gcd64(std::int64_t x, std::int64_t y);
bool is_squarefree(std::int64_t x);
bool is_prime(std::int64_t p);
std::int64_t pow_mod(std::int64_t base, std::int64_t exp, std::int64_t mod);

// Exact rational with a positive denominator in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d);
  std::string str() const;
  static Rational parse(const std::string& s);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

using IntMatrix = std::vector<std::vector<std::int64_t>>;

// Hermite normal form of the lattice spanned by the rows of `generators` (which must
// have full rank d). Returned basis is d x d, row i has its positive pivot at column i,
// zeros after it, and entries before it reduced into [0, pivot of that column).
IntMatrix hermite_basis(IntMatrix generators);

// Exact determinant (Bareiss); throws Overflow if the result exceeds 64 bits.
std::int64_t determinant(const IntMatrix& m);

}  // namespace mqlat
