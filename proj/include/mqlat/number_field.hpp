#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <utility>

#include "json.hpp"

#include "mqlat/integer.hpp"

namespace mqlat {

// Element of O_K in integral-basis coordinates.
struct OkElement {
  std::array<std::int64_t, 4> coeffs{};

  OkElement operator+(const OkElement& o) const;
  OkElement operator-(const OkElement& o) const;
  OkElement operator-() const;
  friend bool operator==(const OkElement&, const OkElement&) = default;
};

OkElement scale(std::int64_t s, const OkElement& x);

using Vec4 = std::array<double, 4>;

// K = Q(sqrt a, sqrt b) together with an integral basis of O_K.
//
// Internally elements of K are handled over the Q-basis {1, s_a, s_b, s_k}, where
// s_a^2 = a, s_b^2 = b and s_k = s_a s_b / g with g = gcd(a, b), so s_k^2 = k. The
// integral basis is found by scanning (1/4) Z[s_a, s_b, s_k] for algebraic integers
// and taking the Hermite basis of what it finds; the result is accepted only if its
// discriminant equals the conductor-discriminant product of the three quadratic
// subfields, which certifies maximality.
class BiquadraticField {
 public:
  static std::shared_ptr<const BiquadraticField> build(std::int64_t a, std::int64_t b);

  std::int64_t a() const { return a_; }
  std::int64_t b() const { return b_; }
  std::int64_t k() const { return k_; }
  std::int64_t discriminant() const { return disc_; }
  std::pair<int, int> signature() const { return {r1_, r2_}; }
  bool totally_real() const { return r2_ == 0; }

  // Basis element i as rational coordinates over {1, sqrt a, sqrt b, sqrt(ab)},
  // where sqrt(ab) denotes the product s_a s_b.
  const std::array<std::array<Rational, 4>, 4>& integral_basis() const { return basis_sqrt_; }

  // e_i e_j = sum_l c[i][j][l] e_l.
  std::int64_t structure_constant(int i, int j, int l) const { return structure_[i][j][l]; }

  // Row r is the r-th real coordinate of the canonical embedding; column i is sigma(e_i).
  const std::array<Vec4, 4>& embedding_matrix() const { return embedding_; }

  OkElement one() const { return one_; }
  OkElement basis_element(int i) const;

  // Integral-basis coordinates of (x0 + x1 sqrt a + x2 sqrt b + x3 sqrt(ab)); throws
  // InvalidArgument when the element is not in O_K.
  OkElement from_sqrt_coords(const std::array<Rational, 4>& x) const;

  // Multiplication-by-x matrix M with (x e_i) = sum_l M[l][i] e_l.
  IntMatrix multiplication_matrix(const OkElement& x) const;

  nlohmann::json to_json() const;

 private:
  BiquadraticField() = default;

  std::int64_t a_ = 0, b_ = 0, k_ = 0, g_ = 1;
  int r1_ = 4, r2_ = 0;
  std::int64_t disc_ = 0;
  // Hermite basis rows, in units of 1/4 over {1, s_a, s_b, s_k}.
  IntMatrix hnf_;
  std::array<std::array<Rational, 4>, 4> basis_sqrt_{};
  std::array<std::array<std::array<std::int64_t, 4>, 4>, 4> structure_{};
  std::array<Vec4, 4> embedding_{};
  OkElement one_{};

  friend std::int64_t algebraic_norm(const BiquadraticField&, const OkElement&);
  std::array<std::int64_t, 4> quarter_coords(const OkElement& x) const;
  OkElement solve_quarter_coords(const std::array<std::int64_t, 4>& w) const;
};

using FieldPtr = std::shared_ptr<const BiquadraticField>;

inline FieldPtr build_field(std::int64_t a, std::int64_t b) { return BiquadraticField::build(a, b); }

OkElement mul(const BiquadraticField& f, const OkElement& x, const OkElement& y);
Vec4 embed(const BiquadraticField& f, const OkElement& x);
std::int64_t algebraic_norm(const BiquadraticField& f, const OkElement& x);
double ideal_lattice_volume(const BiquadraticField& f, std::int64_t ideal_norm);

}  // namespace mqlat
