#include "mqlat/number_field.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <complex>
#include <string>

namespace mqlat {

namespace {

using Quad = std::array<std::int64_t, 4>;

// Product over {1, s_a, s_b, s_k}; units multiply (1/4 * 1/4 -> 1/16).
Quad mul_sqrt_coords(const Quad& p, const Quad& q, std::int64_t a, std::int64_t b, std::int64_t k,
                     std::int64_t g) {
  auto m = checked_mul;
  auto s = checked_add;
  Quad r;
  r[0] = s(s(m(p[0], q[0]), m(a, m(p[1], q[1]))), s(m(b, m(p[2], q[2])), m(k, m(p[3], q[3]))));
  r[1] = s(s(m(p[0], q[1]), m(p[1], q[0])), m(b / g, s(m(p[2], q[3]), m(p[3], q[2]))));
  r[2] = s(s(m(p[0], q[2]), m(p[2], q[0])), m(a / g, s(m(p[1], q[3]), m(p[3], q[1]))));
  r[3] = s(s(m(p[0], q[3]), m(p[3], q[0])), m(g, s(m(p[1], q[2]), m(p[2], q[1]))));
  return r;
}

// Characteristic polynomial coefficients c[0..4] (c[4] = 1) by Faddeev-LeVerrier.
std::array<std::int64_t, 5> char_poly(const IntMatrix& A) {
  const int n = 4;
  std::array<std::int64_t, 5> c{};
  c[n] = 1;
  IntMatrix M(n, std::vector<std::int64_t>(n, 0));
  for (int k = 1; k <= n; ++k) {
    IntMatrix next(n, std::vector<std::int64_t>(n, 0));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        std::int64_t acc = 0;
        for (int l = 0; l < n; ++l) acc = checked_add(acc, checked_mul(A[i][l], M[l][j]));
        next[i][j] = acc;
      }
      next[i][i] = checked_add(next[i][i], c[n - k + 1]);
    }
    M = std::move(next);
    std::int64_t tr = 0;
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) tr = checked_add(tr, checked_mul(A[i][l], M[l][i]));
    c[n - k] = -tr / k;
  }
  return c;
}

std::int64_t quadratic_disc(std::int64_t d) { return mod_floor(d, 4) == 1 ? d : checked_mul(4, d); }

}  // namespace

OkElement OkElement::operator+(const OkElement& o) const {
  OkElement r;
  for (int i = 0; i < 4; ++i) r.coeffs[i] = checked_add(coeffs[i], o.coeffs[i]);
  return r;
}

OkElement OkElement::operator-(const OkElement& o) const {
  OkElement r;
  for (int i = 0; i < 4; ++i) r.coeffs[i] = checked_sub(coeffs[i], o.coeffs[i]);
  return r;
}

OkElement OkElement::operator-() const { return OkElement{} - *this; }

OkElement scale(std::int64_t s, const OkElement& x) {
  OkElement r;
  for (int i = 0; i < 4; ++i) r.coeffs[i] = checked_mul(s, x.coeffs[i]);
  return r;
}

std::shared_ptr<const BiquadraticField> BiquadraticField::build(std::int64_t a, std::int64_t b) {
  if (a == 0 || a == 1 || b == 0 || b == 1)
    throw Error(ErrorCode::DegenerateField, "radicands must differ from 0 and 1");
  if (!is_squarefree(a)) throw Error(ErrorCode::NotSquarefree, std::to_string(a) + " is not squarefree");
  if (!is_squarefree(b)) throw Error(ErrorCode::NotSquarefree, std::to_string(b) + " is not squarefree");
  if (a == b) throw Error(ErrorCode::DegenerateField, "a = b gives a quadratic field");

  auto f = std::shared_ptr<BiquadraticField>(new BiquadraticField());
  f->a_ = a;
  f->b_ = b;
  f->g_ = gcd64(a, b);
  f->k_ = checked_mul(a / f->g_, b / f->g_);
  if (f->k_ == 1) throw Error(ErrorCode::DegenerateField, "a*b is a perfect square");
  if (a > 0 && b > 0) {
    f->r1_ = 4;
    f->r2_ = 0;
  } else {
    f->r1_ = 0;
    f->r2_ = 2;
  }

  const std::int64_t g = f->g_, k = f->k_;

  // Generators of O_K inside (1/4) Z^4: 4 Z^4 plus every algebraic integer x/4 with
  // x in {0..3}^4.
  IntMatrix gens;
  for (int i = 0; i < 4; ++i) {
    std::vector<std::int64_t> r(4, 0);
    r[i] = 4;
    gens.push_back(r);
  }
  for (int code = 1; code < 256; ++code) {
    Quad x{code & 3, (code >> 2) & 3, (code >> 4) & 3, (code >> 6) & 3};
    IntMatrix M(4, std::vector<std::int64_t>(4));
    for (int col = 0; col < 4; ++col) {
      Quad unit{};
      unit[col] = 1;
      Quad img = mul_sqrt_coords(x, unit, a, b, k, g);
      for (int row = 0; row < 4; ++row) M[row][col] = img[row];
    }
    const auto c = char_poly(M);
    // Characteristic polynomial of M/4 has coefficients c[4-i] / 4^i.
    bool integral = true;
    std::int64_t scale4 = 1;
    for (int i = 1; i <= 4 && integral; ++i) {
      scale4 *= 4;
      integral = c[4 - i] % scale4 == 0;
    }
    if (integral) gens.push_back({x[0], x[1], x[2], x[3]});
  }
  f->hnf_ = hermite_basis(gens);

  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      std::int64_t v = f->hnf_[i][j];
      if (j == 3) {
        f->basis_sqrt_[i][j] = Rational::make(v, checked_mul(4, g));
      } else {
        f->basis_sqrt_[i][j] = Rational::make(v, 4);
      }
    }
  }

  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Quad p{f->hnf_[i][0], f->hnf_[i][1], f->hnf_[i][2], f->hnf_[i][3]};
      Quad q{f->hnf_[j][0], f->hnf_[j][1], f->hnf_[j][2], f->hnf_[j][3]};
      Quad prod = mul_sqrt_coords(p, q, a, b, k, g);
      for (auto& v : prod) {
        if (v % 4 != 0) throw Error(ErrorCode::Internal, "integral basis not closed under multiplication");
        v /= 4;
      }
      OkElement e = f->solve_quarter_coords(prod);
      for (int l = 0; l < 4; ++l) f->structure_[i][j][l] = e.coeffs[l];
    }
  }

  f->one_ = f->solve_quarter_coords(Quad{4, 0, 0, 0});

  // Discriminant det(Tr(e_i e_j)); Tr(x) = 4 * (coefficient of 1).
  IntMatrix trace(4, std::vector<std::int64_t>(4));
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Quad prod{};
      for (int l = 0; l < 4; ++l)
        for (int t = 0; t < 4; ++t)
          prod[t] = checked_add(prod[t], checked_mul(f->structure_[i][j][l], f->hnf_[l][t]));
      // prod is in units of 1/4 and its trace is 4 * prod[0] / 4.
      trace[i][j] = prod[0];
    }
  }
  f->disc_ = determinant(trace);
  const std::int64_t expected =
      checked_mul(checked_mul(quadratic_disc(a), quadratic_disc(b)), quadratic_disc(k));
  if (f->disc_ != expected)
    throw Error(ErrorCode::UnsupportedCase, "integral basis search did not reach the maximal order for (" +
                                                std::to_string(a) + ", " + std::to_string(b) + ")");

  // Canonical embedding. Sign patterns (+,+), (+,-), (-,+), (-,-) on (sqrt a, sqrt b).
  using C = std::complex<double>;
  auto csqrt = [](std::int64_t d) {
    return d > 0 ? C(std::sqrt(static_cast<double>(d)), 0.0) : C(0.0, std::sqrt(static_cast<double>(-d)));
  };
  const C ra = csqrt(a), rb = csqrt(b);
  std::array<std::array<C, 4>, 4> values{};  // [pattern][basis element]
  std::array<std::pair<C, C>, 4> gen_images{};
  for (int pat = 0; pat < 4; ++pat) {
    const double e1 = (pat & 2) ? -1.0 : 1.0, e2 = (pat & 1) ? -1.0 : 1.0;
    const C sa = e1 * ra, sb = e2 * rb, sk = sa * sb / static_cast<double>(g);
    gen_images[pat] = {sa, sb};
    for (int i = 0; i < 4; ++i) {
      const auto& h = f->hnf_[i];
      values[pat][i] = (static_cast<double>(h[0]) + static_cast<double>(h[1]) * sa +
                        static_cast<double>(h[2]) * sb + static_cast<double>(h[3]) * sk) /
                       4.0;
    }
  }
  if (f->r2_ == 0) {
    for (int pat = 0; pat < 4; ++pat)
      for (int i = 0; i < 4; ++i) f->embedding_[pat][i] = values[pat][i].real();
  } else {
    std::array<bool, 4> used{};
    int row = 0;
    for (int pat = 0; pat < 4; ++pat) {
      if (used[pat]) continue;
      used[pat] = true;
      for (int q = 0; q < 4; ++q) {
        if (!used[q] && std::abs(gen_images[q].first - std::conj(gen_images[pat].first)) < 1e-9 &&
            std::abs(gen_images[q].second - std::conj(gen_images[pat].second)) < 1e-9)
          used[q] = true;
      }
      for (int i = 0; i < 4; ++i) {
        f->embedding_[row][i] = values[pat][i].real();
        f->embedding_[row + 1][i] = values[pat][i].imag();
      }
      row += 2;
    }
  }
  return f;
}

OkElement BiquadraticField::basis_element(int i) const {
  OkElement e;
  e.coeffs[i] = 1;
  return e;
}

std::array<std::int64_t, 4> BiquadraticField::quarter_coords(const OkElement& x) const {
  Quad w{};
  for (int i = 0; i < 4; ++i)
    for (int t = 0; t < 4; ++t) w[t] = checked_add(w[t], checked_mul(x.coeffs[i], hnf_[i][t]));
  return w;
}

OkElement BiquadraticField::solve_quarter_coords(const std::array<std::int64_t, 4>& w_in) const {
  Quad w = w_in;
  OkElement e;
  for (int l = 3; l >= 0; --l) {
    if (w[l] % hnf_[l][l] != 0) throw Error(ErrorCode::InvalidArgument, "element is not in O_K");
    e.coeffs[l] = w[l] / hnf_[l][l];
    for (int t = 0; t <= l; ++t) w[t] = checked_sub(w[t], checked_mul(e.coeffs[l], hnf_[l][t]));
  }
  return e;
}

OkElement BiquadraticField::from_sqrt_coords(const std::array<Rational, 4>& x) const {
  // Convert sqrt(ab) = g * s_k, then scale to units of 1/4.
  Quad w{};
  for (int t = 0; t < 4; ++t) {
    std::int64_t num = checked_mul(x[t].num, t == 3 ? checked_mul(4, g_) : 4);
    if (num % x[t].den != 0) throw Error(ErrorCode::InvalidArgument, "element is not in O_K");
    w[t] = num / x[t].den;
  }
  return solve_quarter_coords(w);
}

IntMatrix BiquadraticField::multiplication_matrix(const OkElement& x) const {
  IntMatrix M(4, std::vector<std::int64_t>(4, 0));
  for (int i = 0; i < 4; ++i) {
    OkElement img = mul(*this, x, basis_element(i));
    for (int l = 0; l < 4; ++l) M[l][i] = img.coeffs[l];
  }
  return M;
}

nlohmann::json BiquadraticField::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["a"] = a_;
  j["b"] = b_;
  j["k"] = k_;
  j["d_K"] = disc_;
  j["signature"] = {r1_, r2_};
  auto basis = nlohmann::json::array();
  for (const auto& v : basis_sqrt_) {
    auto row = nlohmann::json::array();
    for (const auto& q : v) row.push_back(q.str());
    basis.push_back(row);
  }
  j["integral_basis"] = basis;
  j["structure_constants"] = structure_;
  j["embedding_matrix"] = embedding_;
  return j;
}

OkElement mul(const BiquadraticField& f, const OkElement& x, const OkElement& y) {
  OkElement r;
  for (int i = 0; i < 4; ++i) {
    if (x.coeffs[i] == 0) continue;
    for (int j = 0; j < 4; ++j) {
      if (y.coeffs[j] == 0) continue;
      const std::int64_t xy = checked_mul(x.coeffs[i], y.coeffs[j]);
      for (int l = 0; l < 4; ++l) {
        const std::int64_t c = f.structure_constant(i, j, l);
        if (c != 0) r.coeffs[l] = checked_add(r.coeffs[l], checked_mul(xy, c));
      }
    }
  }
  return r;
}

Vec4 embed(const BiquadraticField& f, const OkElement& x) {
  const auto& E = f.embedding_matrix();
  Vec4 out{};
  for (int r = 0; r < 4; ++r)
    for (int i = 0; i < 4; ++i) out[r] += E[r][i] * static_cast<double>(x.coeffs[i]);
  return out;
}

std::int64_t algebraic_norm(const BiquadraticField& f, const OkElement& x) {
  using boost::multiprecision::cpp_int;
  const auto X = f.quarter_coords(x);
  const cpp_int a = f.a_, b = f.b_, g = f.g_;
  // 4g x = (A0 + A1 s_a) + (B0 + B1 s_a) s_b
  const cpp_int A0 = g * X[0], A1 = g * X[1], B0 = g * X[2], B1 = X[3];
  const cpp_int P = A0 * A0 + a * A1 * A1 - b * (B0 * B0 + a * B1 * B1);
  const cpp_int Q = 2 * A0 * A1 - 2 * b * B0 * B1;
  const cpp_int N = P * P - a * Q * Q;
  const cpp_int denom = (4 * g) * (4 * g) * (4 * g) * (4 * g);
  if (N % denom != 0) throw Error(ErrorCode::Internal, "norm of an algebraic integer is not integral");
  const cpp_int n = N / denom;
  if (n > std::numeric_limits<std::int64_t>::max() || n < std::numeric_limits<std::int64_t>::min())
    throw Error(ErrorCode::Overflow, "norm exceeds 64 bits");
  return static_cast<std::int64_t>(n);
}

double ideal_lattice_volume(const BiquadraticField& f, std::int64_t ideal_norm) {
  if (ideal_norm < 1) throw Error(ErrorCode::InvalidArgument, "ideal norm must be >= 1");
  const auto [r1, r2] = f.signature();
  return std::ldexp(std::sqrt(static_cast<double>(f.discriminant())), -r2) * static_cast<double>(ideal_norm);
}

}  // namespace mqlat
