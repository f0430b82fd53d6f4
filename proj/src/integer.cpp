#include "mqlat/integer.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdlib>
#include <numeric>
#include <utility>

namespace mqlat {

std::int64_t gcd64(std::int64_t x, std::int64_t y) {
  return std::gcd(x < 0 ? -x : x, y < 0 ? -y : y);
}

bool is_squarefree(std::int64_t x) {
  if (x == 0) return false;
  std::int64_t v = x < 0 ? -x : x;
  for (std::int64_t f = 2; f * f <= v; ++f) {
    if (v % (f * f) == 0) return false;
    if (v % f == 0) v /= f;
  }
  return true;
}

bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t f = 2; f * f <= p; ++f)
    if (p % f == 0) return false;
  return true;
}

std::int64_t pow_mod(std::int64_t base, std::int64_t exp, std::int64_t mod) {
  __int128 result = 1 % mod;
  __int128 b = mod_floor(base, mod);
  while (exp > 0) {
    if (exp & 1) result = (result * b) % mod;
    b = (b * b) % mod;
    exp >>= 1;
  }
  return static_cast<std::int64_t>(result);
}

Rational Rational::make(std::int64_t n, std::int64_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
  if (d < 0) {
    n = checked_mul(n, -1);
    d = checked_mul(d, -1);
  }
  const std::int64_t g = gcd64(n, d);
  return g > 1 ? Rational{n / g, d / g} : Rational{n, d};
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational Rational::parse(const std::string& s) {
  try {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational{std::stoll(s), 1};
    return make(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::ParseError, "bad rational '" + s + "'");
  }
}

IntMatrix hermite_basis(IntMatrix rows) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "hermite_basis: no generators");
  const std::size_t d = rows.front().size();
  IntMatrix basis(d, std::vector<std::int64_t>(d, 0));

  auto axpy = [](std::vector<std::int64_t>& dst, std::int64_t f, const std::vector<std::int64_t>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = checked_sub(dst[i], checked_mul(f, src[i]));
  };

  for (std::size_t c = d; c-- > 0;) {
    // Euclid on column c across the remaining pool until one row holds the gcd.
    for (;;) {
      std::size_t best = rows.size();
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r][c] == 0) continue;
        if (best == rows.size() || std::llabs(rows[r][c]) < std::llabs(rows[best][c])) best = r;
      }
      if (best == rows.size()) throw Error(ErrorCode::SingularSystem, "hermite_basis: rank deficient");
      bool others = false;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r == best || rows[r][c] == 0) continue;
        axpy(rows[r], rows[r][c] / rows[best][c], rows[best]);
        others = others || rows[r][c] != 0;
      }
      if (!others) {
        basis[c] = rows[best];
        rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(best));
        break;
      }
    }
    if (basis[c][c] < 0)
      for (auto& x : basis[c]) x = -x;
    std::erase_if(rows, [](const std::vector<std::int64_t>& r) {
      for (auto x : r)
        if (x != 0) return false;
      return true;
    });
  }

  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j-- > 0;) {
      const std::int64_t q = basis[i][j] >= 0 ? basis[i][j] / basis[j][j]
                                              : -((-basis[i][j] + basis[j][j] - 1) / basis[j][j]);
      if (q != 0) axpy(basis[i], q, basis[j]);
    }
  }
  return basis;
}

std::int64_t determinant(const IntMatrix& m) {
  using boost::multiprecision::cpp_int;
  const std::size_t n = m.size();
  if (n == 0) return 1;
  std::vector<std::vector<cpp_int>> a(n, std::vector<cpp_int>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m[i][j];
  cpp_int prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t s = k + 1;
      while (s < n && a[s][k] == 0) ++s;
      if (s == n) return 0;
      std::swap(a[k], a[s]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  cpp_int det = sign * a[n - 1][n - 1];
  if (det > std::numeric_limits<std::int64_t>::max() || det < std::numeric_limits<std::int64_t>::min())
    throw Error(ErrorCode::Overflow, "determinant exceeds 64 bits");
  return static_cast<std::int64_t>(det);
}

}  // namespace mqlat
