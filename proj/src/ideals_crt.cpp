#include "mqlat/ideals_crt.hpp"

#include <algorithm>
#include <string>

namespace mqlat {

namespace {

constexpr std::int64_t kMaxEnumerationPrime = 97;

// Solves A x = rhs over F_p for a square system; throws SingularSystem.
std::array<std::int64_t, 4> solve_mod_p(std::array<std::array<std::int64_t, 4>, 4> A,
                                        std::array<std::int64_t, 4> rhs, std::int64_t p) {
  const int n = 4;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    while (piv < n && mod_floor(A[piv][col], p) == 0) ++piv;
    if (piv == n) throw Error(ErrorCode::SingularSystem, "reduction maps are linearly dependent mod p");
    std::swap(A[piv], A[col]);
    std::swap(rhs[piv], rhs[col]);
    const std::int64_t inv = pow_mod(A[col][col], p - 2, p);
    for (int j = 0; j < n; ++j) A[col][j] = mod_floor(A[col][j] * inv, p);
    rhs[col] = mod_floor(rhs[col] * inv, p);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const std::int64_t f = mod_floor(A[r][col], p);
      if (f == 0) continue;
      for (int j = 0; j < n; ++j) A[r][j] = mod_floor(A[r][j] - f * A[col][j], p);
      rhs[r] = mod_floor(rhs[r] - f * rhs[col], p);
    }
  }
  return rhs;
}

}  // namespace

const char* to_string(Splitting s) {
  switch (s) {
    case Splitting::Split: return "split";
    case Splitting::Inert: return "inert";
    case Splitting::Ramified: return "ramified";
  }
  return "?";
}

int legendre(std::int64_t a, std::int64_t p) {
  if (p <= 2 || !is_prime(p)) throw Error(ErrorCode::NotOddPrime, std::to_string(p) + " is not an odd prime");
  const std::int64_t r = mod_floor(a, p);
  if (r == 0) return 0;
  return pow_mod(r, (p - 1) / 2, p) == 1 ? 1 : -1;
}

Splitting quadratic_splitting(std::int64_t d, std::int64_t p) {
  if (!is_squarefree(d) || d == 1) throw Error(ErrorCode::NotSquarefree, std::to_string(d) + " is not a squarefree radicand");
  if (!is_prime(p)) throw Error(ErrorCode::NotPrime, std::to_string(p) + " is not prime");
  if (p == 2) {
    switch (mod_floor(d, 8)) {
      case 1: return Splitting::Split;
      case 5: return Splitting::Inert;
      default: return Splitting::Ramified;
    }
  }
  switch (legendre(d, p)) {
    case 0: return Splitting::Ramified;
    case 1: return Splitting::Split;
    default: return Splitting::Inert;
  }
}

bool splits_completely(const BiquadraticField& f, std::int64_t p) {
  return quadratic_splitting(f.a(), p) == Splitting::Split && quadratic_splitting(f.b(), p) == Splitting::Split;
}

std::int64_t PrimeIdealAboveP::reduce(const OkElement& x) const {
  std::int64_t acc = 0;
  for (int i = 0; i < 4; ++i) acc = mod_floor(acc + mod_floor(x.coeffs[i], p) * reduction_map[i], p);
  return acc;
}

std::vector<PrimeIdealAboveP> find_primes_above(const BiquadraticField& f, std::int64_t p) {
  if (!is_prime(p)) throw Error(ErrorCode::NotPrime, std::to_string(p) + " is not prime");
  if (p > kMaxEnumerationPrime)
    throw Error(ErrorCode::InvalidArgument, "homomorphism enumeration is limited to p <= 97");

  const OkElement one = f.one();
  std::vector<PrimeIdealAboveP> found;
  std::array<std::int64_t, 4> v{};
  const std::int64_t total = p * p * p * p;
  for (std::int64_t code = 0; code < total; ++code) {
    std::int64_t c = code;
    for (int i = 3; i >= 0; --i) {
      v[i] = c % p;
      c /= p;
    }
    std::int64_t at_one = 0;
    for (int i = 0; i < 4; ++i) at_one += one.coeffs[i] * v[i];
    if (mod_floor(at_one, p) != 1) continue;
    bool hom = true;
    for (int i = 0; i < 4 && hom; ++i) {
      for (int j = i; j < 4 && hom; ++j) {
        std::int64_t rhs = 0;
        for (int l = 0; l < 4; ++l) rhs += mod_floor(f.structure_constant(i, j, l), p) * v[l];
        hom = mod_floor(v[i] * v[j] - rhs, p) == 0;
      }
    }
    if (hom) found.push_back(PrimeIdealAboveP{p, v, 1});
  }
  if (found.size() != 4)
    throw Error(ErrorCode::NotCompletelySplit, std::to_string(p) + " has " + std::to_string(found.size()) +
                                                   " degree-one primes above it, not 4");
  return found;
}

std::shared_ptr<const CrtContext> CrtContext::build(FieldPtr field, std::int64_t p) {
  auto ctx = std::shared_ptr<CrtContext>(new CrtContext());
  ctx->primes_ = find_primes_above(*field, p);
  ctx->field_ = std::move(field);
  ctx->p_ = p;
  ctx->modulus_norm_ = p * p * p * p;

  std::array<std::array<std::int64_t, 4>, 4> R{};
  for (int i = 0; i < 4; ++i) R[i] = ctx->primes_[i].reduction_map;
  for (int j = 0; j < 4; ++j) {
    std::array<std::int64_t, 4> delta{};
    delta[j] = 1;
    ctx->idempotents_[j].coeffs = solve_mod_p(R, delta, p);
  }
  return ctx;
}

OkElement CrtContext::reduce_mod_p(const OkElement& x) const {
  OkElement r;
  for (int i = 0; i < 4; ++i) r.coeffs[i] = mod_floor(x.coeffs[i], p_);
  return r;
}

bool CrtContext::congruent_mod_p(const OkElement& x, const OkElement& y) const {
  for (int i = 0; i < 4; ++i)
    if (mod_floor(x.coeffs[i] - y.coeffs[i], p_) != 0) return false;
  return true;
}

nlohmann::json CrtContext::to_json() const {
  nlohmann::json j;
  j["p"] = p_;
  auto maps = nlohmann::json::array();
  for (const auto& pr : primes_) maps.push_back(pr.reduction_map);
  j["reduction_maps"] = maps;
  auto idem = nlohmann::json::array();
  for (const auto& e : idempotents_) idem.push_back(e.coeffs);
  j["idempotents"] = idem;
  j["modulus_norm"] = modulus_norm_;
  return j;
}

Residues crt_forward(const CrtContext& ctx, const OkElement& x) {
  Residues r{};
  for (int j = 0; j < 4; ++j) r[j] = ctx.primes()[j].reduce(x);
  return r;
}

OkElement crt_inverse(const CrtContext& ctx, const Residues& v) {
  OkElement acc;
  for (int j = 0; j < 4; ++j) acc = acc + scale(mod_floor(v[j], ctx.p()), ctx.idempotents()[j]);
  return ctx.reduce_mod_p(acc);
}

}  // namespace mqlat
