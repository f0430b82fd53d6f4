#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "json.hpp"
#include "mqlat/number_field.hpp"

namespace mqlat {

enum class Splitting { Split, Inert, Ramified };

const char* to_string(Splitting s);

// Legendre symbol (a/p) by Euler's criterion; p must be an odd prime.
int legendre(std::int64_t a, std::int64_t p);

// How the prime p decomposes in Q(sqrt d).
Splitting quadratic_splitting(std::int64_t d, std::int64_t p);

bool splits_completely(const BiquadraticField& f, std::int64_t p);

// A degree-one prime above p, stored as its reduction map O_K -> F_p
// (images of the integral basis).
struct PrimeIdealAboveP {
  std::int64_t p = 0;
  std::array<std::int64_t, 4> reduction_map{};
  int residue_degree = 1;

  std::int64_t reduce(const OkElement& x) const;
};

// All unital ring homomorphisms O_K -> F_p, in lexicographic order of their maps.
// Throws NotCompletelySplit unless there are exactly four.
std::vector<PrimeIdealAboveP> find_primes_above(const BiquadraticField& f, std::int64_t p);

using Residues = std::array<std::int64_t, 4>;

class CrtContext {
 public:
  static std::shared_ptr<const CrtContext> build(FieldPtr field, std::int64_t p);

  const BiquadraticField& field() const { return *field_; }
  const FieldPtr& field_ptr() const { return field_; }
  std::int64_t p() const { return p_; }
  const std::vector<PrimeIdealAboveP>& primes() const { return primes_; }
  const std::array<OkElement, 4>& idempotents() const { return idempotents_; }
  std::int64_t modulus_norm() const { return modulus_norm_; }

  // Representative of x mod pO_K with coefficients in {0, ..., p-1}.
  OkElement reduce_mod_p(const OkElement& x) const;
  bool congruent_mod_p(const OkElement& x, const OkElement& y) const;

  nlohmann::json to_json() const;

 private:
  CrtContext() = default;
  FieldPtr field_;
  std::int64_t p_ = 0;
  std::vector<PrimeIdealAboveP> primes_;
  std::array<OkElement, 4> idempotents_{};
  std::int64_t modulus_norm_ = 0;
};

using CrtPtr = std::shared_ptr<const CrtContext>;

inline CrtPtr build_crt_context(FieldPtr f, std::int64_t p) { return CrtContext::build(std::move(f), p); }

Residues crt_forward(const CrtContext& ctx, const OkElement& x);
OkElement crt_inverse(const CrtContext& ctx, const Residues& v);

}  // namespace mqlat
