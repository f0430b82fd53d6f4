#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "mqlat/binary_codes.hpp"
#include "mqlat/ideals_crt.hpp"

namespace mqlat {

enum class Which { Fine, Coarse };

using Interleaver = std::vector<std::uint32_t>;

// Nested pair Lambda_e in Lambda_b built as C + P^n over O_K, with P = pO_K for a
// completely split p = 2 and one binary nested code pair per prime above 2.
//
// Residue classes of O_K / 2O_K are indexed 0..15 with bit j holding the level-j
// CRT coordinate; the representative of a class has integral-basis coefficients in
// {0, 1}. Level j's codeword reaches the symbol stream through its interleaver:
// transmitted symbol i carries code bit interleaver(j)[i].
class NestedPiAConfig {
 public:
  NestedPiAConfig(CrtPtr ctx, std::array<NestedCodePair, 4> levels, std::array<Interleaver, 4> interleavers,
                  double gamma);

  const BiquadraticField& field() const { return ctx_->field(); }
  const CrtContext& ctx() const { return *ctx_; }
  const CrtPtr& ctx_ptr() const { return ctx_; }
  const NestedCodePair& level(int j) const { return levels_[j]; }
  const Interleaver& interleaver(int j) const { return interleavers_[j]; }
  std::size_t n() const { return n_; }
  std::size_t N() const { return 4 * n_; }
  double gamma() const { return gamma_; }
  NestedPiAConfig with_gamma(double gamma) const;

  const OkElement& representative(int residue) const { return reps_[residue]; }
  // sigma_K(representative) before scaling by gamma.
  const Vec4& unit_point(int residue) const { return unit_points_[residue]; }

  std::size_t message_bits() const;

  nlohmann::json to_json() const;

 private:
  CrtPtr ctx_;
  std::array<NestedCodePair, 4> levels_;
  std::array<Interleaver, 4> interleavers_;
  std::size_t n_;
  double gamma_;
  std::array<OkElement, 16> reps_{};
  std::array<Vec4, 16> unit_points_{};
};

struct LatticePoint {
  std::vector<OkElement> symbols;
  std::vector<double> euclid;
};

using LevelMessages = std::array<Bits, 4>;

// Per-level fine-code encoding, interleaving and CRT combination: residue index per symbol.
std::vector<std::uint8_t> encode_residues(const NestedPiAConfig& cfg, const LevelMessages& msgs);
// Level-j bits of a residue stream, de-interleaved back to code order.
Bits level_word(const NestedPiAConfig& cfg, std::span<const std::uint8_t> residues, int j);
std::vector<double> embed_residues(const NestedPiAConfig& cfg, std::span<const std::uint8_t> residues);

LatticePoint encode_message(const NestedPiAConfig& cfg, const LevelMessages& msgs);
LatticePoint make_lattice_point(const NestedPiAConfig& cfg, std::vector<OkElement> symbols);

bool is_lattice_point(const NestedPiAConfig& cfg, std::span<const OkElement> x, Which which);

double log2_lattice_volume(const NestedPiAConfig& cfg, Which which);
double lattice_volume(const NestedPiAConfig& cfg, Which which);
// log2 |Lambda_b / Lambda_e|; the size itself overflows at realistic lengths.
std::int64_t quotient_size_log2(const NestedPiAConfig& cfg);
double design_rate(const NestedPiAConfig& cfg);

// Mean of ||euclid||^2 / N at gamma = 1 over `samples` uniform random messages.
double mean_energy(const NestedPiAConfig& cfg, std::size_t samples, std::uint64_t seed);
// Same quantity by enumerating every message; only for sum of k_b <= 20.
double exact_mean_energy(const NestedPiAConfig& cfg);
double choose_gamma(const NestedPiAConfig& cfg, double power, std::size_t samples = 10000, std::uint64_t seed = 0);

std::array<Interleaver, 4> identity_interleavers(std::size_t n);

// Four PEG (var_deg, chk_deg) levels of length n with coarse dimension k_e each and
// seeded per-level interleavers.
NestedPiAConfig make_ldpc_config(CrtPtr ctx, std::size_t n, std::size_t k_e, std::uint64_t seed,
                                 int var_deg = 3, int chk_deg = 6);

}  // namespace mqlat
