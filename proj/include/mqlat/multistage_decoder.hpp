#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mqlat/binary_codes.hpp"
#include "mqlat/pi_a_lattice.hpp"

namespace mqlat {

inline constexpr double kLlrClip = 30.0;

// Per symbol, the normalized log-probabilities of the 16 residue classes.
struct SymbolLikelihoodTable {
  std::vector<std::array<double, 16>> log_prob;

  std::size_t size() const { return log_prob.size(); }
  std::array<double, 16> probabilities(std::size_t i) const;
};

// Posterior over the 16 scaled constellation points for one received 4-vector.
std::array<double, 16> symbol_likelihoods(std::span<const double> y, const NestedPiAConfig& cfg, double sigma);

// Whole-frame table; `variance` holds one noise variance per real coordinate when
// given, otherwise sigma^2 is used everywhere.
SymbolLikelihoodTable likelihood_table(std::span<const double> y, const NestedPiAConfig& cfg, double sigma,
                                       std::span<const double> variance = {});

// Level-j LLR per symbol given the residue bits in `known_mask` (bit l set when level l
// is decided); decided[i] carries those bits for symbol i. An empty `decided` means
// nothing is known. Clipped to +-kLlrClip.
std::vector<double> level_llr(const SymbolLikelihoodTable& table, int j, std::span<const std::uint8_t> decided,
                              unsigned known_mask);

struct MultistageOptions {
  BpOptions bp;
  // When set, cancellation uses these true residues instead of the decoder's decisions.
  std::optional<std::vector<std::uint8_t>> genie_residues;
};

struct MultistageResult {
  LevelMessages messages;
  std::array<bool, 4> converged{};
  std::array<int, 4> iterations{};
  // Residue index per symbol assembled from the re-encoded level decisions.
  std::vector<std::uint8_t> residues;
};

MultistageResult smd_decode(const SymbolLikelihoodTable& table, const NestedPiAConfig& cfg,
                            const MultistageOptions& opts = {});
MultistageResult smd_decode(std::span<const double> y, const NestedPiAConfig& cfg, double sigma,
                            const MultistageOptions& opts = {});

MultistageResult pmd_decode(const SymbolLikelihoodTable& table, const NestedPiAConfig& cfg,
                            const MultistageOptions& opts = {});
MultistageResult pmd_decode(std::span<const double> y, const NestedPiAConfig& cfg, double sigma,
                            const MultistageOptions& opts = {});

}  // namespace mqlat
