#include "mqlat/multistage_decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mqlat/error.hpp"

namespace mqlat {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void fill_symbol(std::array<double, 16>& out, const double* y, const NestedPiAConfig& cfg, const double* var) {
  double best = kNegInf;
  for (int r = 0; r < 16; ++r) {
    const auto& pt = cfg.unit_point(r);
    double m = 0.0;
    for (int d = 0; d < 4; ++d) {
      const double diff = y[d] - cfg.gamma() * pt[d];
      m -= diff * diff / (2.0 * var[d]);
    }
    out[r] = m;
    best = std::max(best, m);
  }
  double total = 0.0;
  for (double v : out) total += std::exp(v - best);
  const double norm = best + std::log(total);
  for (double& v : out) v -= norm;
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
}

}  // namespace

std::array<double, 16> SymbolLikelihoodTable::probabilities(std::size_t i) const {
  std::array<double, 16> p{};
  for (int r = 0; r < 16; ++r) p[r] = std::exp(log_prob[i][r]);
  return p;
}

std::array<double, 16> symbol_likelihoods(std::span<const double> y, const NestedPiAConfig& cfg, double sigma) {
  if (y.size() != 4) throw Error(ErrorCode::LengthMismatch, "symbol observation must have 4 coordinates");
  check_sigma(sigma);
  const double var[4] = {sigma * sigma, sigma * sigma, sigma * sigma, sigma * sigma};
  std::array<double, 16> lp{};
  fill_symbol(lp, y.data(), cfg, var);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

SymbolLikelihoodTable likelihood_table(std::span<const double> y, const NestedPiAConfig& cfg, double sigma,
                                       std::span<const double> variance) {
  if (y.size() != cfg.N()) throw Error(ErrorCode::LengthMismatch, "observation length differs from N");
  if (!variance.empty() && variance.size() != y.size())
    throw Error(ErrorCode::LengthMismatch, "variance length differs from N");
  if (variance.empty()) check_sigma(sigma);
  SymbolLikelihoodTable t;
  t.log_prob.resize(cfg.n());
  const double flat[4] = {sigma * sigma, sigma * sigma, sigma * sigma, sigma * sigma};
  for (std::size_t i = 0; i < cfg.n(); ++i)
    fill_symbol(t.log_prob[i], y.data() + 4 * i, cfg, variance.empty() ? flat : variance.data() + 4 * i);
  return t;
}

std::vector<double> level_llr(const SymbolLikelihoodTable& table, int j, std::span<const std::uint8_t> decided,
                              unsigned known_mask) {
  if (j < 0 || j > 3) throw Error(ErrorCode::InvalidArgument, "level index out of range");
  const unsigned bit = 1u << j;
  if (known_mask & bit) throw Error(ErrorCode::InconsistentDecisions, "level is already decided");
  if (known_mask > 15) throw Error(ErrorCode::InconsistentDecisions, "decision mask names unknown levels");
  if (decided.empty() && known_mask != 0)
    throw Error(ErrorCode::InconsistentDecisions, "decision mask given without decisions");
  if (!decided.empty() && decided.size() != table.size())
    throw Error(ErrorCode::LengthMismatch, "decision vector length differs from table");
  std::vector<double> llr(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const unsigned want = decided.empty() ? 0u : decided[i];
    if (want & ~known_mask) throw Error(ErrorCode::InconsistentDecisions, "decided pattern matches no residue");
    double l0 = kNegInf, l1 = kNegInf;
    for (unsigned r = 0; r < 16; ++r) {
      if ((r & known_mask) != want) continue;
      if (r & bit)
        l1 = log_sum_exp(l1, table.log_prob[i][r]);
      else
        l0 = log_sum_exp(l0, table.log_prob[i][r]);
    }
    if (l0 == kNegInf && l1 == kNegInf)
      throw Error(ErrorCode::InconsistentDecisions, "decided pattern has zero likelihood");
    double v = (l0 == kNegInf) ? -kLlrClip : (l1 == kNegInf) ? kLlrClip : l0 - l1;
    llr[i] = std::clamp(v, -kLlrClip, kLlrClip);
  }
  return llr;
}

namespace {

// Decode one level from symbol-order LLRs; returns the re-encoded codeword in code order.
Bits decode_level(const NestedPiAConfig& cfg, int j, const std::vector<double>& llr, const BpOptions& bp,
                  MultistageResult& out) {
  const auto& perm = cfg.interleaver(j);
  std::vector<double> code_llr(cfg.n());
  for (std::size_t i = 0; i < cfg.n(); ++i) code_llr[perm[i]] = llr[i];
  const auto& code = cfg.level(j).fine();
  const BpResult r = bp_decode(code, code_llr, bp);
  out.converged[j] = r.converged;
  out.iterations[j] = r.iterations;
  out.messages[j] = code.extract_message(r.bits);
  return code.encode(out.messages[j]);
}

void set_level(const NestedPiAConfig& cfg, int j, const Bits& codeword, std::vector<std::uint8_t>& residues) {
  const auto& perm = cfg.interleaver(j);
  for (std::size_t i = 0; i < cfg.n(); ++i) residues[i] |= static_cast<std::uint8_t>(codeword[perm[i]] << j);
}

void check_table(const SymbolLikelihoodTable& table, const NestedPiAConfig& cfg, const MultistageOptions& opts) {
  if (table.size() != cfg.n()) throw Error(ErrorCode::LengthMismatch, "likelihood table length differs from n");
  if (opts.genie_residues && opts.genie_residues->size() != cfg.n())
    throw Error(ErrorCode::LengthMismatch, "genie residues length differs from n");
}

}  // namespace

MultistageResult smd_decode(const SymbolLikelihoodTable& table, const NestedPiAConfig& cfg,
                            const MultistageOptions& opts) {
  check_table(table, cfg, opts);
  MultistageResult out;
  out.residues.assign(cfg.n(), 0);
  std::vector<std::uint8_t> sic(cfg.n(), 0);
  for (int j = 0; j < 4; ++j) {
    const unsigned mask = (1u << j) - 1u;
    const auto llr = level_llr(table, j, j == 0 ? std::span<const std::uint8_t>{} : sic, mask);
    const Bits cw = decode_level(cfg, j, llr, opts.bp, out);
    set_level(cfg, j, cw, out.residues);
    if (opts.genie_residues) {
      for (std::size_t i = 0; i < cfg.n(); ++i) sic[i] = (*opts.genie_residues)[i] & ((2u << j) - 1u);
    } else {
      sic = out.residues;
    }
  }
  return out;
}

MultistageResult smd_decode(std::span<const double> y, const NestedPiAConfig& cfg, double sigma,
                            const MultistageOptions& opts) {
  return smd_decode(likelihood_table(y, cfg, sigma), cfg, opts);
}

MultistageResult pmd_decode(const SymbolLikelihoodTable& table, const NestedPiAConfig& cfg,
                            const MultistageOptions& opts) {
  check_table(table, cfg, opts);
  MultistageResult out;
  out.residues.assign(cfg.n(), 0);
  for (int j = 0; j < 4; ++j) {
    const Bits cw = decode_level(cfg, j, level_llr(table, j, {}, 0), opts.bp, out);
    set_level(cfg, j, cw, out.residues);
  }
  return out;
}

MultistageResult pmd_decode(std::span<const double> y, const NestedPiAConfig& cfg, double sigma,
                            const MultistageOptions& opts) {
  return pmd_decode(likelihood_table(y, cfg, sigma), cfg, opts);
}

}  // namespace mqlat
