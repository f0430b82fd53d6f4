#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace mqlat {

using Bits = std::vector<std::uint8_t>;

// Binary linear code given by a sparse parity-check matrix H (m_chk x n).
// Construction row-reduces H over F_2 to obtain the true rank, the information
// positions (non-pivot columns) and a systematic encoder.
class LdpcCode {
 public:
  LdpcCode(std::size_t n, std::vector<std::vector<std::uint32_t>> checks);

  std::size_t n() const { return n_; }
  std::size_t m_chk() const { return checks_.size(); }
  std::size_t rank() const { return rank_; }
  std::size_t k() const { return n_ - rank_; }
  std::size_t num_edges() const { return num_edges_; }
  double design_rate() const { return 1.0 - static_cast<double>(m_chk()) / static_cast<double>(n_); }

  const std::vector<std::vector<std::uint32_t>>& checks() const { return checks_; }
  const std::vector<std::vector<std::uint32_t>>& var_neighbors() const { return vars_; }
  // Codeword positions that carry message bits, increasing.
  const std::vector<std::uint32_t>& info_positions() const { return info_; }

  // Dense k x n generator; row i is the codeword of the i-th unit message.
  std::vector<Bits> generator() const;

  Bits encode(std::span<const std::uint8_t> msg) const;
  Bits extract_message(std::span<const std::uint8_t> codeword) const;
  bool is_codeword(std::span<const std::uint8_t> word) const;

 private:
  using Row = std::vector<std::uint64_t>;

  std::size_t n_;
  std::vector<std::vector<std::uint32_t>> checks_;
  std::vector<std::vector<std::uint32_t>> vars_;
  std::size_t num_edges_ = 0;
  std::size_t rank_ = 0;
  std::vector<std::uint32_t> info_;
  std::vector<std::uint32_t> pivots_;
  std::vector<Row> reduced_;  // one row per pivot, reduced row-echelon form
};

using CodePtr = std::shared_ptr<const LdpcCode>;

// Progressive edge growth for a (var_deg, chk_deg)-regular Tanner graph.
// Deterministic in `seed`, which keys the tie-breaking order of check nodes.
CodePtr peg_construct(std::size_t n, int var_deg, int chk_deg, std::uint64_t seed);

struct BpOptions {
  int max_iters = 50;
  double llr_clip = 30.0;
  bool early_stop = true;
};

struct BpResult {
  Bits bits;
  bool converged = false;
  int iterations = 0;
  std::vector<double> posterior;  // a-posteriori LLRs, positive favours 0
};

// Sum-product decoding with a layered (check-serial) schedule.
BpResult bp_decode(const LdpcCode& code, std::span<const double> llr, const BpOptions& opts = {});

// A subcode C_e of C_b spanned by k_e of C_b's generator rows.
class NestedCodePair {
 public:
  NestedCodePair(CodePtr fine, std::vector<std::uint32_t> coarse_rows);

  const LdpcCode& fine() const { return *fine_; }
  const CodePtr& fine_ptr() const { return fine_; }
  std::size_t k_b() const { return fine_->k(); }
  std::size_t k_e() const { return coarse_rows_.size(); }
  // Indices into fine().info_positions() spanning the coarse code.
  const std::vector<std::uint32_t>& coarse_rows() const { return coarse_rows_; }

  Bits encode_fine(std::span<const std::uint8_t> msg) const { return fine_->encode(msg); }
  Bits encode_coarse(std::span<const std::uint8_t> msg) const;
  bool in_fine(std::span<const std::uint8_t> word) const { return fine_->is_codeword(word); }
  bool in_coarse(std::span<const std::uint8_t> word) const;
  std::vector<Bits> coarse_generator() const;

 private:
  CodePtr fine_;
  std::vector<std::uint32_t> coarse_rows_;
  std::vector<std::uint8_t> is_coarse_row_;
};

NestedCodePair make_nested_pair(CodePtr fine, std::size_t k_e, std::uint64_t seed);

// MacKay alist format.
void write_alist(const LdpcCode& code, std::ostream& out);
CodePtr read_alist(std::istream& in);

}  // namespace mqlat
