#include "mqlat/binary_codes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "mqlat/error.hpp"
#include "mqlat/rng.hpp"

namespace mqlat {

LdpcCode::LdpcCode(std::size_t n, std::vector<std::vector<std::uint32_t>> checks)
    : n_(n), checks_(std::move(checks)), vars_(n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "code length must be positive");
  for (std::size_t c = 0; c < checks_.size(); ++c) {
    auto& row = checks_[c];
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end())
      throw Error(ErrorCode::InvalidArgument, "parallel edge in check " + std::to_string(c));
    for (auto v : row) {
      if (v >= n) throw Error(ErrorCode::InvalidArgument, "check references a position beyond n");
      vars_[v].push_back(static_cast<std::uint32_t>(c));
    }
    num_edges_ += row.size();
  }

  const std::size_t words = (n + 63) / 64;
  std::vector<Row> rows;
  rows.reserve(checks_.size());
  for (const auto& chk : checks_) {
    Row r(words, 0);
    for (auto v : chk) r[v / 64] |= std::uint64_t{1} << (v % 64);
    rows.push_back(std::move(r));
  }

  std::vector<std::uint8_t> is_pivot(n, 0);
  std::size_t rank = 0;
  for (std::size_t col = 0; col < n && rank < rows.size(); ++col) {
    const std::size_t w = col / 64;
    const std::uint64_t bit = std::uint64_t{1} << (col % 64);
    std::size_t piv = rank;
    while (piv < rows.size() && !(rows[piv][w] & bit)) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[rank]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || !(rows[r][w] & bit)) continue;
      for (std::size_t t = 0; t < words; ++t) rows[r][t] ^= rows[rank][t];
    }
    pivots_.push_back(static_cast<std::uint32_t>(col));
    is_pivot[col] = 1;
    ++rank;
  }
  rank_ = rank;
  rows.resize(rank);
  reduced_ = std::move(rows);
  for (std::size_t col = 0; col < n; ++col)
    if (!is_pivot[col]) info_.push_back(static_cast<std::uint32_t>(col));
}

Bits LdpcCode::encode(std::span<const std::uint8_t> msg) const {
  if (msg.size() != k()) throw Error(ErrorCode::LengthMismatch, "message length differs from code dimension");
  const std::size_t words = (n_ + 63) / 64;
  Row c(words, 0);
  Bits out(n_, 0);
  for (std::size_t i = 0; i < info_.size(); ++i) {
    if (msg[i] & 1) {
      c[info_[i] / 64] |= std::uint64_t{1} << (info_[i] % 64);
      out[info_[i]] = 1;
    }
  }
  for (std::size_t i = 0; i < pivots_.size(); ++i) {
    unsigned parity = 0;
    for (std::size_t t = 0; t < words; ++t) parity += std::popcount(reduced_[i][t] & c[t]);
    out[pivots_[i]] = parity & 1;
  }
  return out;
}

Bits LdpcCode::extract_message(std::span<const std::uint8_t> codeword) const {
  if (codeword.size() != n_) throw Error(ErrorCode::LengthMismatch, "word length differs from n");
  Bits msg(info_.size());
  for (std::size_t i = 0; i < info_.size(); ++i) msg[i] = codeword[info_[i]] & 1;
  return msg;
}

bool LdpcCode::is_codeword(std::span<const std::uint8_t> word) const {
  if (word.size() != n_) throw Error(ErrorCode::LengthMismatch, "word length differs from n");
  for (const auto& chk : checks_) {
    unsigned s = 0;
    for (auto v : chk) s ^= word[v] & 1;
    if (s) return false;
  }
  return true;
}

std::vector<Bits> LdpcCode::generator() const {
  std::vector<Bits> g;
  g.reserve(k());
  Bits msg(k(), 0);
  for (std::size_t i = 0; i < k(); ++i) {
    msg[i] = 1;
    g.push_back(encode(msg));
    msg[i] = 0;
  }
  return g;
}

namespace {

bool try_peg(std::size_t n, std::size_t m, int dv, int dc, Rng& rng,
             std::vector<std::vector<std::uint32_t>>& checks_out) {
  const auto tie_rank = random_permutation(m, rng);
  std::vector<std::vector<std::uint32_t>> chk_adj(m), var_adj(n);
  std::vector<int> deg(m, 0);
  std::vector<std::uint32_t> chk_stamp(m, 0), var_stamp(n, 0);
  std::uint32_t stamp = 0;

  auto better = [&](std::uint32_t x, std::uint32_t y) {
    return deg[x] != deg[y] ? deg[x] < deg[y] : tie_rank[x] < tie_rank[y];
  };
  auto eligible = [&](std::uint32_t c, std::size_t v) {
    return deg[c] < dc && std::find(var_adj[v].begin(), var_adj[v].end(), c) == var_adj[v].end();
  };

  std::vector<std::vector<std::uint32_t>> levels;
  for (std::size_t v = 0; v < n; ++v) {
    for (int e = 0; e < dv; ++e) {
      std::int64_t pick = -1;
      if (e == 0) {
        for (std::uint32_t c = 0; c < m; ++c)
          if (deg[c] < dc && (pick < 0 || better(c, static_cast<std::uint32_t>(pick)))) pick = c;
      } else {
        ++stamp;
        levels.clear();
        std::size_t reached = 0;
        std::vector<std::uint32_t> frontier;
        var_stamp[v] = stamp;
        for (auto c : var_adj[v]) {
          chk_stamp[c] = stamp;
          frontier.push_back(c);
        }
        reached = frontier.size();
        bool exhausted = false;
        for (;;) {
          levels.push_back(frontier);
          if (reached == m) {
            exhausted = true;
            break;
          }
          std::vector<std::uint32_t> next;
          for (auto c : frontier) {
            for (auto u : chk_adj[c]) {
              if (var_stamp[u] == stamp) continue;
              var_stamp[u] = stamp;
              for (auto c2 : var_adj[u]) {
                if (chk_stamp[c2] == stamp) continue;
                chk_stamp[c2] = stamp;
                next.push_back(c2);
              }
            }
          }
          if (next.empty()) break;
          reached += next.size();
          frontier = std::move(next);
        }
        if (!exhausted) {
          // Some checks are unreachable from v: connecting to one adds no cycle.
          for (std::uint32_t c = 0; c < m; ++c)
            if (chk_stamp[c] != stamp && deg[c] < dc && (pick < 0 || better(c, static_cast<std::uint32_t>(pick))))
              pick = c;
        }
        // Otherwise (or if every unreachable check is full) take the deepest level
        // that still has an eligible check.
        for (std::size_t l = levels.size(); pick < 0 && l-- > 0;) {
          for (auto c : levels[l])
            if (eligible(c, v) && (pick < 0 || better(c, static_cast<std::uint32_t>(pick)))) pick = c;
        }
        if (pick < 0) {
          for (std::uint32_t c = 0; c < m; ++c)
            if (eligible(c, v) && (pick < 0 || better(c, static_cast<std::uint32_t>(pick)))) pick = c;
        }
      }
      if (pick < 0 || !eligible(static_cast<std::uint32_t>(pick), v)) return false;
      const auto c = static_cast<std::uint32_t>(pick);
      chk_adj[c].push_back(static_cast<std::uint32_t>(v));
      var_adj[v].push_back(c);
      ++deg[c];
    }
  }
  checks_out = std::move(chk_adj);
  return true;
}

}  // namespace

CodePtr peg_construct(std::size_t n, int var_deg, int chk_deg, std::uint64_t seed) {
  if (n == 0 || var_deg < 1 || chk_deg < 1 || (n * static_cast<std::size_t>(var_deg)) % chk_deg != 0)
    throw Error(ErrorCode::InfeasibleProfile, "n * var_deg must be a positive multiple of chk_deg");
  const std::size_t m = n * static_cast<std::size_t>(var_deg) / static_cast<std::size_t>(chk_deg);
  if (static_cast<std::size_t>(var_deg) > m || static_cast<std::size_t>(chk_deg) > n)
    throw Error(ErrorCode::InfeasibleProfile, "degrees exceed the number of opposite nodes");
  for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
    Rng rng = make_stream(seed, "peg", attempt);
    std::vector<std::vector<std::uint32_t>> checks;
    if (try_peg(n, m, var_deg, chk_deg, rng, checks)) return std::make_shared<LdpcCode>(n, std::move(checks));
  }
  throw Error(ErrorCode::InfeasibleProfile, "progressive edge growth could not complete the degree profile");
}

BpResult bp_decode(const LdpcCode& code, std::span<const double> llr, const BpOptions& opts) {
  const std::size_t n = code.n();
  if (llr.size() != n) throw Error(ErrorCode::LengthMismatch, "LLR vector length differs from n");
  const double clip = opts.llr_clip;
  const double tclip = std::tanh(clip / 2.0);
  const auto& checks = code.checks();

  std::vector<double> L(n);
  for (std::size_t v = 0; v < n; ++v) L[v] = std::clamp(llr[v], -clip, clip);
  std::vector<double> R(code.num_edges(), 0.0);
  std::vector<double> Q, t, fwd;

  BpResult res;
  res.bits.assign(n, 0);
  auto decide_and_check = [&] {
    for (std::size_t v = 0; v < n; ++v) res.bits[v] = L[v] < 0.0 ? 1 : 0;
    return code.is_codeword(res.bits);
  };

  for (int it = 0; it < opts.max_iters; ++it) {
    std::size_t off = 0;
    for (const auto& chk : checks) {
      const std::size_t d = chk.size();
      Q.resize(d);
      t.resize(d);
      fwd.resize(d);
      for (std::size_t i = 0; i < d; ++i) {
        Q[i] = L[chk[i]] - R[off + i];
        t[i] = std::tanh(0.5 * Q[i]);
      }
      double acc = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        fwd[i] = acc;
        acc *= t[i];
      }
      double bwd = 1.0;
      for (std::size_t i = d; i-- > 0;) {
        const double prod = std::clamp(fwd[i] * bwd, -tclip, tclip);
        const double msg = d == 1 ? 0.0 : 2.0 * std::atanh(prod);
        R[off + i] = msg;
        L[chk[i]] = Q[i] + msg;
        bwd *= t[i];
      }
      off += d;
    }
    res.iterations = it + 1;
    res.converged = decide_and_check();
    if (res.converged && opts.early_stop) break;
  }
  if (opts.max_iters <= 0) res.converged = decide_and_check();
  res.posterior = std::move(L);
  return res;
}

NestedCodePair::NestedCodePair(CodePtr fine, std::vector<std::uint32_t> coarse_rows)
    : fine_(std::move(fine)), coarse_rows_(std::move(coarse_rows)), is_coarse_row_(fine_->k(), 0) {
  std::sort(coarse_rows_.begin(), coarse_rows_.end());
  for (auto r : coarse_rows_) {
    if (r >= fine_->k() || is_coarse_row_[r])
      throw Error(ErrorCode::InvalidArgument, "coarse rows must be distinct rows of the fine generator");
    is_coarse_row_[r] = 1;
  }
}

Bits NestedCodePair::encode_coarse(std::span<const std::uint8_t> msg) const {
  if (msg.size() != k_e()) throw Error(ErrorCode::LengthMismatch, "coarse message length differs from k_e");
  Bits full(k_b(), 0);
  for (std::size_t i = 0; i < coarse_rows_.size(); ++i) full[coarse_rows_[i]] = msg[i] & 1;
  return fine_->encode(full);
}

bool NestedCodePair::in_coarse(std::span<const std::uint8_t> word) const {
  if (!fine_->is_codeword(word)) return false;
  const auto& info = fine_->info_positions();
  for (std::size_t i = 0; i < info.size(); ++i)
    if (!is_coarse_row_[i] && (word[info[i]] & 1)) return false;
  return true;
}

std::vector<Bits> NestedCodePair::coarse_generator() const {
  const auto g = fine_->generator();
  std::vector<Bits> out;
  for (auto r : coarse_rows_) out.push_back(g[r]);
  return out;
}

NestedCodePair make_nested_pair(CodePtr fine, std::size_t k_e, std::uint64_t seed) {
  if (k_e > fine->k()) throw Error(ErrorCode::DimensionTooLarge, "k_e exceeds the fine code dimension");
  Rng rng = make_stream(seed, "nested");
  auto perm = random_permutation(fine->k(), rng);
  perm.resize(k_e);
  return NestedCodePair(std::move(fine), std::move(perm));
}

void write_alist(const LdpcCode& code, std::ostream& out) {
  const auto& checks = code.checks();
  const auto& vars = code.var_neighbors();
  std::size_t max_col = 0, max_row = 0;
  for (const auto& v : vars) max_col = std::max(max_col, v.size());
  for (const auto& c : checks) max_row = std::max(max_row, c.size());
  out << code.n() << ' ' << code.m_chk() << '\n' << max_col << ' ' << max_row << '\n';
  for (std::size_t i = 0; i < vars.size(); ++i) out << vars[i].size() << (i + 1 < vars.size() ? " " : "\n");
  for (std::size_t i = 0; i < checks.size(); ++i) out << checks[i].size() << (i + 1 < checks.size() ? " " : "\n");
  if (checks.empty()) out << '\n';
  auto emit = [&out](const std::vector<std::uint32_t>& idx, std::size_t width) {
    for (std::size_t j = 0; j < width; ++j) {
      out << (j < idx.size() ? idx[j] + 1 : 0) << (j + 1 < width ? " " : "");
    }
    out << '\n';
  };
  for (const auto& v : vars) emit(v, max_col);
  for (const auto& c : checks) emit(c, max_row);
}

CodePtr read_alist(std::istream& in) {
  auto next = [&in]() {
    long long x;
    if (!(in >> x) || x < 0) throw Error(ErrorCode::ParseError, "malformed alist stream");
    return static_cast<std::size_t>(x);
  };
  const std::size_t n = next(), m = next();
  const std::size_t max_col = next(), max_row = next();
  std::vector<std::size_t> col_deg(n), row_deg(m);
  for (auto& d : col_deg) d = next();
  for (auto& d : row_deg) d = next();
  std::vector<std::vector<std::uint32_t>> cols(n), rows(m);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t j = 0; j < max_col; ++j) {
      const std::size_t x = next();
      if (x != 0) cols[v].push_back(static_cast<std::uint32_t>(x - 1));
    }
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t j = 0; j < max_row; ++j) {
      const std::size_t x = next();
      if (x != 0) {
        if (x > n) throw Error(ErrorCode::ParseError, "alist column index out of range");
        rows[c].push_back(static_cast<std::uint32_t>(x - 1));
      }
    }
  for (std::size_t c = 0; c < m; ++c)
    if (rows[c].size() != row_deg[c]) throw Error(ErrorCode::ParseError, "alist row degree mismatch");
  auto code = std::make_shared<LdpcCode>(n, std::move(rows));
  for (std::size_t v = 0; v < n; ++v) {
    auto a = cols[v], b = code->var_neighbors()[v];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b || a.size() != col_deg[v]) throw Error(ErrorCode::ParseError, "alist column section disagrees with rows");
  }
  return code;
}

}  // namespace mqlat
