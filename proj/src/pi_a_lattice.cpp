#include "mqlat/pi_a_lattice.hpp"

#include <cmath>
#include <string>

#include "mqlat/error.hpp"
#include "mqlat/rng.hpp"

namespace mqlat {

NestedPiAConfig::NestedPiAConfig(CrtPtr ctx, std::array<NestedCodePair, 4> levels,
                                 std::array<Interleaver, 4> interleavers, double gamma)
    : ctx_(std::move(ctx)),
      levels_(std::move(levels)),
      interleavers_(std::move(interleavers)),
      n_(levels_[0].fine().n()),
      gamma_(gamma) {
  if (ctx_->p() != 2) throw Error(ErrorCode::UnsupportedCase, "only binary levels (p = 2) are supported");
  if (!(gamma_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  for (int j = 0; j < 4; ++j) {
    if (levels_[j].fine().n() != n_) throw Error(ErrorCode::LengthMismatch, "level codes must share n");
    const auto& perm = interleavers_[j];
    if (perm.size() != n_) throw Error(ErrorCode::LengthMismatch, "interleaver length differs from n");
    std::vector<std::uint8_t> seen(n_, 0);
    for (auto p : perm) {
      if (p >= n_ || seen[p]) throw Error(ErrorCode::InvalidArgument, "interleaver is not a permutation");
      seen[p] = 1;
    }
  }
  for (int r = 0; r < 16; ++r) {
    reps_[r] = crt_inverse(*ctx_, Residues{r & 1, (r >> 1) & 1, (r >> 2) & 1, (r >> 3) & 1});
    unit_points_[r] = embed(field(), reps_[r]);
  }
}

NestedPiAConfig NestedPiAConfig::with_gamma(double gamma) const {
  NestedPiAConfig copy = *this;
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  copy.gamma_ = gamma;
  return copy;
}

std::size_t NestedPiAConfig::message_bits() const {
  std::size_t total = 0;
  for (const auto& l : levels_) total += l.k_b();
  return total;
}

nlohmann::json NestedPiAConfig::to_json() const {
  nlohmann::json j;
  j["field"] = {{"a", field().a()}, {"b", field().b()}};
  j["p"] = ctx_->p();
  j["n"] = n_;
  j["N"] = N();
  j["gamma"] = gamma_;
  auto lv = nlohmann::json::array();
  for (const auto& l : levels_)
    lv.push_back({{"n", l.fine().n()}, {"m_chk", l.fine().m_chk()}, {"k_b", l.k_b()}, {"k_e", l.k_e()}});
  j["levels"] = lv;
  return j;
}

std::vector<std::uint8_t> encode_residues(const NestedPiAConfig& cfg, const LevelMessages& msgs) {
  const std::size_t n = cfg.n();
  std::vector<std::uint8_t> res(n, 0);
  for (int j = 0; j < 4; ++j) {
    if (msgs[j].size() != cfg.level(j).k_b())
      throw Error(ErrorCode::LengthMismatch, "level " + std::to_string(j + 1) + " message has wrong length");
    const Bits c = cfg.level(j).encode_fine(msgs[j]);
    const auto& perm = cfg.interleaver(j);
    for (std::size_t i = 0; i < n; ++i) res[i] |= static_cast<std::uint8_t>(c[perm[i]] << j);
  }
  return res;
}

Bits level_word(const NestedPiAConfig& cfg, std::span<const std::uint8_t> residues, int j) {
  const auto& perm = cfg.interleaver(j);
  Bits w(cfg.n());
  for (std::size_t i = 0; i < cfg.n(); ++i) w[perm[i]] = (residues[i] >> j) & 1;
  return w;
}

std::vector<double> embed_residues(const NestedPiAConfig& cfg, std::span<const std::uint8_t> residues) {
  std::vector<double> x(4 * residues.size());
  for (std::size_t i = 0; i < residues.size(); ++i) {
    const auto& pt = cfg.unit_point(residues[i]);
    for (int d = 0; d < 4; ++d) x[4 * i + d] = cfg.gamma() * pt[d];
  }
  return x;
}

LatticePoint make_lattice_point(const NestedPiAConfig& cfg, std::vector<OkElement> symbols) {
  LatticePoint p;
  p.euclid.resize(4 * symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto e = embed(cfg.field(), symbols[i]);
    for (int d = 0; d < 4; ++d) p.euclid[4 * i + d] = cfg.gamma() * e[d];
  }
  p.symbols = std::move(symbols);
  return p;
}

LatticePoint encode_message(const NestedPiAConfig& cfg, const LevelMessages& msgs) {
  const auto res = encode_residues(cfg, msgs);
  std::vector<OkElement> symbols(res.size());
  for (std::size_t i = 0; i < res.size(); ++i) symbols[i] = cfg.representative(res[i]);
  return make_lattice_point(cfg, std::move(symbols));
}

bool is_lattice_point(const NestedPiAConfig& cfg, std::span<const OkElement> x, Which which) {
  if (x.size() != cfg.n()) throw Error(ErrorCode::LengthMismatch, "lattice vector length differs from n");
  std::vector<std::uint8_t> res(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto r = crt_forward(cfg.ctx(), x[i]);
    res[i] = static_cast<std::uint8_t>(r[0] | (r[1] << 1) | (r[2] << 2) | (r[3] << 3));
  }
  for (int j = 0; j < 4; ++j) {
    const Bits w = level_word(cfg, res, j);
    const bool ok = which == Which::Fine ? cfg.level(j).in_fine(w) : cfg.level(j).in_coarse(w);
    if (!ok) return false;
  }
  return true;
}

double log2_lattice_volume(const NestedPiAConfig& cfg, Which which) {
  const double n = static_cast<double>(cfg.n());
  double bits = 0.0;
  for (int j = 0; j < 4; ++j) {
    const auto k = which == Which::Fine ? cfg.level(j).k_b() : cfg.level(j).k_e();
    // Nm(p_j) = 2 for every prime above a completely split 2.
    bits += (n - static_cast<double>(k)) * std::log2(static_cast<double>(cfg.ctx().p()));
  }
  const auto [r1, r2] = cfg.field().signature();
  bits += -n * r2 + 0.5 * n * std::log2(static_cast<double>(cfg.field().discriminant()));
  return bits;
}

double lattice_volume(const NestedPiAConfig& cfg, Which which) { return std::exp2(log2_lattice_volume(cfg, which)); }

std::int64_t quotient_size_log2(const NestedPiAConfig& cfg) {
  std::int64_t bits = 0;
  for (int j = 0; j < 4; ++j)
    bits += static_cast<std::int64_t>(cfg.level(j).k_b()) - static_cast<std::int64_t>(cfg.level(j).k_e());
  return bits;
}

double design_rate(const NestedPiAConfig& cfg) {
  double sum = 0.0;
  for (int j = 0; j < 4; ++j)
    sum += (static_cast<double>(cfg.level(j).k_b()) - static_cast<double>(cfg.level(j).k_e())) *
           std::log2(static_cast<double>(cfg.ctx().p()));
  return sum / static_cast<double>(4 * cfg.n());
}

namespace {

double energy_per_dim(const NestedPiAConfig& cfg, std::span<const std::uint8_t> res) {
  double e = 0.0;
  for (auto r : res) {
    const auto& pt = cfg.unit_point(r);
    for (double v : pt) e += v * v;
  }
  return e / static_cast<double>(4 * res.size());
}

}  // namespace

double mean_energy(const NestedPiAConfig& cfg, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  Rng rng = make_stream(seed, "energy");
  double acc = 0.0;
  LevelMessages msgs;
  for (std::size_t s = 0; s < samples; ++s) {
    for (int j = 0; j < 4; ++j) {
      msgs[j].resize(cfg.level(j).k_b());
      for (auto& b : msgs[j]) b = rng() & 1;
    }
    acc += energy_per_dim(cfg, encode_residues(cfg, msgs));
  }
  return acc / static_cast<double>(samples);
}

double exact_mean_energy(const NestedPiAConfig& cfg) {
  const std::size_t total = cfg.message_bits();
  if (total > 20) throw Error(ErrorCode::DimensionTooLarge, "exhaustive energy needs at most 20 message bits");
  double acc = 0.0;
  LevelMessages msgs;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << total); ++m) {
    std::size_t bit = 0;
    for (int j = 0; j < 4; ++j) {
      msgs[j].resize(cfg.level(j).k_b());
      for (auto& b : msgs[j]) b = (m >> bit++) & 1;
    }
    acc += energy_per_dim(cfg, encode_residues(cfg, msgs));
  }
  return acc / static_cast<double>(std::uint64_t{1} << total);
}

double choose_gamma(const NestedPiAConfig& cfg, double power, std::size_t samples, std::uint64_t seed) {
  if (!(power > 0.0)) throw Error(ErrorCode::InvalidArgument, "power must be positive");
  const double e1 = mean_energy(cfg.with_gamma(1.0), samples, seed);
  return std::sqrt(power / e1);
}

std::array<Interleaver, 4> identity_interleavers(std::size_t n) {
  std::array<Interleaver, 4> out;
  for (auto& p : out) {
    p.resize(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  }
  return out;
}

NestedPiAConfig make_ldpc_config(CrtPtr ctx, std::size_t n, std::size_t k_e, std::uint64_t seed, int var_deg,
                                 int chk_deg) {
  std::vector<NestedCodePair> pairs;
  std::array<Interleaver, 4> perms;
  for (int j = 0; j < 4; ++j) {
    Rng r = make_stream(seed, "codes", static_cast<std::uint64_t>(j));
    const std::uint64_t peg_seed = r(), nest_seed = r();
    auto code = peg_construct(n, var_deg, chk_deg, peg_seed);
    pairs.push_back(make_nested_pair(code, std::min(k_e, code->k()), nest_seed));
    Rng ri = make_stream(seed, "interleaver", static_cast<std::uint64_t>(j));
    perms[j] = random_permutation(n, ri);
  }
  return NestedPiAConfig(std::move(ctx), {pairs[0], pairs[1], pairs[2], pairs[3]}, std::move(perms), 1.0);
}

}  // namespace mqlat
