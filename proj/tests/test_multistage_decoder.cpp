#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "mqlat/error.hpp"
#include "mqlat/multistage_decoder.hpp"
#include "mqlat/rng.hpp"
#include "oracles.hpp"

using namespace mqlat;

namespace {

CrtPtr q17_33() {
  static const CrtPtr ctx = build_crt_context(build_field(17, 33), 2);
  return ctx;
}

NestedPiAConfig uncoded(double gamma) {
  std::vector<NestedCodePair> p;
  for (int j = 0; j < 4; ++j)
    p.push_back(make_nested_pair(std::make_shared<const LdpcCode>(1, std::vector<std::vector<std::uint32_t>>{}), 0, 0));
  return NestedPiAConfig(q17_33(), {p[0], p[1], p[2], p[3]}, identity_interleavers(1), gamma);
}

double dist2(const std::array<double, 4>& y, const NestedPiAConfig& cfg, int r) {
  double d = 0;
  for (int k = 0; k < 4; ++k) {
    const double t = y[k] - cfg.gamma() * cfg.unit_point(r)[k];
    d += t * t;
  }
  return d;
}

LevelMessages random_msgs(const NestedPiAConfig& cfg, Rng& rng) {
  LevelMessages m;
  for (int j = 0; j < 4; ++j) {
    m[j].resize(cfg.level(j).k_b());
    for (auto& b : m[j]) b = rng() & 1;
  }
  return m;
}

struct Frame {
  LevelMessages msgs;
  std::vector<std::uint8_t> residues;
  std::vector<double> y;
};

Frame noisy_frame(const NestedPiAConfig& cfg, std::uint64_t seed, std::uint64_t idx, double sigma) {
  Rng rng = make_stream(seed, "frame", idx);
  Frame f;
  f.msgs = random_msgs(cfg, rng);
  f.residues = encode_residues(cfg, f.msgs);
  f.y = embed_residues(cfg, f.residues);
  GaussianSource g;
  for (auto& v : f.y) v += sigma * g(rng);
  return f;
}

std::size_t bit_errors(const LevelMessages& a, const LevelMessages& b, int level) {
  std::size_t e = 0;
  for (std::size_t i = 0; i < a[level].size(); ++i) e += a[level][i] != b[level][i];
  return e;
}

// gamma giving per-real-dimension SNR `db` on the unit-variance channel.
double gamma_for(double db) { return std::sqrt(std::pow(10.0, db / 10.0) / exact_mean_energy(uncoded(1.0))); }

}  // namespace

TEST_CASE("symbol likelihoods: normalization, limits, nearest point") {
  const auto cfg = uncoded(1.3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 8.0);
  for (int t = 0; t < 1000; ++t) {
    std::array<double, 4> y{u(rng), u(rng), u(rng), u(rng)};
    const auto p = symbol_likelihoods(y, cfg, 0.7);
    double s = 0;
    int arg = 0;
    for (int r = 0; r < 16; ++r) {
      CHECK(p[r] >= 0.0);
      s += p[r];
      if (p[r] > p[arg]) arg = r;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    int nearest = 0;
    for (int r = 1; r < 16; ++r)
      if (dist2(y, cfg, r) < dist2(y, cfg, nearest)) nearest = r;
    CHECK(arg == nearest);
  }
  for (int r = 0; r < 16; ++r) {
    std::array<double, 4> y{};
    for (int k = 0; k < 4; ++k) y[k] = cfg.gamma() * cfg.unit_point(r)[k];
    CHECK(symbol_likelihoods(y, cfg, 1e-3)[r] == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : symbol_likelihoods(y, cfg, 1e6)) CHECK(v == doctest::Approx(1.0 / 16).epsilon(1e-6));
  }
  CHECK_THROWS_AS(symbol_likelihoods(std::array<double, 4>{}, cfg, 0.0), Error);
}

TEST_CASE("level LLRs: flat, noiseless, exhaustive posterior oracle") {
  const auto cfg = uncoded(1.0);
  SymbolLikelihoodTable flat;
  flat.log_prob.assign(5, {});
  for (auto& row : flat.log_prob) row.fill(std::log(1.0 / 16));
  for (int j = 0; j < 4; ++j)
    for (double v : level_llr(flat, j, {}, 0)) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));

  for (int r = 0; r < 16; ++r) {
    std::vector<double> y(4);
    for (int k = 0; k < 4; ++k) y[k] = cfg.unit_point(r)[k];
    const auto t = likelihood_table(y, cfg, 1e-3);
    for (int j = 0; j < 4; ++j) CHECK(level_llr(t, j, {}, 0)[0] == ((r >> j) & 1 ? -kLlrClip : kLlrClip));
  }

  // Level-2 LLR given the true level-1 bit against direct marginalization over 8 residues.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 1.0);
  const auto c2 = uncoded(2.0);
  for (int t = 0; t < 2000; ++t) {
    const int r = static_cast<int>(rng() % 16);
    std::vector<double> y(4);
    for (int k = 0; k < 4; ++k) y[k] = c2.gamma() * c2.unit_point(r)[k] + 1.5 * z(rng);
    const auto tab = likelihood_table(y, c2, 1.5);
    const std::uint8_t d = static_cast<std::uint8_t>(r & 1);
    const double llr = level_llr(tab, 1, std::vector<std::uint8_t>{d}, 1u)[0];
    double p0 = 0, p1 = 0;
    std::array<double, 4> ya{y[0], y[1], y[2], y[3]};
    for (int s = 0; s < 16; ++s) {
      if ((s & 1) != d) continue;
      const double w = std::exp(-dist2(ya, c2, s) / (2 * 1.5 * 1.5));
      ((s >> 1) & 1 ? p1 : p0) += w;
    }
    const double oracle = std::clamp(std::log(p0) - std::log(p1), -kLlrClip, kLlrClip);
    REQUIRE(llr == doctest::Approx(oracle).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("level LLR argument checks") {
  SymbolLikelihoodTable t;
  t.log_prob.assign(2, {});
  for (auto& row : t.log_prob) row.fill(std::log(1.0 / 16));
  CHECK_THROWS_AS(level_llr(t, 1, std::vector<std::uint8_t>{2, 0}, 1u), Error);  // bit outside the mask
  CHECK_THROWS_AS(level_llr(t, 0, std::vector<std::uint8_t>{1, 0}, 1u), Error);  // level already decided
  CHECK_THROWS_AS(level_llr(t, 2, {}, 3u), Error);
  CHECK_THROWS_AS(level_llr(t, 1, std::vector<std::uint8_t>{0}, 1u), Error);
  try {
    level_llr(t, 1, std::vector<std::uint8_t>{2, 0}, 1u);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentDecisions);
  }
}

TEST_CASE("n = 1 uncoded SMD equals the greedy exhaustive decision") {
  const auto cfg = uncoded(1.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z(0.0, 1.0);
  int mismatches = 0;
  for (int t = 0; t < 10000; ++t) {
    const double sigma = 0.2 + 0.1 * (t % 20);
    const int r = static_cast<int>(rng() % 16);
    std::array<double, 4> y{};
    for (int k = 0; k < 4; ++k) y[k] = cfg.unit_point(r)[k] + sigma * z(rng);
    const auto res = smd_decode(y, cfg, sigma);
    const int decided = oracle::greedy_residue(cfg, y, sigma);
    mismatches += res.residues[0] != decided;
    for (int j = 0; j < 4; ++j) mismatches += res.messages[j][0] != ((decided >> j) & 1);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("noiseless recovery by both decoders, no NaN at extremes") {
  const auto cfg = make_ldpc_config(q17_33(), 200, 0, 3).with_gamma(gamma_for(20.0));
  Rng rng = make_stream(1, "msgs");
  for (int t = 0; t < 5; ++t) {
    const auto m = random_msgs(cfg, rng);
    const auto y = encode_message(cfg, m).euclid;
    for (const auto& res : {smd_decode(y, cfg, 0.05), pmd_decode(y, cfg, 0.05)}) {
      for (int j = 0; j < 4; ++j) {
        CHECK(res.converged[j]);
        CHECK(res.messages[j] == m[j]);
      }
      CHECK(res.residues == encode_residues(cfg, m));
    }
  }
  const auto small = make_ldpc_config(q17_33(), 12, 0, 3);
  std::mt19937_64 r2(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double scale : {1.0, 1e3}) {
    for (double sigma : {1e-3, 1.0, 1e3}) {
      std::vector<double> y(small.N());
      for (auto& v : y) v = scale * u(r2) / 2.0;
      const auto t = likelihood_table(y, small, sigma);
      std::vector<std::uint8_t> dec(small.n(), 1);
      for (int j = 0; j < 4; ++j)
        for (double v : level_llr(t, j, j ? std::span<const std::uint8_t>(dec) : std::span<const std::uint8_t>{},
                                  j ? 1u : 0u))
          CHECK(std::isfinite(v));
      if (sigma < 1) continue;
      for (const auto& row : t.log_prob)
        for (double v : row) CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("PMD level-1 LLRs coincide with SMD level-1 LLRs") {
  const auto cfg = make_ldpc_config(q17_33(), 100, 0, 6).with_gamma(gamma_for(14.0));
  const auto f = noisy_frame(cfg, 2, 0, 1.0);
  const auto t = likelihood_table(f.y, cfg, 1.0);
  const auto a = level_llr(t, 0, {}, 0);
  const auto b = level_llr(t, 0, std::vector<std::uint8_t>(cfg.n(), 0), 0u);
  CHECK(a == b);
  // Level 1 is decoded identically by both decoders.
  const auto s = smd_decode(t, cfg), p = pmd_decode(t, cfg);
  CHECK(s.messages[0] == p.messages[0]);
  CHECK(s.iterations[0] == p.iterations[0]);
}

TEST_CASE("uninformative channel gives BER near 1/2 per level") {
  const auto cfg = make_ldpc_config(q17_33(), 800, 0, 7).with_gamma(1.0);
  std::array<std::size_t, 4> errs{}, bits{};
  BpOptions bp;
  bp.max_iters = 5;
  for (std::uint64_t f = 0; f < 63; ++f) {  // 63 * 400 > 2.5e4 bits per level, > 1e5 overall
    const auto fr = noisy_frame(cfg, 4, f, 1e4);
    const auto res = smd_decode(fr.y, cfg, 1e4, {bp, std::nullopt});
    for (int j = 0; j < 4; ++j) {
      errs[j] += bit_errors(fr.msgs, res.messages, j);
      bits[j] += fr.msgs[j].size();
    }
  }
  for (int j = 0; j < 4; ++j) CHECK(std::abs(static_cast<double>(errs[j]) / bits[j] - 0.5) < 0.05);
}

TEST_CASE("PMD is no better than SMD, genie SIC is no worse than decoded SIC") {
  const auto cfg = make_ldpc_config(q17_33(), 800, 0, 1).with_gamma(gamma_for(16.5));
  int smd_fe = 0, pmd_fe = 0;
  std::array<std::size_t, 4> dec_err{}, genie_err{};
  std::size_t bits = 0;
  for (std::uint64_t f = 0; f < 200; ++f) {
    const auto fr = noisy_frame(cfg, 9, f, 1.0);
    const auto t = likelihood_table(fr.y, cfg, 1.0);
    const auto s = smd_decode(t, cfg);
    const auto p = pmd_decode(t, cfg);
    const auto g = smd_decode(t, cfg, {BpOptions{}, fr.residues});
    bool se = false, pe = false;
    for (int j = 0; j < 4; ++j) {
      se |= s.messages[j] != fr.msgs[j];
      pe |= p.messages[j] != fr.msgs[j];
      dec_err[j] += bit_errors(fr.msgs, s.messages, j);
      genie_err[j] += bit_errors(fr.msgs, g.messages, j);
    }
    bits += fr.msgs[0].size();
    smd_fe += se;
    pmd_fe += pe;
  }
  MESSAGE("SMD FER " << smd_fe / 200.0 << ", PMD FER " << pmd_fe / 200.0);
  CHECK(pmd_fe >= smd_fe);
  CHECK(genie_err[0] == dec_err[0]);  // nothing to cancel at level 1
  for (int j = 1; j < 4; ++j) {
    const double pd = static_cast<double>(dec_err[j]) / bits, pg = static_cast<double>(genie_err[j]) / bits;
    const double sd = 3.0 * std::sqrt(std::max(pd, 1.0 / bits) / bits);
    CHECK(pg <= pd + sd);
  }
}

TEST_CASE("full-size round trip at 24 dB") {
  const auto cfg = make_ldpc_config(q17_33(), 800, 0, 1).with_gamma(gamma_for(24.0));
  int fe = 0;
  for (std::uint64_t f = 0; f < 100; ++f) {
    const auto fr = noisy_frame(cfg, 12, f, 1.0);
    const auto res = smd_decode(fr.y, cfg, 1.0);
    bool bad = false;
    for (int j = 0; j < 4; ++j) bad |= res.messages[j] != fr.msgs[j] || !res.converged[j];
    if (!bad) CHECK(res.residues == fr.residues);
    fe += bad;
  }
  CHECK(fe / 100.0 < 1e-2);
}
