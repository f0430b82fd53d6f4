#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "mqlat/error.hpp"
#include "mqlat/integer.hpp"
#include "mqlat/pi_a_lattice.hpp"
#include "mqlat/rng.hpp"
#include "oracles.hpp"

using namespace mqlat;
using oracle::gram_volume;
using oracle::q17_33;
using oracle::random_small_config;
using oracle::uncoded_config;

namespace {

LevelMessages random_msgs(const NestedPiAConfig& cfg, std::mt19937_64& rng) {
  LevelMessages m;
  for (int j = 0; j < 4; ++j) {
    m[j].resize(cfg.level(j).k_b());
    for (auto& b : m[j]) b = rng() & 1;
  }
  return m;
}

// A uniformly random coarse-lattice member: coarse codeword lifted plus 2 * random O_K vector.
std::vector<OkElement> random_coarse_member(const NestedPiAConfig& cfg, std::mt19937_64& rng) {
  LevelMessages m;
  for (int j = 0; j < 4; ++j) {
    Bits msg(cfg.level(j).k_e());
    for (auto& b : msg) b = rng() & 1;
    const Bits c = cfg.level(j).encode_coarse(msg);
    m[j] = cfg.level(j).fine().extract_message(c);
  }
  auto x = encode_message(cfg, m).symbols;
  for (auto& s : x)
    for (auto& c : s.coeffs) c += 2 * (static_cast<std::int64_t>(rng() % 21) - 10);
  return x;
}

}  // namespace

TEST_CASE("constellation representatives form a complete residue system mod 2") {
  const auto cfg = uncoded_config();
  std::set<std::array<std::int64_t, 4>> seen;
  for (int r = 0; r < 16; ++r) {
    const auto& rep = cfg.representative(r);
    for (auto c : rep.coeffs) CHECK((c == 0 || c == 1));
    seen.insert(rep.coeffs);
    const auto res = crt_forward(cfg.ctx(), rep);
    for (int j = 0; j < 4; ++j) CHECK(res[j] == ((r >> j) & 1));
  }
  CHECK(seen.size() == 16);
}

TEST_CASE("n = 1 uncoded encoding reaches exactly the 16 scaled representatives") {
  const auto cfg = uncoded_config().with_gamma(1.7);
  std::set<std::array<std::int64_t, 4>> reached;
  for (int m = 0; m < 16; ++m) {
    LevelMessages msgs;
    for (int j = 0; j < 4; ++j) msgs[j] = {static_cast<std::uint8_t>((m >> j) & 1)};
    const auto pt = encode_message(cfg, msgs);
    reached.insert(pt.symbols[0].coeffs);
    const auto e = embed(cfg.field(), pt.symbols[0]);
    for (int d = 0; d < 4; ++d) CHECK(pt.euclid[d] == doctest::Approx(1.7 * e[d]).epsilon(1e-12));
  }
  std::set<std::array<std::int64_t, 4>> cube;
  for (int x = 0; x < 16; ++x) cube.insert({x & 1, (x >> 1) & 1, (x >> 2) & 1, (x >> 3) & 1});
  CHECK(reached == cube);
}

TEST_CASE("encoding: zero message, membership, length checks") {
  const auto cfg = make_ldpc_config(q17_33(), 96, 10, 5);
  LevelMessages zero;
  for (int j = 0; j < 4; ++j) zero[j].assign(cfg.level(j).k_b(), 0);
  const auto pt = encode_message(cfg, zero);
  for (const auto& s : pt.symbols) CHECK(s == OkElement{});
  for (double v : pt.euclid) CHECK(v == 0.0);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    const auto p = encode_message(cfg, random_msgs(cfg, rng));
    REQUIRE(is_lattice_point(cfg, p.symbols, Which::Fine));
    for (std::size_t i = 0; i < cfg.n(); ++i) {
      const auto e = embed(cfg.field(), p.symbols[i]);
      for (int d = 0; d < 4; ++d) REQUIRE(std::abs(p.euclid[4 * i + d] - e[d]) < 1e-9);
    }
  }
  auto bad = zero;
  bad[2].push_back(0);
  CHECK_THROWS_AS(encode_message(cfg, bad), Error);
  CHECK_THROWS_AS(make_ldpc_config(q17_33(), 96, 10, 5).with_gamma(0.0), Error);
}

TEST_CASE("membership: 2O_K^n, coset shifts, single parity violation") {
  const auto cfg = make_ldpc_config(q17_33(), 60, 8, 11);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<OkElement> z(cfg.n());
    for (auto& s : z)
      for (auto& c : s.coeffs) c = 2 * (static_cast<std::int64_t>(rng() % 41) - 20);
    CHECK(is_lattice_point(cfg, z, Which::Fine));
    CHECK(is_lattice_point(cfg, z, Which::Coarse));

    auto x = encode_message(cfg, random_msgs(cfg, rng)).symbols;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] + scale(2, z[i]);
    CHECK(is_lattice_point(cfg, x, Which::Fine));

    // Flip one level-1 residue: add idempotent e_1 at a single symbol.
    auto y = x;
    const std::size_t pos = rng() % cfg.n();
    y[pos] = y[pos] + cfg.ctx().idempotents()[0];
    CHECK_FALSE(is_lattice_point(cfg, y, Which::Fine));
  }
  std::vector<OkElement> short_vec(cfg.n() - 1);
  CHECK_THROWS_AS(is_lattice_point(cfg, short_vec, Which::Fine), Error);
}

TEST_CASE("group closure, nesting and reduction onto the CRT code") {
  const auto cfg = make_ldpc_config(q17_33(), 120, 25, 21);
  std::mt19937_64 rng(4);
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto x = encode_message(cfg, random_msgs(cfg, rng)).symbols;
    auto y = encode_message(cfg, random_msgs(cfg, rng)).symbols;
    for (auto& s : y) s = s + scale(2, s);  // still a member: adds 2O_K^n
    std::vector<OkElement> sum(x.size()), diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum[i] = x[i] + y[i];
      diff[i] = x[i] - y[i];
    }
    failures += !is_lattice_point(cfg, sum, Which::Fine);
    failures += !is_lattice_point(cfg, diff, Which::Fine);

    const auto u = random_coarse_member(cfg, rng), v = random_coarse_member(cfg, rng);
    std::vector<OkElement> cs(u.size()), cd(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      cs[i] = u[i] + v[i];
      cd[i] = u[i] - v[i];
    }
    failures += !is_lattice_point(cfg, u, Which::Coarse);
    failures += !is_lattice_point(cfg, cs, Which::Coarse);
    failures += !is_lattice_point(cfg, cd, Which::Coarse);
    failures += !is_lattice_point(cfg, u, Which::Fine);  // nesting

    // rho(x) recovers a level-wise codeword.
    std::vector<std::uint8_t> res(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto r = crt_forward(cfg.ctx(), diff[i]);
      res[i] = static_cast<std::uint8_t>(r[0] | r[1] << 1 | r[2] << 2 | r[3] << 3);
    }
    for (int j = 0; j < 4; ++j) failures += !cfg.level(j).fine().is_codeword(level_word(cfg, res, j));
  }
  CHECK(failures == 0);
}

TEST_CASE("closed-form volume matches the Gram determinant for n = 1, 2") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 60; ++t) {
    const auto cfg = random_small_config(rng, 1 + t % 2);
    for (Which w : {Which::Fine, Which::Coarse}) {
      const double closed = lattice_volume(cfg, w);
      CHECK(gram_volume(cfg, w) == doctest::Approx(closed).epsilon(1e-6));
    }
    CHECK(lattice_volume(cfg, Which::Coarse) / lattice_volume(cfg, Which::Fine) ==
          doctest::Approx(std::exp2(static_cast<double>(quotient_size_log2(cfg)))).epsilon(1e-9));
  }
  CHECK(lattice_volume(uncoded_config(), Which::Fine) == doctest::Approx(561.0).epsilon(1e-12));
  CHECK(lattice_volume(uncoded_config(), Which::Coarse) == doctest::Approx(8976.0).epsilon(1e-12));
  CHECK(lattice_volume(uncoded_config(1), Which::Coarse) == doctest::Approx(561.0).epsilon(1e-12));

  std::vector<NestedCodePair> pairs;
  for (int j = 0; j < 4; ++j)
    pairs.push_back(make_nested_pair(
        std::make_shared<const LdpcCode>(1, std::vector<std::vector<std::uint32_t>>{{0}}), 0, 0));
  const NestedPiAConfig z(q17_33(), {pairs[0], pairs[1], pairs[2], pairs[3]}, identity_interleavers(1), 1.0);
  CHECK(lattice_volume(z, Which::Fine) == doctest::Approx(8976.0).epsilon(1e-12));
  CHECK(gram_volume(z, Which::Fine) == doctest::Approx(8976.0).epsilon(1e-9));
}

TEST_CASE("quotient size and design rate") {
  const auto cfg = make_ldpc_config(q17_33(), 800, 0, 2024);
  std::int64_t diff = 0;
  for (int j = 0; j < 4; ++j) {
    CHECK(cfg.level(j).fine().m_chk() == 400);
    diff += static_cast<std::int64_t>(cfg.level(j).k_b() - cfg.level(j).k_e());
  }
  CHECK(quotient_size_log2(cfg) == diff);
  CHECK(design_rate(cfg) == static_cast<double>(diff) / 3200.0);
  if (diff == 1600) CHECK(design_rate(cfg) == 0.5);

  CHECK(quotient_size_log2(uncoded_config(1)) == 0);
  CHECK(design_rate(uncoded_config(1)) == 0.0);
  CHECK(design_rate(uncoded_config(0)) == 1.0);  // 4 bits over 4 real dimensions

  // Doubling every k_b - k_e doubles the rate.
  std::vector<NestedCodePair> one, two;
  auto c2 = std::make_shared<const LdpcCode>(2, std::vector<std::vector<std::uint32_t>>{});
  for (int j = 0; j < 4; ++j) {
    one.push_back(make_nested_pair(c2, 1, 3));
    two.push_back(make_nested_pair(c2, 0, 3));
  }
  const NestedPiAConfig a(q17_33(), {one[0], one[1], one[2], one[3]}, identity_interleavers(2), 1.0);
  const NestedPiAConfig b(q17_33(), {two[0], two[1], two[2], two[3]}, identity_interleavers(2), 1.0);
  CHECK(design_rate(b) == 2.0 * design_rate(a));
}

TEST_CASE("choose_gamma meets the power constraint") {
  const auto unc = uncoded_config();
  // Exhaustive mean over the 16 points, computed directly from the embedding.
  double e = 0.0;
  for (int r = 0; r < 16; ++r)
    for (double v : unc.unit_point(r)) e += v * v;
  e /= 64.0;
  CHECK(exact_mean_energy(unc) == doctest::Approx(e).epsilon(1e-12));
  const double g = choose_gamma(unc, 3.0, 20000, 1);
  CHECK(g == doctest::Approx(std::sqrt(3.0 / e)).epsilon(0.01));
  CHECK(choose_gamma(unc, 12.0, 20000, 1) == doctest::Approx(2.0 * g).epsilon(1e-12));

  const auto cfg = make_ldpc_config(q17_33(), 60, 0, 8);
  const double gc = choose_gamma(cfg, 2.0, 10000, 4);
  CHECK(mean_energy(cfg.with_gamma(1.0), 10000, 99) * gc * gc == doctest::Approx(2.0).epsilon(0.01));
  CHECK_THROWS_AS(choose_gamma(cfg, -1.0), Error);
}

TEST_CASE("config JSON") {
  const auto cfg = make_ldpc_config(q17_33(), 48, 4, 1).with_gamma(2.5);
  const auto j = cfg.to_json();
  CHECK(j["n"] == 48);
  CHECK(j["N"] == 192);
  CHECK(j["gamma"] == 2.5);
  CHECK(j["levels"].size() == 4);
  CHECK(j["levels"][0]["k_e"] == 4);
}
