#include <cmath>
#include <complex>
#include <sstream>

#include "doctest.h"
#include "mqlat/error.hpp"
#include "mqlat/wiretap_channel.hpp"

using namespace mqlat;

namespace {

CrtPtr q17_33() {
  static const CrtPtr ctx = build_crt_context(build_field(17, 33), 2);
  return ctx;
}

}  // namespace

TEST_CASE("Rayleigh entries have unit complex variance") {
  const CMatrix H = rayleigh_matrix(400, 250, 42);  // 1e5 entries
  double re2 = 0, im2 = 0, mean_re = 0;
  for (Eigen::Index r = 0; r < H.rows(); ++r)
    for (Eigen::Index c = 0; c < H.cols(); ++c) {
      re2 += H(r, c).real() * H(r, c).real();
      im2 += H(r, c).imag() * H(r, c).imag();
      mean_re += H(r, c).real();
    }
  const double cnt = static_cast<double>(H.size());
  CHECK(std::abs((re2 + im2) / cnt - 1.0) < 0.02);
  CHECK(std::abs(re2 / cnt - 0.5) < 0.02);
  CHECK(std::abs(im2 / cnt - 0.5) < 0.02);
  CHECK(std::abs(mean_re / cnt) < 0.01);
  CHECK(rayleigh_matrix(2, 2, 7) == rayleigh_matrix(2, 2, 7));
  CHECK(rayleigh_matrix(2, 2, 7) != rayleigh_matrix(2, 2, 8));
  CHECK_THROWS_AS(rayleigh_matrix(0, 2, 1), Error);
}

TEST_CASE("compound-set membership") {
  const CMatrix I = CMatrix::Identity(2, 2);
  const double s = std::exp(1.0) - 1.0;
  CHECK(compound_log_det(I, s) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(in_compound_bob(I, s, 2.0 - 1e-9));
  CHECK_FALSE(in_compound_bob(I, s, 2.0 + 1e-9));
  CHECK(in_compound_eve(I, s, 2.0 + 1e-9));
  const CMatrix Z = CMatrix::Zero(2, 2);
  CHECK(in_compound_bob(Z, 10.0, 0.0));
  CHECK_FALSE(in_compound_bob(Z, 10.0, 1e-9));

  const CMatrix H = rayleigh_matrix(3, 2, 5);
  const CMatrix Q = Eigen::HouseholderQR<CMatrix>(rayleigh_matrix(3, 3, 6)).householderQ();
  for (double c : {0.5, 2.0, 4.0, 6.0})
    CHECK(in_compound_bob(Q * H, 20.0, c) == in_compound_bob(H, 20.0, c));
  CHECK(compound_log_det(Q * H, 20.0) == doctest::Approx(compound_log_det(H, 20.0)).epsilon(1e-12));
}

TEST_CASE("real/complex channel-use mapping") {
  std::vector<double> x(11);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
  const CMatrix X = to_channel_uses(x, 2);
  CHECK(X.rows() == 2);
  CHECK(X.cols() == 3);
  CHECK(X(0, 0) == std::complex<double>(1, 2));
  CHECK(X(1, 0) == std::complex<double>(3, 4));
  CHECK(X(0, 1) == std::complex<double>(5, 6));
  CHECK(X(0, 2) == std::complex<double>(9, 10));
  CHECK(X(1, 2) == std::complex<double>(11, 0));
  CHECK(from_channel_uses(X, x.size()) == x);
}

TEST_CASE("zero-forcing: noiseless inversion, covariance, rank checks") {
  const CMatrix H = rayleigh_matrix(2, 2, 11);
  std::vector<double> x(3200);
  Rng rng = make_stream(1, "x");
  for (auto& v : x) v = static_cast<double>(rng() % 9) - 4.0;
  const CMatrix X = to_channel_uses(x, 2);
  const auto zf = zf_equalize(H, H * X, 1.0);
  const auto back = from_channel_uses(zf.X_hat, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) < 1e-9);

  // Empirical covariance of H^+ Z against sigma2 (H^H H)^{-1}.
  const double sigma2 = 2.0;
  const std::size_t samples = 100000;
  CMatrix Z(2, static_cast<Eigen::Index>(samples));
  GaussianSource g;
  Rng nr = make_stream(2, "z");
  for (Eigen::Index c = 0; c < Z.cols(); ++c)
    for (int r = 0; r < 2; ++r) {
      const double a = g(nr), b = g(nr);
      Z(r, c) = {a, b};  // variance 2 per complex entry
    }
  const auto nz = zf_equalize(H, Z, sigma2);
  const CMatrix emp = nz.X_hat * nz.X_hat.adjoint() / static_cast<double>(samples);
  const double scale = nz.noise_cov.norm();
  CHECK((emp - nz.noise_cov).norm() / scale < 0.05);

  CMatrix R(2, 2);
  R << 1.0, 2.0, 2.0, 4.0;
  CHECK_THROWS_AS(zf_equalize(R, R, 1.0), Error);
  try {
    zf_equalize(R, R, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficientChannel);
  }
  ChannelConfig bad = default_channel(1, ChannelMode::TrueZF);
  bad.H_e = R;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.mode = ChannelMode::IdealizedWhitened;
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("idealized whitened noise variances") {
  const auto chan = default_channel(3);
  std::vector<double> x(1000000, 0.0);
  for (Receiver who : {Receiver::Bob, Receiver::Eve}) {
    Rng rng = make_stream(9, "t", static_cast<std::uint64_t>(who));
    const auto eq = transmit(chan, who, x, rng);
    double s2 = 0;
    for (double v : eq.y) s2 += v * v;
    const double expect = who == Receiver::Bob ? 1.0 : 6.0;
    CHECK(std::abs(s2 / x.size() / expect - 1.0) < 0.02);
    CHECK(eq.variance[17] == expect);
  }
}

TEST_CASE("TrueZF transmit reports the equalized per-coordinate variance") {
  const auto chan = default_channel(3, ChannelMode::TrueZF);
  std::vector<double> x(400000, 0.0);
  Rng rng = make_stream(5, "t");
  const auto eq = transmit(chan, Receiver::Bob, x, rng);
  for (int parity = 0; parity < 2; ++parity)
    for (int ant = 0; ant < 2; ++ant) {
      double s2 = 0, cnt = 0;
      for (std::size_t i = 0; i < x.size(); ++i)
        if ((i / 2) % 2 == static_cast<std::size_t>(ant) && i % 2 == static_cast<std::size_t>(parity)) {
          s2 += eq.y[i] * eq.y[i];
          ++cnt;
        }
      const std::size_t idx = 2 * ant + parity;
      CHECK(std::abs(s2 / cnt / eq.variance[idx] - 1.0) < 0.05);
    }
}

TEST_CASE("channel JSON round trip and penalty") {
  const auto c = default_channel(17, ChannelMode::TrueZF);
  const auto back = ChannelConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  CHECK(back.H_b == c.H_b);
  CHECK(back.H_e == c.H_e);
  CHECK(back.mode == ChannelMode::TrueZF);
  CHECK(back.eve_noise_ratio == 6.0);
  CHECK_THROWS_AS(ChannelConfig::from_json(nlohmann::json{{"H_b", 3}}), Error);
  CHECK_THROWS_AS(parse_channel_mode("mmse"), Error);

  CHECK(eve_penalty_db(6.0) == doctest::Approx(7.7815).epsilon(1e-4));
  CHECK(eve_penalty_db(1.0) == 0.0);
  CHECK(eve_penalty_db(100.0) == doctest::Approx(20.0).epsilon(1e-15));
}

TEST_CASE("BER sweep: limits, stopping rule, determinism, CSV") {
  const auto cfg = make_ldpc_config(q17_33(), 96, 0, 3);
  const auto chan = default_channel(1);
  SweepOptions opts;
  opts.snr_db = {-60.0, 80.0};
  opts.max_frames = 40;
  opts.target_bob_errors = 1000000;
  opts.energy_samples = 2000;
  opts.bp.max_iters = 10;
  const auto r = run_ber_sweep(chan, cfg, opts);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].frames == 40);
  CHECK(r.rows[0].bits == 40 * cfg.message_bits());
  CHECK(std::abs(r.rows[0].ber_bob() - 0.5) < 0.05);
  CHECK(r.rows[1].bob_errs == 0);
  CHECK(r.rows[1].conv_frac() == 1.0);
  CHECK(r.rows[1].eve_errs == 0);

  opts.target_bob_errors = 100;
  opts.snr_db = {-60.0};
  const auto stop = run_ber_sweep(chan, cfg, opts);
  CHECK(stop.rows[0].bob_errs >= 100);
  CHECK(stop.rows[0].bob_errs - 100 < cfg.message_bits());
  CHECK(stop.rows[0].frames < 40);

  opts.snr_db = {0.0, 6.0};
  opts.target_bob_errors = 300;
  const auto a = run_ber_sweep(chan, cfg, opts);
  opts.threads = 3;
  const auto b = run_ber_sweep(chan, cfg, opts);
  CHECK(a == b);
  opts.seed = 2;
  CHECK_FALSE(run_ber_sweep(chan, cfg, opts) == a);

  std::ostringstream csv;
  write_ber_csv(a, csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == kBerCsvHeader);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 11);
  }
  CHECK(rows == 2);

  BerRow row;
  row.snr_db = 3.0;
  row.frames = 3;
  row.bits = 4800;
  row.bob_errs = 7;
  row.converged_frames = 2;
  CHECK(format_ber_row(row) == "3,3,4800,7,0,0.00145833,0,0,0,0,0,0.666667");

  CHECK(snr_grid(0, 24, 3).size() == 9);
  CHECK(snr_grid(0, 24, 3).back() == 24.0);
  CHECK_THROWS_AS(snr_grid(0, 24, 0), Error);
  opts.snr_db.clear();
  CHECK_THROWS_AS(run_ber_sweep(chan, cfg, opts), Error);
}

TEST_CASE("TrueZF sweep runs and is reproducible") {
  const auto cfg = make_ldpc_config(q17_33(), 96, 0, 3);
  const auto chan = default_channel(1, ChannelMode::TrueZF);
  SweepOptions opts;
  opts.snr_db = {30.0};
  opts.max_frames = 5;
  opts.energy_samples = 1000;
  const auto a = run_ber_sweep(chan, cfg, opts);
  CHECK(a == run_ber_sweep(chan, cfg, opts));
  CHECK(a.rows[0].frames == 5);
}
