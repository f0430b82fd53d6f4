#include "mqlat/wiretap_channel.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "mqlat/error.hpp"
#include "mqlat/multistage_decoder.hpp"

namespace mqlat {

std::string to_string(ChannelMode m) { return m == ChannelMode::IdealizedWhitened ? "idealized" : "true_zf"; }

ChannelMode parse_channel_mode(const std::string& s) {
  if (s == "idealized" || s == "IdealizedWhitened") return ChannelMode::IdealizedWhitened;
  if (s == "true_zf" || s == "TrueZF") return ChannelMode::TrueZF;
  throw Error(ErrorCode::InvalidArgument, "unknown channel mode '" + s + "' (expected idealized or true_zf)");
}

CMatrix rayleigh_matrix(int rows, int cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidArgument, "matrix dimensions must be positive");
  Rng rng = make_stream(seed, "rayleigh", static_cast<std::uint64_t>(rows), static_cast<std::uint64_t>(cols));
  GaussianSource g;
  const double s = std::sqrt(0.5);
  CMatrix H(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double re = g(rng), im = g(rng);
      H(r, c) = {s * re, s * im};
    }
  return H;
}

double compound_log_det(const CMatrix& H, double snr) {
  const CMatrix A = CMatrix::Identity(H.cols(), H.cols()) + snr * (H.adjoint() * H);
  // A is Hermitian positive definite for snr >= 0.
  Eigen::LLT<CMatrix> llt(A);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "I + snr H^H H is not positive definite");
  double ld = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) ld += 2.0 * std::log(llt.matrixL()(i, i).real());
  return ld;
}

bool in_compound_bob(const CMatrix& H, double snr_b, double c_b) { return compound_log_det(H, snr_b) >= c_b; }
bool in_compound_eve(const CMatrix& H, double snr_e, double c_e) { return compound_log_det(H, snr_e) <= c_e; }

void ChannelConfig::validate() const {
  if (n_a < 1 || n_b < 1 || n_e < 1) throw Error(ErrorCode::InvalidArgument, "antenna counts must be positive");
  if (!(sigma_b2 > 0.0) || !(eve_noise_ratio > 0.0))
    throw Error(ErrorCode::InvalidArgument, "noise variances must be positive");
  if (H_b.rows() != n_b || H_b.cols() != n_a || H_e.rows() != n_e || H_e.cols() != n_a)
    throw Error(ErrorCode::LengthMismatch, "channel matrix shape does not match antenna counts");
  if (mode == ChannelMode::TrueZF) {
    for (const CMatrix* H : {&H_b, &H_e}) {
      Eigen::ColPivHouseholderQR<CMatrix> qr(*H);
      if (qr.rank() < n_a) throw Error(ErrorCode::RankDeficientChannel, "channel matrix lacks full column rank");
    }
  }
}

namespace {

nlohmann::json matrix_json(const CMatrix& H) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < H.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < H.cols(); ++c) row.push_back({H(r, c).real(), H(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

CMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw Error(ErrorCode::ParseError, "channel matrix must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size()), cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix H(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (j[r].size() != static_cast<std::size_t>(cols)) throw Error(ErrorCode::ParseError, "ragged channel matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& e = j[r][c];
      if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::ParseError, "matrix entries must be [re, im]");
      H(r, c) = {e[0].get<double>(), e[1].get<double>()};
    }
  }
  return H;
}

}  // namespace

nlohmann::json ChannelConfig::to_json() const {
  return {{"n_a", n_a},         {"n_b", n_b},
          {"n_e", n_e},         {"sigma_b2", sigma_b2},
          {"eve_noise_ratio", eve_noise_ratio},
          {"mode", to_string(mode)},
          {"H_b", matrix_json(H_b)}, {"H_e", matrix_json(H_e)}};
}

ChannelConfig ChannelConfig::from_json(const nlohmann::json& j) {
  ChannelConfig c;
  try {
    c.H_b = matrix_from_json(j.at("H_b"));
    c.H_e = matrix_from_json(j.at("H_e"));
    c.n_a = j.value("n_a", static_cast<int>(c.H_b.cols()));
    c.n_b = j.value("n_b", static_cast<int>(c.H_b.rows()));
    c.n_e = j.value("n_e", static_cast<int>(c.H_e.rows()));
    c.sigma_b2 = j.value("sigma_b2", 2.0);
    c.eve_noise_ratio = j.value("eve_noise_ratio", 6.0);
    c.mode = parse_channel_mode(j.value("mode", std::string("idealized")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("channel JSON: ") + e.what());
  }
  c.validate();
  return c;
}

ChannelConfig default_channel(std::uint64_t seed, ChannelMode mode) {
  ChannelConfig c;
  Rng rng = make_stream(seed, "channel");
  c.H_b = rayleigh_matrix(2, 2, rng());
  c.H_e = rayleigh_matrix(2, 2, rng());
  c.mode = mode;
  c.validate();
  return c;
}

CMatrix to_channel_uses(std::span<const double> x, int n_a) {
  if (n_a < 1) throw Error(ErrorCode::InvalidArgument, "n_a must be positive");
  const std::size_t per_use = 2 * static_cast<std::size_t>(n_a);
  const std::size_t T = (x.size() + per_use - 1) / per_use;
  CMatrix X = CMatrix::Zero(n_a, static_cast<Eigen::Index>(T));
  for (std::size_t s = 0; 2 * s < x.size(); ++s) {
    const double re = x[2 * s], im = 2 * s + 1 < x.size() ? x[2 * s + 1] : 0.0;
    X(static_cast<Eigen::Index>(s % n_a), static_cast<Eigen::Index>(s / n_a)) = {re, im};
  }
  return X;
}

std::vector<double> from_channel_uses(const CMatrix& X, std::size_t N) {
  const auto n_a = static_cast<std::size_t>(X.rows());
  if (N > 2 * n_a * static_cast<std::size_t>(X.cols())) throw Error(ErrorCode::LengthMismatch, "too few channel uses");
  std::vector<double> x(N);
  for (std::size_t s = 0; 2 * s < N; ++s) {
    const auto v = X(static_cast<Eigen::Index>(s % n_a), static_cast<Eigen::Index>(s / n_a));
    x[2 * s] = v.real();
    if (2 * s + 1 < N) x[2 * s + 1] = v.imag();
  }
  return x;
}

ZfOutput zf_equalize(const CMatrix& H, const CMatrix& Y, double sigma2) {
  if (Y.rows() != H.rows()) throw Error(ErrorCode::LengthMismatch, "received block has wrong row count");
  Eigen::ColPivHouseholderQR<CMatrix> qr(H);
  if (qr.rank() < H.cols()) throw Error(ErrorCode::RankDeficientChannel, "channel matrix lacks full column rank");
  const CMatrix gram = H.adjoint() * H;
  const CMatrix gram_inv = gram.inverse();
  return {gram_inv * H.adjoint() * Y, sigma2 * gram_inv};
}

Equalized transmit(const ChannelConfig& chan, Receiver who, std::span<const double> x, Rng& rng) {
  GaussianSource g;
  const double sigma2 = chan.noise_var(who);
  Equalized out;
  if (chan.mode == ChannelMode::IdealizedWhitened) {
    const double sd = std::sqrt(sigma2 / 2.0);
    out.y.assign(x.begin(), x.end());
    for (auto& v : out.y) v += sd * g(rng);
    out.variance.assign(x.size(), sigma2 / 2.0);
    return out;
  }
  const CMatrix& H = chan.matrix(who);
  const CMatrix X = to_channel_uses(x, chan.n_a);
  CMatrix Z(H.rows(), X.cols());
  const double sd = std::sqrt(sigma2 / 2.0);
  for (Eigen::Index c = 0; c < Z.cols(); ++c)
    for (Eigen::Index r = 0; r < Z.rows(); ++r) {
      const double re = g(rng), im = g(rng);
      Z(r, c) = {sd * re, sd * im};
    }
  const ZfOutput zf = zf_equalize(H, H * X + Z, sigma2);
  out.y = from_channel_uses(zf.X_hat, x.size());
  out.variance.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto ant = static_cast<Eigen::Index>((i / 2) % static_cast<std::size_t>(chan.n_a));
    out.variance[i] = zf.noise_cov(ant, ant).real() / 2.0;
  }
  out.noise_cov = zf.noise_cov;
  return out;
}

double eve_penalty_db(double noise_ratio) {
  if (!(noise_ratio > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise ratio must be positive");
  return 10.0 * std::log10(noise_ratio);
}

std::vector<double> snr_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw Error(ErrorCode::InvalidArgument, "SNR grid needs step > 0 and max >= min");
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

namespace {

struct FrameOutcome {
  std::size_t bob_errs = 0;
  std::size_t eve_errs = 0;
  std::array<std::size_t, 4> level_errs{};
  bool converged = true;
};

FrameOutcome run_frame(const ChannelConfig& chan, const NestedPiAConfig& cfg, const SweepOptions& opts,
                       std::uint64_t point, std::uint64_t frame) {
  Rng msg_rng = make_stream(opts.seed, "messages", point, frame);
  LevelMessages msgs;
  for (int j = 0; j < 4; ++j) {
    msgs[j].resize(cfg.level(j).k_b());
    for (auto& b : msgs[j]) b = msg_rng() & 1;
  }
  const auto x = embed_residues(cfg, encode_residues(cfg, msgs));
  FrameOutcome out;
  const MultistageOptions mopts{opts.bp, std::nullopt};
  for (Receiver who : {Receiver::Bob, Receiver::Eve}) {
    Rng noise = make_stream(opts.seed, who == Receiver::Bob ? "noise_bob" : "noise_eve", point, frame);
    const Equalized eq = transmit(chan, who, x, noise);
    const auto res = smd_decode(likelihood_table(eq.y, cfg, 1.0, eq.variance), cfg, mopts);
    for (int j = 0; j < 4; ++j) {
      std::size_t e = 0;
      for (std::size_t i = 0; i < msgs[j].size(); ++i) e += msgs[j][i] != res.messages[j][i];
      if (who == Receiver::Bob) {
        out.bob_errs += e;
        out.level_errs[j] = e;
        out.converged = out.converged && res.converged[j];
      } else {
        out.eve_errs += e;
      }
    }
  }
  return out;
}

}  // namespace

BerSweepResult run_ber_sweep(const ChannelConfig& chan, const NestedPiAConfig& cfg, const SweepOptions& opts) {
  chan.validate();
  if (opts.snr_db.empty()) throw Error(ErrorCode::InvalidArgument, "SNR grid is empty");
  if (opts.max_frames < 1) throw Error(ErrorCode::InvalidArgument, "max_frames must be at least 1");
  const unsigned threads = std::max(1u, opts.threads);
  const double e1 = mean_energy(cfg.with_gamma(1.0), opts.energy_samples, opts.seed);
  const std::size_t msg_bits = cfg.message_bits();

  BerSweepResult result;
  for (std::size_t p = 0; p < opts.snr_db.size(); ++p) {
    const double snr = std::pow(10.0, opts.snr_db[p] / 10.0);
    // SNR_b = P / sigma_b2 with P = 2 E per complex channel use, E the energy per real dimension.
    const auto point_cfg = cfg.with_gamma(std::sqrt(snr * chan.sigma_b2 / 2.0 / e1));
    BerRow row;
    row.snr_db = opts.snr_db[p];
    const std::size_t batch = threads == 1 ? 1 : 4 * static_cast<std::size_t>(threads);
    std::vector<FrameOutcome> outcomes;
    std::size_t next = 0;
    bool done = false;
    while (!done && next < opts.max_frames) {
      const std::size_t count = std::min(batch, opts.max_frames - next);
      outcomes.assign(count, {});
      if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) outcomes[i] = run_frame(chan, point_cfg, opts, p, next + i);
      } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(threads, count); ++t)
          pool.emplace_back([&] {
            for (std::size_t i; (i = cursor.fetch_add(1)) < count;)
              outcomes[i] = run_frame(chan, point_cfg, opts, p, next + i);
          });
        for (auto& th : pool) th.join();
      }
      for (const auto& o : outcomes) {
        ++row.frames;
        row.bits += msg_bits;
        row.bob_errs += o.bob_errs;
        row.eve_errs += o.eve_errs;
        for (int j = 0; j < 4; ++j) {
          row.level_errs[j] += o.level_errs[j];
          row.level_bits[j] += cfg.level(j).k_b();
        }
        row.converged_frames += o.converged;
        if (row.bob_errs >= opts.target_bob_errors) {
          done = true;
          break;
        }
      }
      next += count;
    }
    if (opts.on_row) opts.on_row(row);
    result.rows.push_back(row);
  }
  return result;
}

std::string format_ber_row(const BerRow& row) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.6g,%zu,%zu,%zu,%zu,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g", row.snr_db, row.frames,
                row.bits, row.bob_errs, row.eve_errs, row.ber_bob(), row.ber_eve(), row.ber_level(0),
                row.ber_level(1), row.ber_level(2), row.ber_level(3), row.conv_frac());
  return buf;
}

void write_ber_csv(const BerSweepResult& r, std::ostream& out) {
  out << kBerCsvHeader << '\n';
  for (const auto& row : r.rows) out << format_ber_row(row) << '\n';
}

}  // namespace mqlat
