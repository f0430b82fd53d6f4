#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mqlat/binary_codes.hpp"
#include "mqlat/pi_a_lattice.hpp"
#include "mqlat/rng.hpp"

namespace mqlat {

using CMatrix = Eigen::MatrixXcd;

enum class ChannelMode { IdealizedWhitened, TrueZF };
enum class Receiver { Bob, Eve };

std::string to_string(ChannelMode m);
ChannelMode parse_channel_mode(const std::string& s);

// i.i.d. CN(0, 1) entries.
CMatrix rayleigh_matrix(int rows, int cols, std::uint64_t seed);

// log det(I + snr H^H H), natural log.
double compound_log_det(const CMatrix& H, double snr);
bool in_compound_bob(const CMatrix& H, double snr_b, double c_b);
bool in_compound_eve(const CMatrix& H, double snr_e, double c_e);

// Noise levels are per-complex-dimension variances: sigma_b2 = P / SNR_b. The real
// lattice coordinates therefore see sigma_b2 / 2 each; the sweep fixes sigma_b2 = 2 so
// that Bob's equalized noise is N(0, I_N).
struct ChannelConfig {
  int n_a = 2;
  int n_b = 2;
  int n_e = 2;
  CMatrix H_b;
  CMatrix H_e;
  double sigma_b2 = 2.0;
  // sigma_e2 / sigma_b2.
  double eve_noise_ratio = 6.0;
  ChannelMode mode = ChannelMode::IdealizedWhitened;

  double sigma_e2() const { return sigma_b2 * eve_noise_ratio; }
  const CMatrix& matrix(Receiver who) const { return who == Receiver::Bob ? H_b : H_e; }
  double noise_var(Receiver who) const { return who == Receiver::Bob ? sigma_b2 : sigma_e2(); }
  void validate() const;

  nlohmann::json to_json() const;
  static ChannelConfig from_json(const nlohmann::json& j);
};

// Seeded 2x2 pair drawn from the "channel" sub-stream of `seed`.
ChannelConfig default_channel(std::uint64_t seed, ChannelMode mode = ChannelMode::IdealizedWhitened);

// Real N-vector to n_a x T channel uses: complex symbol s = t * n_a + antenna carries
// (x[2s], x[2s+1]); T = ceil(N / (2 n_a)), missing coordinates are zero.
CMatrix to_channel_uses(std::span<const double> x, int n_a);
std::vector<double> from_channel_uses(const CMatrix& X, std::size_t N);

struct ZfOutput {
  CMatrix X_hat;
  // sigma2 (H^H H)^{-1}: covariance of each equalized column.
  CMatrix noise_cov;
};

// Pseudo-inverse equalization; RankDeficientChannel if H lacks full column rank.
ZfOutput zf_equalize(const CMatrix& H, const CMatrix& Y, double sigma2);

struct Equalized {
  std::vector<double> y;
  // Noise variance of each real coordinate.
  std::vector<double> variance;
  CMatrix noise_cov;  // only filled in TrueZF mode
};

// Passes a transmitted real vector to one receiver and returns its equalized observation.
Equalized transmit(const ChannelConfig& chan, Receiver who, std::span<const double> x, Rng& rng);

double eve_penalty_db(double noise_ratio);

struct BerRow {
  double snr_db = 0.0;
  std::size_t frames = 0;
  std::size_t bits = 0;
  std::size_t bob_errs = 0;
  std::size_t eve_errs = 0;
  std::array<std::size_t, 4> level_errs{};
  std::array<std::size_t, 4> level_bits{};
  std::size_t converged_frames = 0;

  double ber_bob() const { return bits ? static_cast<double>(bob_errs) / bits : 0.0; }
  double ber_eve() const { return bits ? static_cast<double>(eve_errs) / bits : 0.0; }
  double ber_level(int j) const { return level_bits[j] ? static_cast<double>(level_errs[j]) / level_bits[j] : 0.0; }
  double conv_frac() const { return frames ? static_cast<double>(converged_frames) / frames : 0.0; }
  bool operator==(const BerRow&) const = default;
};

struct BerSweepResult {
  std::vector<BerRow> rows;
  bool operator==(const BerSweepResult&) const = default;
};

struct SweepOptions {
  std::vector<double> snr_db;
  std::size_t target_bob_errors = 800;
  std::size_t max_frames = 20000;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  BpOptions bp;
  // Monte Carlo messages used once to fix the codebook's mean energy.
  std::size_t energy_samples = 10000;
  // Called after each finished SNR point.
  std::function<void(const BerRow&)> on_row;
};

// Frames are generated from counter-based streams keyed by (seed, point, frame) and
// consumed in frame order, so the result does not depend on the thread count.
BerSweepResult run_ber_sweep(const ChannelConfig& chan, const NestedPiAConfig& cfg, const SweepOptions& opts);

std::vector<double> snr_grid(double lo, double hi, double step);

inline constexpr const char* kBerCsvHeader =
    "snr_db,frames,bits,bob_errs,eve_errs,ber_bob,ber_eve,ber_l1,ber_l2,ber_l3,ber_l4,conv_frac";
void write_ber_csv(const BerSweepResult& r, std::ostream& out);
std::string format_ber_row(const BerRow& row);

}  // namespace mqlat
