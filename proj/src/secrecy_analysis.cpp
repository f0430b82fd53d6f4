#include "mqlat/secrecy_analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "mqlat/error.hpp"

namespace mqlat {

LatticeBasis::LatticeBasis(Eigen::MatrixXd generator) : g_(std::move(generator)) {
  if (g_.rows() != g_.cols() || g_.cols() == 0)
    throw Error(ErrorCode::SingularBasis, "generator must be a nonempty square matrix");
  if (!g_.allFinite()) throw Error(ErrorCode::SingularBasis, "generator has non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g_);
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-12 * s(0))) throw Error(ErrorCode::SingularBasis, "generator is singular");
  volume_ = std::abs(g_.determinant());
  gs_ = g_;
  for (Eigen::Index i = 0; i < g_.cols(); ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      gs_.col(i) -= (g_.col(i).dot(gs_.col(j)) / gs_.col(j).squaredNorm()) * gs_.col(j);
}

LatticeBasis LatticeBasis::integer_lattice(int dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  return LatticeBasis(Eigen::MatrixXd::Identity(dim, dim));
}

LatticeBasis LatticeBasis::from_field(const BiquadraticField& f) {
  Eigen::MatrixXd g(4, 4);
  const auto& E = f.embedding_matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) g(r, c) = E[r][c];
  return LatticeBasis(g);
}

LatticeBasis LatticeBasis::dual() const { return LatticeBasis(g_.inverse().transpose()); }

std::optional<Eigen::VectorXd> LatticeBasis::coordinates(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != g_.rows()) throw Error(ErrorCode::LengthMismatch, "vector dimension differs from lattice");
  Eigen::VectorXd u = g_.partialPivLu().solve(x);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double r = std::round(u(i));
    if (std::abs(u(i) - r) > tol) return std::nullopt;
    u(i) = r;
  }
  return u;
}

namespace {

// Depth-first Fincke-Pohst over the upper-triangular factor of the generator.
template <typename Visit>
std::size_t enumerate_impl(const Eigen::MatrixXd& g, double radius, Visit&& visit) {
  const int d = static_cast<int>(g.cols());
  const Eigen::MatrixXd R = Eigen::HouseholderQR<Eigen::MatrixXd>(g).matrixQR().triangularView<Eigen::Upper>();
  const double r2 = radius * radius;
  std::vector<std::int64_t> u(d, 0), hi(d, 0);
  std::vector<double> partial(d + 1, 0.0);  // partial[i]: squared length of rows >= i
  std::size_t count = 0;

  auto bounds = [&](int i, std::int64_t& lo_out, std::int64_t& hi_out) {
    double y = 0.0;
    for (int j = i + 1; j < d; ++j) y += R(i, j) * static_cast<double>(u[j]);
    const double rem = r2 - partial[i + 1];
    if (rem < 0) return false;
    const double rii = std::abs(R(i, i));
    const double center = -y / R(i, i), half = std::sqrt(rem) / rii;
    lo_out = static_cast<std::int64_t>(std::ceil(center - half));
    hi_out = static_cast<std::int64_t>(std::floor(center + half));
    return lo_out <= hi_out;
  };
  auto level_norm = [&](int i) {
    double y = 0.0;
    for (int j = i; j < d; ++j) y += R(i, j) * static_cast<double>(u[j]);
    return partial[i + 1] + y * y;
  };

  int i = d - 1;
  std::int64_t lo;
  if (!bounds(i, lo, hi[i])) return 0;
  u[i] = lo - 1;
  while (i < d) {
    if (u[i] >= hi[i]) {
      ++i;
      continue;
    }
    ++u[i];
    const double nrm = level_norm(i);
    if (nrm > r2) continue;
    partial[i] = nrm;
    if (i == 0) {
      ++count;
      visit(nrm, u);
      continue;
    }
    --i;
    if (!bounds(i, lo, hi[i])) {
      ++i;
      continue;
    }
    u[i] = lo - 1;
  }
  return count;
}

void check_dim(const LatticeBasis& b) {
  if (b.dim() > kMaxThetaDim) throw Error(ErrorCode::DimensionTooLarge, "theta summation supports D <= 32");
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
}

}  // namespace

std::size_t enumerate_ball(const LatticeBasis& basis, double radius, const std::function<void(double)>& visit) {
  check_dim(basis);
  return enumerate_impl(basis.generator(), radius, [&](double n2, const std::vector<std::int64_t>&) { visit(n2); });
}

FlatnessEstimate flatness_theta(const LatticeBasis& basis, double sigma, double radius_factor) {
  check_dim(basis);
  check_sigma(sigma);
  if (!(radius_factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius_factor must be positive");
  const int d = basis.dim();
  const double inv = 1.0 / (2.0 * sigma * sigma);
  long double sum = 0.0L;
  FlatnessEstimate est;
  est.terms = enumerate_impl(basis.generator(), radius_factor * sigma,
                             [&](double n2, const std::vector<std::int64_t>&) { sum += std::exp(-n2 * inv); });
  const double log_scale = std::log(basis.volume()) - 0.5 * d * std::log(2.0 * std::numbers::pi * sigma * sigma);
  const long double normalized = std::exp(static_cast<long double>(log_scale)) * sum;
  // The Poisson dual sum shows eps >= 0; clamp rounding noise.
  est.epsilon = std::max(0.0, static_cast<double>(normalized - 1.0L));
  // exp(-|v|^2/2s^2) <= exp(-t R^2/2s^2) exp(-(1-t)|v|^2/2s^2) outside the ball, with 1 - t = D / rf^2.
  const double one_minus_t = d / (radius_factor * radius_factor);
  if (one_minus_t < 1.0) {
    const double b = std::exp(-(1.0 - one_minus_t) * radius_factor * radius_factor / 2.0 - 0.5 * d * std::log(one_minus_t));
    est.tail_bound = b < 1.0 ? b * static_cast<double>(normalized) / (1.0 - b) : std::numeric_limits<double>::infinity();
  } else {
    est.tail_bound = std::numeric_limits<double>::infinity();
  }
  return est;
}

double flatness_mc(const LatticeBasis& basis, double sigma, std::size_t samples, std::uint64_t seed) {
  check_dim(basis);
  check_sigma(sigma);
  if (samples < 10000) throw Error(ErrorCode::InvalidArgument, "flatness_mc needs at least 1e4 samples");
  const int d = basis.dim();
  // Poisson summation: vol f(Gu) = sum over dual coordinates w of exp(-2 pi^2 s^2 |G^{-T} w|^2) cos(2 pi w.u).
  const double c = 2.0 * std::numbers::pi * std::numbers::pi * sigma * sigma;
  const double cutoff = std::sqrt(std::log(1e14) / c);
  std::vector<double> weights;
  std::vector<std::int64_t> coords;
  double w0 = 0.0;
  enumerate_impl(basis.generator().inverse().transpose(), cutoff, [&](double n2, const std::vector<std::int64_t>& w) {
    int first = 0;
    while (first < d && w[first] == 0) ++first;
    if (first == d) {
      w0 += 1.0;
      return;
    }
    if (w[first] < 0) return;  // paired with -w
    weights.push_back(2.0 * std::exp(-c * n2));
    coords.insert(coords.end(), w.begin(), w.end());
  });

  auto deviation = [&](const std::vector<double>& u) {
    double s = w0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      double dot = 0.0;
      for (int i = 0; i < d; ++i) dot += static_cast<double>(coords[k * d + i]) * u[i];
      s += weights[k] * std::cos(2.0 * std::numbers::pi * dot);
    }
    return std::abs(s - 1.0);
  };

  double worst = 0.0;
  const auto per_axis = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(std::pow(4096.0, 1.0 / d))));
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> u(d);
  for (;;) {
    for (int i = 0; i < d; ++i) u[i] = static_cast<double>(idx[i]) / static_cast<double>(per_axis);
    worst = std::max(worst, deviation(u));
    int i = 0;
    while (i < d && ++idx[i] == per_axis) idx[i++] = 0;
    if (i == d) break;
  }
  Rng rng = make_stream(seed, "flatness_mc");
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& x : u) x = uniform_unit(rng);
    worst = std::max(worst, deviation(u));
  }
  return worst;
}

FlatnessEstimate flatness_correlated(const LatticeBasis& basis, const Eigen::MatrixXd& cov, double radius_factor) {
  if (cov.rows() != basis.dim() || cov.cols() != basis.dim())
    throw Error(ErrorCode::LengthMismatch, "covariance dimension differs from lattice");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "covariance is not positive definite");
  const Eigen::MatrixXd whitened = llt.matrixL().solve(basis.generator());
  return flatness_theta(LatticeBasis(whitened), 1.0, radius_factor);
}

void SecrecyParams::validate() const {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  if (!(sigma_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma_s must be positive");
  if (n_a < 1) throw Error(ErrorCode::InvalidArgument, "n_a must be positive");
}

double sigma_eq(const SecrecyParams& p) {
  p.validate();
  return p.sigma_s / p.alpha * std::exp(-p.c_e / (2.0 * p.n_a));
}

double eve_capacity(const CMatrix& H_e, double sigma_s, double sigma_e) {
  if (!(sigma_e > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma_e must be positive");
  if (!H_e.allFinite()) throw Error(ErrorCode::InvalidArgument, "channel has non-finite entries");
  // log det(I + s H H^H) = log det(I + s H^H H).
  return compound_log_det(H_e.adjoint(), sigma_s * sigma_s / (sigma_e * sigma_e));
}

double leakage_bound(std::int64_t n, double eps, double rate) {
  if (!(eps >= 0.0 && eps <= 0.25)) throw Error(ErrorCode::EpsOutOfRange, "eps must lie in [0, 1/4]");
  if (eps == 0.0) return 0.0;
  return 8.0 * static_cast<double>(n) * eps * rate - 8.0 * eps * std::log2(8.0 * eps);
}

double secrecy_rate_bound(const SecrecyParams& p) {
  p.validate();
  return std::max(0.0, p.c_b - p.c_e - p.n_a - 2.0 * p.n_a * std::log(p.alpha));
}

nlohmann::json secrecy_report(const SecrecyParams& p) {
  const double nats = secrecy_rate_bound(p);
  return {{"c_b", p.c_b},        {"c_e", p.c_e},
          {"alpha", p.alpha},    {"n_a", p.n_a},
          {"sigma_eq", sigma_eq(p)}, {"rate_bound_nats", nats},
          {"rate_bound_bits", nats / std::numbers::ln2}};
}

std::int64_t sample_integer_gaussian(double c, double s, Rng& rng) {
  check_sigma(s);
  const auto lo = static_cast<std::int64_t>(std::ceil(c - 13.0 * s));
  const auto hi = static_cast<std::int64_t>(std::floor(c + 13.0 * s));
  if (hi < lo) return static_cast<std::int64_t>(std::llround(c));
  const auto width = static_cast<std::uint64_t>(hi - lo) + 1;
  for (;;) {
    const std::int64_t x = lo + static_cast<std::int64_t>(uniform_below(rng, width));
    const double t = static_cast<double>(x) - c;
    if (uniform_unit(rng) < std::exp(-t * t / (2.0 * s * s))) return x;
  }
}

Eigen::VectorXd discrete_gaussian_sample(const LatticeBasis& basis, const Eigen::VectorXd& center, double sigma,
                                         Rng& rng) {
  check_sigma(sigma);
  if (center.size() != basis.dim()) throw Error(ErrorCode::LengthMismatch, "center dimension differs from lattice");
  const auto& B = basis.generator();
  const auto& S = basis.gram_schmidt();
  Eigen::VectorXd t = center;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(basis.dim());
  for (int i = basis.dim() - 1; i >= 0; --i) {
    const double len2 = S.col(i).squaredNorm();
    const double ci = t.dot(S.col(i)) / len2;
    const auto z = static_cast<double>(sample_integer_gaussian(ci, sigma / std::sqrt(len2), rng));
    t -= z * B.col(i);
    v += z * B.col(i);
  }
  return v;
}

Eigen::VectorXd coset_gaussian_sample(const LatticeBasis& basis, const Eigen::VectorXd& shift, double sigma,
                                      Rng& rng) {
  return shift + discrete_gaussian_sample(basis, -shift, sigma, rng);
}

}  // namespace mqlat
