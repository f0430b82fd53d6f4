#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "json.hpp"
#include "mqlat/number_field.hpp"
#include "mqlat/rng.hpp"
#include "mqlat/wiretap_channel.hpp"

namespace mqlat {

// Real D x D generator, one basis vector per column.
class LatticeBasis {
 public:
  explicit LatticeBasis(Eigen::MatrixXd generator);

  static LatticeBasis integer_lattice(int dim);
  // sigma_K(O_K): columns are the embedded integral basis.
  static LatticeBasis from_field(const BiquadraticField& f);

  int dim() const { return static_cast<int>(g_.cols()); }
  const Eigen::MatrixXd& generator() const { return g_; }
  double volume() const { return volume_; }
  LatticeBasis dual() const;
  // Gram-Schmidt vectors of the columns, in column order.
  const Eigen::MatrixXd& gram_schmidt() const { return gs_; }
  // Integer coordinates of x, or nullopt if x is not within tol of a lattice point.
  std::optional<Eigen::VectorXd> coordinates(const Eigen::VectorXd& x, double tol = 1e-9) const;

 private:
  Eigen::MatrixXd g_;
  Eigen::MatrixXd gs_;
  double volume_ = 0.0;
};

// Calls visit(squared norm) for every lattice vector of norm at most `radius`
// (Fincke-Pohst). Returns the number of vectors visited.
std::size_t enumerate_ball(const LatticeBasis& basis, double radius, const std::function<void(double)>& visit);

inline constexpr int kMaxThetaDim = 32;

struct FlatnessEstimate {
  double epsilon = 0.0;
  // Upper bound on the contribution of the vectors outside the truncation ball to epsilon.
  double tail_bound = 0.0;
  std::size_t terms = 0;
};

// eps = vol (2 pi sigma^2)^{-D/2} sum_{|v| <= R} exp(-|v|^2 / 2 sigma^2) - 1 with R = radius_factor * sigma.
FlatnessEstimate flatness_theta(const LatticeBasis& basis, double sigma, double radius_factor = 8.0);

// Maximum of |vol f(x) - 1| over a grid and `samples` random points of the fundamental
// parallelepiped, where f is the sigma-Gaussian folded onto the lattice, evaluated through
// its Fourier series over the dual lattice.
double flatness_mc(const LatticeBasis& basis, double sigma, std::size_t samples, std::uint64_t seed = 0);

// Flatness of the lattice for a non-spherical Gaussian of covariance `cov`.
FlatnessEstimate flatness_correlated(const LatticeBasis& basis, const Eigen::MatrixXd& cov,
                                     double radius_factor = 8.0);

struct SecrecyParams {
  double sigma_s = 1.0;
  double alpha = 1.0;
  int n_a = 2;
  double c_b = 0.0;  // nats
  double c_e = 0.0;  // nats
  double rate = 0.0;  // nats per channel use

  void validate() const;
};

double sigma_eq(const SecrecyParams& p);
// log det(I + sigma_s^2 / sigma_e^2 H H^H), nats.
double eve_capacity(const CMatrix& H_e, double sigma_s, double sigma_e);
// Bits; eps must lie in [0, 1/4].
double leakage_bound(std::int64_t n, double eps, double rate);
// Nats per channel use.
double secrecy_rate_bound(const SecrecyParams& p);
nlohmann::json secrecy_report(const SecrecyParams& p);

// Integer x with probability proportional to exp(-(x - c)^2 / 2 s^2), by rejection on [c - 13 s, c + 13 s].
std::int64_t sample_integer_gaussian(double c, double s, Rng& rng);

// Lattice point v with probability proportional to exp(-|v - center|^2 / 2 sigma^2),
// by randomized nearest plane.
Eigen::VectorXd discrete_gaussian_sample(const LatticeBasis& basis, const Eigen::VectorXd& center, double sigma,
                                         Rng& rng);
// A point of the coset Lambda + shift, distributed as D_{Lambda + shift, sigma}.
Eigen::VectorXd coset_gaussian_sample(const LatticeBasis& basis, const Eigen::VectorXd& shift, double sigma,
                                      Rng& rng);

}  // namespace mqlat
