// The auxiliary transformation u = a(v) v, its inverse v = b(u) u, and
// the cut-off transformed Burgers nonlinearities I1, I2.
//
// a solves the nonlocal relation a(x) = exp(-1/2 int_0^x P_K(a v)) and b is
// explicit: b(x) = exp(1/2 int_0^x P_K u). Substituting u = a v into
// u_t - u_xx = u u_x + g leaves v_t - v_xx = I1(v) + I2(v) with
//   I1 = (I - P_K)(a v) v_x                                 (loses a derivative)
//   I2 = (a_xx/a - a_t/a + v a_x) v + g/a                   (keeps H1_0)
// because the P_K part of the convection is absorbed by a.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "inertia/dual.hpp"
#include "inertia/nonlinearity.hpp"
#include "inertia/random_fields.hpp"
#include "inertia/spectral.hpp"

namespace inertia {

struct CutoffConfig {
  double r = 1.0;      // inner radius: phi = 1 for |v|_H1 <= r
  double R_big = 2.0;  // outer radius: phi = 0 for |v|_H1 >= R_big

  void validate() const;
};

namespace detail {

template <class T>
T smooth_step_q(const T& s) {
  using std::exp;
  // exp(-1/s) underflows to zero below s = 1/700; returning early also keeps
  // dual parts free of inf * 0.
  if (real_part(s) <= 1.0 / 700.0) return T(0.0);
  return exp(-1.0 / s);
}

}  // namespace detail

// psi(s) = q(1-s) / (q(1-s) + q(s)), q(s) = exp(-1/s) for s > 0 else 0.
template <class T>
T smooth_step(const T& s) {
  const double s0 = real_part(s);
  if (s0 <= 0.0) return T(1.0);
  if (s0 >= 1.0) return T(0.0);
  const T a = detail::smooth_step_q(1.0 - s);
  const T b = detail::smooth_step_q(s);
  return a / (a + b);
}

// phi(z) = psi((z - r^2) / (R^2 - r^2)) applied to z = |v|^2_H1.
template <class T>
T cutoff_weight(const T& z, const CutoffConfig& cut) {
  const double r2 = cut.r * cut.r;
  const double R2 = cut.R_big * cut.R_big;
  return smooth_step((z - r2) / (R2 - r2));
}

struct DiffeoState {
  int K = 0;
  // Profiles on the interior grid of the base field's default grid.
  PhysField a_profile;
  PhysField b_profile;
  SpectralField base_field;
  // Coefficients c_1..c_K of P_K u with u = a v (u itself for b_of_u); both
  // profiles are exp(-+1/2 sum c_k S_k(x)) with S_k the mode antiderivatives.
  Eigen::VectorXd exponent_coeffs;
  int iterations = 0;
  // Sup-norm residual of the defining relation on the grid.
  double residual = 0.0;

  // Pointwise evaluation anywhere in [0, pi].
  double a(double x) const;
  double b(double x) const;
};

enum class ASolver {
  // Newton on the K coefficients c = P_K(a v) of G(c) = c - P_K(exp(-1/2 S c) v).
  newton,
  // Plain fixed-point iteration a <- exp(-1/2 int_0^x P_K(a v)); contracts
  // only while roughly 1/2 sqrt(pi) |v|_L2 |a|_inf < 1.
  picard,
};

struct PicardOptions {
  double tol = 1e-12;
  int max_iter = 200;
  ASolver method = ASolver::newton;
};

// Solves a = exp(-1/2 int_0^x P_K(a v)) starting from a = 1. Converged when
// the sup-norm change of a drops below tol (times |a|_inf when that exceeds 1).
// Throws NumericalError otherwise.
DiffeoState solve_a(const SpectralField& v, int K, const PicardOptions& options = {});
DiffeoState b_of_u(const SpectralField& u, int K);

// U(v) = a(v) v and its inverse V(u) = u / a = b(u) u (a = 1/b on the pair),
// products formed on the padded grid.
SpectralField forward_map(const SpectralField& v, int K, const PicardOptions& options = {});
SpectralField inverse_map(const SpectralField& u, int K);

// Smallest K in candidates for which solve_a (with the given method)
// converges on every one of `samples` random fields in the H1 ball of the
// given radius; nullopt if none.
std::optional<int> detect_K0(double radius, const std::vector<int>& candidates, int samples,
                             std::uint64_t seed, int n_max = 64,
                             ASolver method = ASolver::picard);

// How a_t is formed from P_K u_t. chain_rule differentiates
// a = exp(-1/2 int P_K u) directly: a_t = -1/2 a int_0^x P_K u_t.
// literal uses a_t = +1/2 b(u) int_0^x P_K u_t, which fails the
// finite-difference consistency test and is kept only for comparison.
enum class TimeDerivativeConvention { chain_rule, literal };

enum class SecondDerivativeMode { analytic, finite_difference };

struct TransformedConfig {
  int K = 16;
  CutoffConfig cut;
  // Empty means g = 0.
  SpectralField forcing;
  PicardOptions picard;
  TimeDerivativeConvention convention = TimeDerivativeConvention::chain_rule;
  SecondDerivativeMode second = SecondDerivativeMode::analytic;
};

class TransformedBurgers final : public Nonlinearity {
 public:
  TransformedBurgers(int n_max, TransformedConfig cfg);

  int n_max() const override { return n_max_; }
  const TransformedConfig& config() const { return cfg_; }

  // (phi I1, phi I2) with phi = cutoff_weight(|v|^2_H1).
  NonlinearPair evaluate(const SpectralField& v) const override;
  // (I1, I2) without the cut-off.
  NonlinearPair evaluate_uncut(const SpectralField& v) const;
  // Exact directional derivatives through the a(v) fixed point (dual numbers).
  NonlinearPair derivative(const SpectralField& v, const SpectralField& w) const override;
  NonlinearPair second_derivative(const SpectralField& v, const SpectralField& w1,
                                  const SpectralField& w2) const override;
  bool vanishes_near(const SpectralField& v) const override;

 private:
  int n_max_;
  TransformedConfig cfg_;
  std::vector<double> forcing_;  // padded to n_max
};

struct LipschitzEstimate {
  double L1 = 0.0;
  double L2 = 0.0;
  int K = 0;
  int samples = 0;
  std::uint64_t seed = 0;
};

struct LipschitzOptions {
  // Resolution of the sampled fields. The tail beyond K must be long for
  // the K^{-1/2} decay of L1 to show up undistorted at K = 64.
  int n_max = 1024;
  Spectrum spectrum = Spectrum::h1_signs;
  // Cut-off inner radius as a fraction of the sampling radius (= R_big).
  double inner_fraction = 0.5;
  SpectralField forcing;
};

// L1 = max |I1'(v) w|_L2 / |w|_H1 and L2 = max |I2'(v) w|_H1 / |w|_H1 over
// sampled v in the H1 ball of `radius` and random directions w, for the
// cut-off system with R_big = radius.
LipschitzEstimate estimate_lipschitz(int K, double radius, int samples, std::uint64_t seed,
                                     const LipschitzOptions& options = {});

}  // namespace inertia
