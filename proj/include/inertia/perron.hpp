// Backward Lyapunov-Perron problem on [-T, 0] in the weighted space with
// norm (sum_j dt e^{2 theta t_j} |v(t_j)|^2_H1)^{1/2}.
//
// For a source h, T_theta h solves v' + A v = h with the Q_N part started
// from zero at t = -T (the bounded branch, truncated) and the P_N part
// pinned to zero at t = 0. The manifold point over p is M(p) = Q_N v(0) for
// the fixed point v = T_theta F(v) + H p, (H p)(t) = sum_{n<=N} e^{-lambda_n t} p_n e_n.
#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "inertia/gap.hpp"
#include "inertia/nonlinearity.hpp"
#include "inertia/spectral.hpp"

namespace inertia {

struct PerronConfig {
  int N = 1;
  double theta = 2.5;
  double T_horizon = 15.0;
  double dt = 1e-3;
  double fp_tol = 1e-9;
  int max_iter = 200;
  // Lipschitz constants used only to report the theoretical contraction bound.
  std::optional<double> L1;
  std::optional<double> L2;

  void validate() const;
  int steps() const;
  // (lambda_{N+1}^{1/2} L1 + L2) / min(theta - lambda_N, lambda_{N+1} - theta);
  // nullopt without Lipschitz constants.
  std::optional<double> contraction_bound() const;

  // theta defaults to the midpoint of (lambda_N, lambda_{N+1}); T_horizon is
  // the smallest multiple of dt with e^{-(lambda_{N+1} - theta) T} < fp_tol,
  // times horizon_scale.
  static PerronConfig make(int N, double dt, double fp_tol = 1e-9,
                           std::optional<double> theta = std::nullopt, double horizon_scale = 1.0);
  // Level i (1-based) of a plan: N = N_i, theta = theta_i, Lipschitz constants attached.
  static PerronConfig from_plan(const GapPlan& plan, int level, double dt, double fp_tol = 1e-9,
                                double horizon_scale = 1.0);
};

struct WeightedTrajectory {
  double dt = 0.0;
  double theta = 0.0;
  // n_max x (steps + 1); column j holds the state at t_j = -T + j dt.
  Eigen::MatrixXd states;

  static WeightedTrajectory zeros(int n_max, const PerronConfig& cfg);

  int steps() const { return static_cast<int>(states.cols()) - 1; }
  int n_max() const { return static_cast<int>(states.rows()); }
  double horizon() const { return steps() * dt; }
  double time(int j) const { return (j - steps()) * dt; }
  SpectralField at(int j) const { return SpectralField(states.col(j)); }
  SpectralField final_state() const { return at(steps()); }
  double weighted_norm() const;
};

WeightedTrajectory operator-(const WeightedTrajectory& a, const WeightedTrajectory& b);

// T_theta (h1 + h2); the channels only differ in the space they map from.
WeightedTrajectory apply_T_theta(const WeightedTrajectory& h1, const WeightedTrajectory& h2,
                                 const PerronConfig& cfg);
WeightedTrajectory apply_T_theta(const WeightedTrajectory& h, const PerronConfig& cfg);

// H p; p must vanish on modes > N.
WeightedTrajectory homogeneous(const SpectralField& p, const PerronConfig& cfg);

struct ContractionReport {
  int iterations = 0;
  // |v_{k+1} - v_k| / |v_k - v_{k-1}| in the weighted norm.
  std::vector<double> ratios;
  std::vector<double> updates;
  double theta = 0.0;
  int N = 0;
  std::optional<double> bound;
};

nlohmann::json to_json(const ContractionReport& report);

struct ManifoldPoint {
  SpectralField value;  // M(p), supported on modes > N
  WeightedTrajectory trajectory;
  ContractionReport report;
};

// Picard iteration v <- T_theta F(v) + H p from v = H p, or from `initial`
// (a nearby fixed point on the same grid) when given. Throws NumericalError
// when max_iter is reached.
ManifoldPoint solve_manifold_point(const SpectralField& p, const PerronConfig& cfg,
                                   const Nonlinearity& nl,
                                   const WeightedTrajectory* initial = nullptr);

}  // namespace inertia
