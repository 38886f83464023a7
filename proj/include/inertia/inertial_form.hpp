// The reduced ODE on the manifold graph and the invariance and tracking
// diagnostics of the full transformed system.
//
// For p in P_N H the inertial form is
//   p' + A p = P_N F(p + M(p)),
// and its solutions lift to solutions p + M(p) of the full system.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "inertia/burgers.hpp"
#include "inertia/nonlinearity.hpp"
#include "inertia/perron.hpp"
#include "inertia/spectral.hpp"

namespace inertia {

class ManifoldEvaluator {
 public:
  virtual ~ManifoldEvaluator() = default;
  virtual int N() const = 0;
  virtual int n_max() const = 0;
  // M(P_N p), supported on modes > N.
  virtual SpectralField operator()(const SpectralField& p) const = 0;
};

// One Perron solve per call, warm-started from the previous call's
// trajectory. Not safe to share between threads.
class DirectManifold final : public ManifoldEvaluator {
 public:
  DirectManifold(PerronConfig cfg, const Nonlinearity& nl);

  int N() const override { return cfg_.N; }
  int n_max() const override { return nl_.n_max(); }
  SpectralField operator()(const SpectralField& p) const override;

  const PerronConfig& config() const { return cfg_; }
  int solves() const { return solves_; }

 private:
  PerronConfig cfg_;
  const Nonlinearity& nl_;
  mutable std::optional<WeightedTrajectory> last_;
  mutable int solves_ = 0;
};

// Multilinear interpolation of M over a tensor grid on a box in the
// coordinates p_1..p_N. Throws ValidationError outside the box.
class GridManifold final : public ManifoldEvaluator {
 public:
  GridManifold(const ManifoldEvaluator& exact, std::vector<double> lower, std::vector<double> upper,
               std::vector<int> counts);

  int N() const override { return N_; }
  int n_max() const override { return n_max_; }
  SpectralField operator()(const SpectralField& p) const override;

 private:
  int N_;
  int n_max_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<int> counts_;
  std::vector<Eigen::VectorXd> values_;  // row-major, last coordinate fastest
};

// Integrates the inertial form from p0 (supported on 1..N) with the
// exponential integrator of the full solver. cfg.forcing is ignored; the
// forcing belongs to the nonlinearity.
Trajectory integrate_reduced(const SpectralField& p0, const SimConfig& cfg, const Nonlinearity& nl,
                             const ManifoldEvaluator& manifold);

// p(t) + M(p(t)) for each stored state.
Trajectory lift(const Trajectory& reduced, const ManifoldEvaluator& manifold);

// Full system v' + A v = F(v) from v0.
Trajectory integrate_full(const SpectralField& v0, const SimConfig& cfg, const Nonlinearity& nl);

// |Q_N v - M(P_N v)|_{H1_0}.
double graph_distance(const SpectralField& v, const ManifoldEvaluator& manifold);

struct TrackingReport {
  int N = 0;
  std::vector<double> times;
  std::vector<double> graph_distances;
  // -slope of log distance against t over the tail half of the samples.
  double fitted_alpha = 0.0;
  double fit_r2 = 0.0;
  double fit_intercept = 0.0;
};

nlohmann::json to_json(const TrackingReport& report);
// Header t,distance then one row per sample in %.17g.
std::string tracking_csv(const TrackingReport& report);

// Integrates the full system from v0 and records the graph distance at every
// stored state. Samples with zero distance are left out of the fit.
TrackingReport tracking_test(const SpectralField& v0, const SimConfig& cfg, const Nonlinearity& nl,
                             const ManifoldEvaluator& manifold);

}  // namespace inertia
