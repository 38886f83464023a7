// First and second Taylor jets of the manifold maps, their compatibility
// residuals, and the mollified blend extension in chart dimension <= 2.
//
// Jets are computed along trajectories of the lowest manifold M_{N_1}. With
// V the level-1 chart and W the level-2 chart (both pass through the same
// trajectory v(t) there):
//   V'xi  solves w = T_{theta_1}(F'(v) w) + H P_{N_1} xi        (split at N_1)
//   W'xi  solves w = T_{theta_2}(F'(v) w) + H P_{N_2} xi        (split at N_2)
//   W''[xi, eta] solves w = T_{theta_1+theta_2}(F'(v) w + s)    (split at N_2)
//     s = F''(v)[V'xi, W'eta] + F''(v)[V'eta, W'xi] - F''(v)[V'xi, V'eta].
// Along directions tangent to M_{N_1} V'xi = W'xi, so W'' is the Hessian of
// M_{N_2} there; off the tangent space it is only the extension jet.
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "inertia/gap.hpp"
#include "inertia/nonlinearity.hpp"
#include "inertia/perron.hpp"
#include "inertia/spectral.hpp"

namespace inertia {

struct JetOptions {
  double dt = 5e-3;
  // Picard on the variational problems stops when the weighted update drops
  // below fp_tol times the weighted norm of the iterate (problems are linear).
  double fp_tol = 1e-12;
  int max_iter = 200;
};

struct VariationalSolution {
  SpectralField value;  // Q_N w(0)
  WeightedTrajectory trajectory;
  ContractionReport report;
};

// A point of M_{N_1}: chart coordinates p in P_{N_1}, the full state
// p + M_{N_1}(p) and the trajectory through it.
struct ChartBase {
  SpectralField coords;
  SpectralField state;
  WeightedTrajectory trajectory;
  ContractionReport report;
};

// First jets of one direction in both charts. `v` is empty for plans with n = 1.
struct DirectionJets {
  SpectralField direction;
  VariationalSolution v;
  VariationalSolution w;
};

struct JetBundle {
  SpectralField base_p;
  SpectralField value;  // Q_{N_top} of the base state
  int N = 0;            // chart dimension N_top
  // n_max x N: column j is M'(p) e_{j+1}.
  Eigen::MatrixXd jet1;
  // jet2[i](:, j) = M''(p)[e_{i+1}, e_{j+1}]; empty for plans with n = 1.
  std::vector<Eigen::MatrixXd> jet2;
  // Exponents used per order: {theta_1, ..., theta_n} for first jets and
  // theta_1 + theta_2 for the second jet.
  std::vector<double> theta_weights;
};

nlohmann::json to_json(const JetBundle& bundle);

class JetSolver {
 public:
  // Levels are the plan's (N_i, theta_i); every level and the second-order
  // problem share one time grid long enough for all of them. Throws
  // ValidationError when a weight leaves its spectral window.
  JetSolver(GapPlan plan, const Nonlinearity& nl, JetOptions options = {});

  const GapPlan& plan() const { return plan_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const JetOptions& options() const { return options_; }
  int top_level() const { return plan_.n < 2 ? plan_.n : 2; }
  int N(int level) const;
  const PerronConfig& level(int i) const;
  // Split at N_2 with weight theta_1 + theta_2. Requires plan.n >= 2.
  const PerronConfig& second_order() const;

  // M_{N_level}(p) for p supported on modes 1..N_level.
  ManifoldPoint manifold(const SpectralField& p, int level) const;
  ChartBase base(const SpectralField& coords) const;

  // M'_{N_level}(p) xi along the trajectory of `b`; xi supported on 1..N_level.
  VariationalSolution first_jet(const ChartBase& b, const SpectralField& xi, int level) const;
  DirectionJets direction_jets(const ChartBase& b, const SpectralField& xi) const;
  // Q_{N_2} W''(p, 0)[xi, eta]; requires plan.n >= 2.
  VariationalSolution second_jet(const ChartBase& b, const DirectionJets& xi,
                                 const DirectionJets& eta) const;
  VariationalSolution second_jet(const ChartBase& b, const SpectralField& xi,
                                 const SpectralField& eta) const;

  // P_{N_top}(xi + M'_{N_1}(p) xi) for xi in P_{N_1}: the chart direction of
  // the tangent to M_{N_1}.
  SpectralField tangent_lift(const ChartBase& b, const SpectralField& xi) const;

  // Order-l compatibility residual at t = 0 in H1_0 with n = top_level(),
  // eta = P_{N_n}(state(p1) - state(p)) and xi = eta:
  //   l = 0: |v(p1) - v(p) - P1(p)[eta] - 1/2 P2(p)[eta, eta]|
  //   l = 1: |P1(p1)[eta] - P1(p)[eta] - P2(p)[eta, eta]|
  //   l = 2: |P2(p1)[eta, eta] - P2(p)[eta, eta]|
  // with P1, P2 the top-chart jets (terms beyond n dropped).
  double compatibility_residual(const ChartBase& p, const ChartBase& p1, int order) const;
  // Orders 0..n at once, sharing the jet solves.
  std::vector<double> compatibility_residuals(const ChartBase& p, const ChartBase& p1) const;

  JetBundle bundle(const ChartBase& b) const;

 private:
  GapPlan plan_;
  const Nonlinearity& nl_;
  JetOptions options_;
  std::vector<PerronConfig> levels_;
  std::optional<PerronConfig> second_;
};

// Compatibility residuals over p1 = p +- d xi for each separation d; the
// reported residual is the mean of the two sides, which cancels the
// odd-order term of the next Taylor coefficient. One-sided data are kept.
struct CompatibilitySweep {
  std::vector<double> separations;  // H1 norm of p1 - p in chart coordinates
  // [order][k]
  std::vector<std::vector<double>> plus;
  std::vector<std::vector<double>> minus;
  std::vector<std::vector<double>> mean;
  std::vector<double> slopes;  // log-log slope of mean per order
  std::vector<double> slopes_plus;
  std::vector<double> slopes_minus;
};

// xi is supported on 1..N_1 with unit H1 norm.
CompatibilitySweep compatibility_sweep(const JetSolver& solver, const ChartBase& p,
                                       const SpectralField& xi, const std::vector<double>& separations);

// w = T_theta(F'(v) w + source) + H xi by Picard iteration along the fixed
// trajectory v; cfg.fp_tol is relative. Throws NumericalError on
// non-contraction (two successive ratios >= 1) or at max_iter.
VariationalSolution solve_variational(const WeightedTrajectory& v, const SpectralField& xi,
                                      const WeightedTrajectory* source, const PerronConfig& cfg,
                                      const Nonlinearity& nl);

// Convenience wrappers with the operation signatures used by the CLI.
SpectralField first_jet(const SpectralField& p, const SpectralField& xi, const GapPlan& plan,
                        const Nonlinearity& nl, const JetOptions& options = {});
SpectralField second_jet(const SpectralField& p, const SpectralField& xi, const SpectralField& eta,
                         const GapPlan& plan, const Nonlinearity& nl,
                         const JetOptions& options = {});

// ---------------------------------------------------------------------------
// Blend extension over a low-dimensional chart.

struct ExtensionConfig {
  double mu = 0.1;
  int chart_dim = 1;
  // Jet order n: the mollifier radius is mu^n.
  int order = 1;

  void validate() const;
  double mollifier_radius() const;
};

// Samples of M over a tensor grid of chart coordinates.
struct ChartSamples {
  int dim = 1;
  std::vector<double> lower;
  std::vector<double> spacing;
  std::vector<int> counts;
  // H1 weight of each chart coordinate (sqrt(lambda) of its mode).
  std::vector<double> metric;
  // Row-major over the grid (last coordinate fastest).
  std::vector<Eigen::VectorXd> values;

  int size() const { return static_cast<int>(values.size()); }
  Eigen::VectorXd node(int flat) const;
};

// M over the box lower + spacing * [0, counts - 1]; `chart` maps chart
// coordinates to the manifold value.
ChartSamples sample_chart(int dim, const std::vector<double>& lower,
                          const std::vector<double>& spacing, const std::vector<int>& counts,
                          const std::vector<double>& metric,
                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& chart);

// A base-set point with its jets in chart coordinates.
struct JetSample {
  Eigen::VectorXd p;
  Eigen::VectorXd value;
  Eigen::MatrixXd jet1;               // m x d
  std::vector<Eigen::MatrixXd> jet2;  // d blocks of m x d; empty for first-order jets
};

// Jets of the top chart at a base point, restricted to chart coordinates.
JetSample jet_sample(const JetSolver& solver, const ChartBase& b);

// Normalized bump beta(x) = c exp(-1 / (1 - |x|^2)) on the unit ball of R^dim.
double bump_kernel(int dim, const Eigen::VectorXd& x);
// Tensor-grid quadrature of the kernel scaled to the given radius.
double mollifier_mass(int dim, double radius, double spacing);

class BlendExtension {
 public:
  // Throws ValidationError when the chart spacing exceeds half the mollifier
  // radius or the base set is empty.
  BlendExtension(ChartSamples chart, std::vector<JetSample> base, ExtensionConfig config);

  // (1 - rho) Mhat + rho S M.
  Eigen::VectorXd operator()(const Eigen::VectorXd& p) const;
  // 0 within mu of the base set, 1 beyond 2 mu.
  double rho(const Eigen::VectorXd& p) const;
  // Jet polynomial from the nearest base point.
  Eigen::VectorXd jet_continuation(const Eigen::VectorXd& p) const;
  // Mollified chart with weights renormalized to unit mass on the grid.
  Eigen::VectorXd mollified(const Eigen::VectorXd& p) const;
  // Whether the mollifier support around p lies inside the sampled box.
  bool supported(const Eigen::VectorXd& p) const;
  double distance_to_base(const Eigen::VectorXd& p) const;

  const ChartSamples& chart() const { return chart_; }
  const ExtensionConfig& config() const { return config_; }

 private:
  double h1_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  ChartSamples chart_;
  std::vector<JetSample> base_;
  ExtensionConfig config_;
};

struct BlendDeviation {
  double sup = 0.0;  // max H1 deviation over supported chart nodes
  int nodes = 0;
};

// sup of |Mtilde - M|_{H1} over chart nodes inside [lower, upper].
BlendDeviation blend_deviation(const BlendExtension& ext, const std::vector<double>& lower,
                               const std::vector<double>& upper);

}  // namespace inertia
