#include "inertia/jets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "inertia/diffeo.hpp"
#include "inertia/errors.hpp"
#include "inertia/parallel.hpp"
#include "inertia/stats.hpp"

namespace inertia {

namespace {

void require_support(const SpectralField& f, int N, const char* what) {
  for (int n = N + 1; n <= f.n_max(); ++n) {
    if (f[n] != 0.0) throw ValidationError(std::string(what) + " must be supported on modes 1.." + std::to_string(N));
  }
}

bool is_zero(const WeightedTrajectory& w) { return w.states.size() == 0 || w.states.isZero(0.0); }

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

VariationalSolution solve_variational(const WeightedTrajectory& v, const SpectralField& xi,
                                      const WeightedTrajectory* source, const PerronConfig& cfg,
                                      const Nonlinearity& nl) {
  cfg.validate();
  INERTIA_REQUIRE(v.steps() == cfg.steps(), "base trajectory does not match the jet grid");
  INERTIA_REQUIRE(v.n_max() == nl.n_max() && xi.n_max() == nl.n_max(),
                  "field sizes do not match the nonlinearity");
  if (source) INERTIA_REQUIRE(source->steps() == cfg.steps(), "source does not match the jet grid");

  const WeightedTrajectory hxi = homogeneous(xi, cfg);
  const int S = cfg.steps();
  std::vector<int> active;
  for (int j = 0; j <= S; ++j) {
    if (!nl.vanishes_near(v.at(j))) active.push_back(j);
  }

  VariationalSolution out;
  out.report.theta = cfg.theta;
  out.report.N = cfg.N;
  out.report.bound = cfg.contraction_bound();

  WeightedTrajectory w = hxi;
  WeightedTrajectory rhs = WeightedTrajectory::zeros(v.n_max(), cfg);
  double prev = std::numeric_limits<double>::quiet_NaN();
  int growing = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    if (source) {
      rhs.states = source->states;
    } else {
      rhs.states.setZero();
    }
    for (int j : active) rhs.states.col(j) += nl.derivative(v.at(j), w.at(j)).sum().c;
    WeightedTrajectory next = apply_T_theta(rhs, cfg);
    next.states += hxi.states;
    const double update = (next - w).weighted_norm();
    const double scale = next.weighted_norm();
    if (!std::isfinite(update)) throw NumericalError("variational iteration produced non-finite values");
    if (it >= 2 && prev > 0.0) {
      const double ratio = update / prev;
      out.report.ratios.push_back(ratio);
      growing = ratio >= 1.0 ? growing + 1 : 0;
      if (growing >= 2) {
        throw NumericalError("variational iteration is not contracting (ratio " + std::to_string(ratio) +
                             " at N = " + std::to_string(cfg.N) + ")");
      }
    }
    out.report.updates.push_back(update);
    prev = update;
    w = std::move(next);
    out.report.iterations = it;
    if (update <= cfg.fp_tol * scale) {
      out.value = project_high(w.final_state(), cfg.N);
      out.trajectory = std::move(w);
      return out;
    }
  }
  throw NumericalError("variational iteration did not converge in " + std::to_string(cfg.max_iter) +
                       " iterations");
}

JetSolver::JetSolver(GapPlan plan, const Nonlinearity& nl, JetOptions options)
    : plan_(std::move(plan)), nl_(nl), options_(options) {
  INERTIA_REQUIRE(plan_.n >= 1 && static_cast<int>(plan_.N_seq.size()) == plan_.n,
                  "plan must have at least one level");
  INERTIA_REQUIRE(options_.max_iter >= 1, "max_iter must be at least 1");
  for (int i = 1; i <= top_level(); ++i) {
    INERTIA_REQUIRE(plan_.N_seq[static_cast<std::size_t>(i - 1)] < nl_.n_max(),
                    "plan index exceeds the resolved modes");
    levels_.push_back(PerronConfig::from_plan(plan_, i, options_.dt, options_.fp_tol));
  }
  if (plan_.n >= 2) {
    // Throws when theta_1 + theta_2 leaves (lambda_{N_2}, lambda_{N_2+1}).
    second_ = PerronConfig::make(plan_.N_seq[1], options_.dt, options_.fp_tol,
                                 plan_.theta_seq[0] + plan_.theta_seq[1]);
    second_->L1 = plan_.L1;
    second_->L2 = plan_.L2;
  }
  double T = 0.0;
  for (const auto& c : levels_) T = std::max(T, c.T_horizon);
  if (second_) T = std::max(T, second_->T_horizon);
  for (auto& c : levels_) {
    c.T_horizon = T;
    c.max_iter = options_.max_iter;
    c.validate();
  }
  if (second_) {
    second_->T_horizon = T;
    second_->max_iter = options_.max_iter;
    second_->validate();
  }
}

int JetSolver::N(int level) const { return this->level(level).N; }

const PerronConfig& JetSolver::level(int i) const {
  INERTIA_REQUIRE(i >= 1 && i <= top_level(), "jet level out of range");
  return levels_[static_cast<std::size_t>(i - 1)];
}

const PerronConfig& JetSolver::second_order() const {
  if (!second_) throw ValidationError("second jets need a plan with n >= 2");
  return *second_;
}

ManifoldPoint JetSolver::manifold(const SpectralField& p, int lvl) const {
  return solve_manifold_point(p, level(lvl), nl_);
}

ChartBase JetSolver::base(const SpectralField& coords) const {
  INERTIA_REQUIRE(coords.n_max() == nl_.n_max(), "base point size does not match nonlinearity");
  require_support(coords, N(1), "chart coordinates");
  ManifoldPoint m = manifold(coords, 1);
  ChartBase b;
  b.coords = coords;
  b.state = coords + m.value;
  b.trajectory = std::move(m.trajectory);
  b.report = std::move(m.report);
  return b;
}

VariationalSolution JetSolver::first_jet(const ChartBase& b, const SpectralField& xi, int lvl) const {
  require_support(xi, N(lvl), "jet direction");
  return solve_variational(b.trajectory, xi, nullptr, level(lvl), nl_);
}

DirectionJets JetSolver::direction_jets(const ChartBase& b, const SpectralField& xi) const {
  DirectionJets d;
  d.direction = xi;
  if (top_level() == 1) {
    d.w = first_jet(b, xi, 1);
    return d;
  }
  d.v = first_jet(b, project_low(xi, N(1)), 1);
  d.w = first_jet(b, xi, 2);
  return d;
}

VariationalSolution JetSolver::second_jet(const ChartBase& b, const DirectionJets& xi,
                                          const DirectionJets& eta) const {
  const PerronConfig& cfg = second_order();
  if (xi.v.trajectory.states.size() == 0 || xi.w.trajectory.states.size() == 0 ||
      eta.v.trajectory.states.size() == 0 || eta.w.trajectory.states.size() == 0) {
    throw ValidationError("second jets need first jets in both charts");
  }
  const WeightedTrajectory& v = b.trajectory;
  WeightedTrajectory source = WeightedTrajectory::zeros(v.n_max(), cfg);
  const bool vxi = !is_zero(xi.v.trajectory);
  const bool veta = !is_zero(eta.v.trajectory);
  if (vxi || veta) {
    for (int j = 0; j <= v.steps(); ++j) {
      const SpectralField vj = v.at(j);
      if (nl_.vanishes_near(vj)) continue;
      const SpectralField a = xi.v.trajectory.at(j);
      const SpectralField c = eta.v.trajectory.at(j);
      Eigen::VectorXd s = Eigen::VectorXd::Zero(v.n_max());
      if (vxi) s += nl_.second_derivative(vj, a, eta.w.trajectory.at(j)).sum().c;
      if (veta) s += nl_.second_derivative(vj, c, xi.w.trajectory.at(j)).sum().c;
      if (vxi && veta) s -= nl_.second_derivative(vj, a, c).sum().c;
      source.states.col(j) = s;
    }
  }
  return solve_variational(v, SpectralField::zeros(v.n_max()), &source, cfg, nl_);
}

VariationalSolution JetSolver::second_jet(const ChartBase& b, const SpectralField& xi,
                                          const SpectralField& eta) const {
  second_order();
  return second_jet(b, direction_jets(b, xi), direction_jets(b, eta));
}

SpectralField JetSolver::tangent_lift(const ChartBase& b, const SpectralField& xi) const {
  require_support(xi, N(1), "tangent direction");
  return project_low(xi + first_jet(b, xi, 1).value, N(top_level()));
}

std::vector<double> JetSolver::compatibility_residuals(const ChartBase& p, const ChartBase& p1) const {
  const int n = top_level();
  const SpectralField eta = project_low(p1.state - p.state, N(n));
  // Jets at t = 0, including their P parts.
  const DirectionJets d = direction_jets(p, eta);
  const DirectionJets d1 = direction_jets(p1, eta);
  const SpectralField j1 = d.w.trajectory.final_state();
  const SpectralField j1_at_p1 = d1.w.trajectory.final_state();
  SpectralField j2 = SpectralField::zeros(eta.n_max());
  SpectralField j2_at_p1 = j2;
  if (n >= 2) {
    j2 = second_jet(p, d, d).trajectory.final_state();
    j2_at_p1 = second_jet(p1, d1, d1).trajectory.final_state();
  }
  std::vector<double> out;
  out.push_back(h1_norm(p1.state - p.state - j1 - 0.5 * j2));
  out.push_back(h1_norm(j1_at_p1 - j1 - j2));
  if (n >= 2) out.push_back(h1_norm(j2_at_p1 - j2));
  return out;
}

double JetSolver::compatibility_residual(const ChartBase& p, const ChartBase& p1, int order) const {
  INERTIA_REQUIRE(order >= 0 && order <= top_level(), "compatibility order must lie in 0..n");
  return compatibility_residuals(p, p1)[static_cast<std::size_t>(order)];
}

CompatibilitySweep compatibility_sweep(const JetSolver& solver, const ChartBase& p,
                                       const SpectralField& xi, const std::vector<double>& separations) {
  INERTIA_REQUIRE(separations.size() >= 2, "a sweep needs at least two separations");
  INERTIA_REQUIRE(std::abs(h1_norm(xi) - 1.0) < 1e-12, "sweep direction must have unit H1 norm");
  const int orders = solver.top_level() + 1;
  CompatibilitySweep s;
  s.separations = separations;
  s.plus.assign(static_cast<std::size_t>(orders), {});
  s.minus = s.plus;
  s.mean = s.plus;
  for (double d : separations) {
    INERTIA_REQUIRE(d > 0.0, "separations must be positive");
    const auto rp = solver.compatibility_residuals(p, solver.base(p.coords + d * xi));
    const auto rm = solver.compatibility_residuals(p, solver.base(p.coords - d * xi));
    for (std::size_t l = 0; l < static_cast<std::size_t>(orders); ++l) {
      s.plus[l].push_back(rp[l]);
      s.minus[l].push_back(rm[l]);
      s.mean[l].push_back(0.5 * (rp[l] + rm[l]));
    }
  }
  for (std::size_t l = 0; l < static_cast<std::size_t>(orders); ++l) {
    s.slopes.push_back(loglog_slope(separations, s.mean[l]));
    s.slopes_plus.push_back(loglog_slope(separations, s.plus[l]));
    s.slopes_minus.push_back(loglog_slope(separations, s.minus[l]));
  }
  return s;
}

JetBundle JetSolver::bundle(const ChartBase& b) const {
  const int top = top_level();
  const int Nt = N(top);
  const int m = b.state.n_max();
  JetBundle out;
  out.base_p = b.coords;
  out.value = project_high(b.state, Nt);
  out.N = Nt;
  for (int i = 1; i <= top; ++i) out.theta_weights.push_back(level(i).theta);

  std::vector<DirectionJets> dirs(static_cast<std::size_t>(Nt));
  parallel_for(Nt, [&](int k) {
    dirs[static_cast<std::size_t>(k)] = direction_jets(b, SpectralField::mode(m, k + 1));
  });
  out.jet1 = Eigen::MatrixXd::Zero(m, Nt);
  for (int k = 0; k < Nt; ++k) out.jet1.col(k) = dirs[static_cast<std::size_t>(k)].w.value.c;

  if (top >= 2) {
    out.theta_weights.push_back(second_order().theta);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < Nt; ++i) {
      for (int j = i; j < Nt; ++j) pairs.emplace_back(i, j);
    }
    std::vector<Eigen::VectorXd> cols(pairs.size());
    parallel_for(static_cast<int>(pairs.size()), [&](int k) {
      const auto [i, j] = pairs[static_cast<std::size_t>(k)];
      cols[static_cast<std::size_t>(k)] =
          second_jet(b, dirs[static_cast<std::size_t>(i)], dirs[static_cast<std::size_t>(j)]).value.c;
    });
    out.jet2.assign(static_cast<std::size_t>(Nt), Eigen::MatrixXd::Zero(m, Nt));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs[k];
      out.jet2[static_cast<std::size_t>(i)].col(j) = cols[k];
      out.jet2[static_cast<std::size_t>(j)].col(i) = cols[k];
    }
  }
  return out;
}

nlohmann::json to_json(const JetBundle& bundle) {
  nlohmann::json j;
  j["base_p"] = to_vector(bundle.base_p.c);
  j["value"] = to_vector(bundle.value.c);
  j["N"] = bundle.N;
  j["jet1"] = matrix_json(bundle.jet1);
  nlohmann::json j2 = nlohmann::json::array();
  for (const auto& m : bundle.jet2) j2.push_back(matrix_json(m));
  j["jet2"] = j2;
  j["theta_weights"] = bundle.theta_weights;
  return j;
}

SpectralField first_jet(const SpectralField& p, const SpectralField& xi, const GapPlan& plan,
                        const Nonlinearity& nl, const JetOptions& options) {
  const JetSolver solver(plan, nl, options);
  return solver.first_jet(solver.base(p), xi, 1).value;
}

SpectralField second_jet(const SpectralField& p, const SpectralField& xi, const SpectralField& eta,
                         const GapPlan& plan, const Nonlinearity& nl, const JetOptions& options) {
  const JetSolver solver(plan, nl, options);
  return solver.second_jet(solver.base(p), xi, eta).value;
}

// ---------------------------------------------------------------------------

void ExtensionConfig::validate() const {
  INERTIA_REQUIRE(std::isfinite(mu) && mu > 0.0, "mu must be positive");
  INERTIA_REQUIRE(chart_dim == 1 || chart_dim == 2, "chart_dim must be 1 or 2");
  INERTIA_REQUIRE(order == 1 || order == 2, "jet order must be 1 or 2");
}

double ExtensionConfig::mollifier_radius() const { return std::pow(mu, order); }

Eigen::VectorXd ChartSamples::node(int flat) const {
  Eigen::VectorXd p(dim);
  for (int d = dim - 1; d >= 0; --d) {
    const int c = counts[static_cast<std::size_t>(d)];
    p[d] = lower[static_cast<std::size_t>(d)] + (flat % c) * spacing[static_cast<std::size_t>(d)];
    flat /= c;
  }
  return p;
}

ChartSamples sample_chart(int dim, const std::vector<double>& lower,
                          const std::vector<double>& spacing, const std::vector<int>& counts,
                          const std::vector<double>& metric,
                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& chart) {
  INERTIA_REQUIRE(dim == 1 || dim == 2, "chart_dim must be 1 or 2");
  const auto d = static_cast<std::size_t>(dim);
  INERTIA_REQUIRE(lower.size() == d && spacing.size() == d && counts.size() == d && metric.size() == d,
                  "chart box description does not match chart_dim");
  int total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    INERTIA_REQUIRE(spacing[i] > 0.0 && counts[i] >= 2 && metric[i] > 0.0,
                    "chart grid needs positive spacing, metric and at least two nodes per axis");
    total *= counts[i];
  }
  ChartSamples s{dim, lower, spacing, counts, metric, {}};
  s.values.resize(static_cast<std::size_t>(total));
  parallel_for(total, [&](int k) { s.values[static_cast<std::size_t>(k)] = chart(s.node(k)); });
  return s;
}

JetSample jet_sample(const JetSolver& solver, const ChartBase& b) {
  const JetBundle jb = solver.bundle(b);
  JetSample s;
  s.p = b.state.c.head(jb.N);
  s.value = jb.value.c;
  s.jet1 = jb.jet1;
  s.jet2 = jb.jet2;
  return s;
}

namespace {

// Mass of exp(-1 / (1 - |x|^2)) over the unit ball.
double bump_mass(int dim) {
  if (dim == 2) {
    // pi int_0^1 e^{-1/u} du = pi (e^{-1} + Ei(-1)).
    static const double m2 = std::numbers::pi * (std::exp(-1.0) + std::expint(-1.0));
    return m2;
  }
  // The integrand is flat to all orders at +-1, so the trapezoid rule
  // converges faster than any power.
  static const double m1 = [] {
    const int n = 20000;
    const double h = 2.0 / n;
    double s = 0.0;
    for (int k = 1; k < n; ++k) {
      const double x = -1.0 + k * h;
      s += std::exp(-1.0 / (1.0 - x * x));
    }
    return s * h;
  }();
  return m1;
}

}  // namespace

double bump_kernel(int dim, const Eigen::VectorXd& x) {
  INERTIA_REQUIRE(dim == 1 || dim == 2, "kernel dimension must be 1 or 2");
  const double r2 = x.squaredNorm();
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2)) / bump_mass(dim);
}

double mollifier_mass(int dim, double radius, double spacing) {
  INERTIA_REQUIRE(radius > 0.0 && spacing > 0.0, "radius and spacing must be positive");
  const int k = static_cast<int>(std::ceil(radius / spacing));
  double s = 0.0;
  Eigen::VectorXd x(dim);
  if (dim == 1) {
    for (int i = -k; i <= k; ++i) {
      x[0] = i * spacing / radius;
      s += bump_kernel(1, x);
    }
    return s * spacing / radius;
  }
  for (int i = -k; i <= k; ++i) {
    for (int j = -k; j <= k; ++j) {
      x[0] = i * spacing / radius;
      x[1] = j * spacing / radius;
      s += bump_kernel(2, x);
    }
  }
  return s * spacing * spacing / (radius * radius);
}

BlendExtension::BlendExtension(ChartSamples chart, std::vector<JetSample> base, ExtensionConfig config)
    : chart_(std::move(chart)), base_(std::move(base)), config_(config) {
  config_.validate();
  INERTIA_REQUIRE(chart_.dim == config_.chart_dim, "chart dimension does not match chart_dim");
  INERTIA_REQUIRE(!base_.empty(), "the base set is empty");
  const double radius = config_.mollifier_radius();
  for (int d = 0; d < chart_.dim; ++d) {
    const double h = chart_.spacing[static_cast<std::size_t>(d)] * chart_.metric[static_cast<std::size_t>(d)];
    if (h > 0.5 * radius) {
      throw ValidationError("chart under-sampled: H1 spacing " + std::to_string(h) +
                            " exceeds half the mollifier radius " + std::to_string(radius));
    }
  }
  for (const auto& b : base_) {
    INERTIA_REQUIRE(b.p.size() == chart_.dim && b.jet1.cols() == chart_.dim,
                    "base jets do not match the chart dimension");
  }
}

double BlendExtension::h1_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  double s = 0.0;
  for (int d = 0; d < chart_.dim; ++d) {
    const double e = chart_.metric[static_cast<std::size_t>(d)] * (a[d] - b[d]);
    s += e * e;
  }
  return std::sqrt(s);
}

double BlendExtension::distance_to_base(const Eigen::VectorXd& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : base_) best = std::min(best, h1_distance(p, b.p));
  return best;
}

double BlendExtension::rho(const Eigen::VectorXd& p) const {
  const double mu = config_.mu;
  return 1.0 - smooth_step((distance_to_base(p) - mu) / mu);
}

Eigen::VectorXd BlendExtension::jet_continuation(const Eigen::VectorXd& p) const {
  const JetSample* nearest = &base_.front();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : base_) {
    const double d = h1_distance(p, b.p);
    if (d < best) {
      best = d;
      nearest = &b;
    }
  }
  const Eigen::VectorXd delta = p - nearest->p;
  Eigen::VectorXd out = nearest->value + nearest->jet1 * delta;
  for (std::size_t i = 0; i < nearest->jet2.size(); ++i) {
    out += 0.5 * delta[static_cast<Eigen::Index>(i)] * (nearest->jet2[i] * delta);
  }
  return out;
}

bool BlendExtension::supported(const Eigen::VectorXd& p) const {
  const double radius = config_.mollifier_radius();
  for (int d = 0; d < chart_.dim; ++d) {
    const auto k = static_cast<std::size_t>(d);
    const double reach = radius / chart_.metric[k];
    const double hi = chart_.lower[k] + (chart_.counts[k] - 1) * chart_.spacing[k];
    if (p[d] - reach < chart_.lower[k] - 1e-12 || p[d] + reach > hi + 1e-12) return false;
  }
  return true;
}

Eigen::VectorXd BlendExtension::mollified(const Eigen::VectorXd& p) const {
  if (!supported(p)) throw ValidationError("mollifier support leaves the sampled chart");
  const double radius = config_.mollifier_radius();
  // Index window per axis covering the support.
  std::vector<int> lo(static_cast<std::size_t>(chart_.dim)), hi(lo.size());
  for (int d = 0; d < chart_.dim; ++d) {
    const auto k = static_cast<std::size_t>(d);
    const double reach = radius / chart_.metric[k];
    lo[k] = std::max(0, static_cast<int>(std::floor((p[d] - reach - chart_.lower[k]) / chart_.spacing[k])));
    hi[k] = std::min(chart_.counts[k] - 1,
                     static_cast<int>(std::ceil((p[d] + reach - chart_.lower[k]) / chart_.spacing[k])));
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(chart_.values.front().size());
  double mass = 0.0;
  Eigen::VectorXd x(chart_.dim);
  auto visit = [&](int flat) {
    const Eigen::VectorXd y = chart_.node(flat);
    for (int d = 0; d < chart_.dim; ++d) x[d] = chart_.metric[static_cast<std::size_t>(d)] * (p[d] - y[d]) / radius;
    const double w = bump_kernel(chart_.dim, x);
    if (w == 0.0) return;
    mass += w;
    acc += w * chart_.values[static_cast<std::size_t>(flat)];
  };
  if (chart_.dim == 1) {
    for (int i = lo[0]; i <= hi[0]; ++i) visit(i);
  } else {
    for (int i = lo[0]; i <= hi[0]; ++i) {
      for (int j = lo[1]; j <= hi[1]; ++j) visit(i * chart_.counts[1] + j);
    }
  }
  if (!(mass > 0.0)) throw NumericalError("mollifier support contains no chart node");
  return acc / mass;
}

Eigen::VectorXd BlendExtension::operator()(const Eigen::VectorXd& p) const {
  INERTIA_REQUIRE(p.size() == chart_.dim, "point dimension does not match the chart");
  const double r = rho(p);
  if (r == 0.0) return jet_continuation(p);
  if (r == 1.0) return mollified(p);
  return (1.0 - r) * jet_continuation(p) + r * mollified(p);
}

BlendDeviation blend_deviation(const BlendExtension& ext, const std::vector<double>& lower,
                               const std::vector<double>& upper) {
  const ChartSamples& chart = ext.chart();
  INERTIA_REQUIRE(static_cast<int>(lower.size()) == chart.dim && static_cast<int>(upper.size()) == chart.dim,
                  "deviation box does not match the chart dimension");
  BlendDeviation out;
  for (int k = 0; k < chart.size(); ++k) {
    const Eigen::VectorXd y = chart.node(k);
    bool inside = true;
    for (int d = 0; d < chart.dim; ++d) {
      const auto i = static_cast<std::size_t>(d);
      inside = inside && y[d] >= lower[i] - 1e-12 && y[d] <= upper[i] + 1e-12;
    }
    if (!inside) continue;
    const Eigen::VectorXd diff = ext(y) - chart.values[static_cast<std::size_t>(k)];
    out.sup = std::max(out.sup, h1_norm(SpectralField(diff)));
    ++out.nodes;
  }
  INERTIA_REQUIRE(out.nodes > 0, "deviation box contains no chart node");
  return out;
}

}  // namespace inertia
