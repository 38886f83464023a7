#include "inertia/perron.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "inertia/errors.hpp"

namespace inertia {

namespace {

// Weights of exact exponential quadrature over one step for a linear
// source: int_0^dt e^{-lambda (dt - s)} h(s) ds = w0 h_j + w1 h_{j+1}.
struct StepWeights {
  double decay;  // e^{-lambda dt}
  double w0;
  double w1;
};

StepWeights step_weights(double lambda, double dt) {
  const double z = lambda * dt;
  const double e = std::exp(-z);
  double i0, i1;  // dt phi1(-z), dt phi2(-z)
  if (z < 1e-3) {
    i0 = dt * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
    i1 = dt * (0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0);
  } else {
    const double one_minus_e = -std::expm1(-z);
    i0 = dt * one_minus_e / z;
    i1 = dt * (z - one_minus_e) / (z * z);
  }
  return {e, i0 - i1, i1};
}

void check_grid(const WeightedTrajectory& h, const PerronConfig& cfg) {
  INERTIA_REQUIRE(h.steps() == cfg.steps(), "trajectory length does not match the Perron grid");
  INERTIA_REQUIRE(std::abs(h.dt - cfg.dt) <= 1e-15 * cfg.dt, "trajectory step does not match the Perron grid");
  INERTIA_REQUIRE(cfg.N <= h.n_max(), "N exceeds the number of modes");
}

}  // namespace

void PerronConfig::validate() const {
  INERTIA_REQUIRE(N >= 1, "N must be at least 1");
  INERTIA_REQUIRE(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  INERTIA_REQUIRE(std::isfinite(fp_tol) && fp_tol > 0.0, "fp_tol must be positive");
  INERTIA_REQUIRE(max_iter >= 1, "max_iter must be at least 1");
  const double lo = eigenvalue(N);
  const double hi = eigenvalue(N + 1);
  INERTIA_REQUIRE(theta > lo && theta < hi,
                  "theta must lie strictly between lambda_N and lambda_{N+1}");
  INERTIA_REQUIRE(std::isfinite(T_horizon) && T_horizon > 0.0, "T_horizon must be positive");
  INERTIA_REQUIRE(std::exp(-(hi - theta) * T_horizon) < fp_tol,
                  "T_horizon too short: exp(-(lambda_{N+1} - theta) T) must be below fp_tol");
  INERTIA_REQUIRE(steps() >= 1, "T_horizon must cover at least one step");
}

int PerronConfig::steps() const { return static_cast<int>(std::llround(T_horizon / dt)); }

std::optional<double> PerronConfig::contraction_bound() const {
  if (!L1 || !L2) return std::nullopt;
  const double gap = std::min(theta - eigenvalue(N), eigenvalue(N + 1) - theta);
  return (std::sqrt(eigenvalue(N + 1)) * *L1 + *L2) / gap;
}

PerronConfig PerronConfig::make(int N, double dt, double fp_tol, std::optional<double> theta,
                                double horizon_scale) {
  INERTIA_REQUIRE(N >= 1, "N must be at least 1");
  INERTIA_REQUIRE(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  INERTIA_REQUIRE(fp_tol > 0.0 && fp_tol < 1.0, "fp_tol must lie in (0, 1)");
  INERTIA_REQUIRE(horizon_scale >= 1.0, "horizon_scale must be at least 1");
  PerronConfig cfg;
  cfg.N = N;
  cfg.dt = dt;
  cfg.fp_tol = fp_tol;
  cfg.theta = theta.value_or(0.5 * (eigenvalue(N) + eigenvalue(N + 1)));
  const double gap = eigenvalue(N + 1) - cfg.theta;
  INERTIA_REQUIRE(gap > 0.0, "theta must lie below lambda_{N+1}");
  // Strict inequality: one extra step past the exact threshold.
  const double T = -std::log(fp_tol) / gap;
  const int steps = static_cast<int>(std::floor(T / dt)) + 1;
  cfg.T_horizon = horizon_scale * steps * dt;
  cfg.validate();
  return cfg;
}

PerronConfig PerronConfig::from_plan(const GapPlan& plan, int level, double dt, double fp_tol,
                                     double horizon_scale) {
  INERTIA_REQUIRE(level >= 1 && level <= plan.n, "plan level out of range");
  PerronConfig cfg = make(plan.N_seq[static_cast<std::size_t>(level - 1)], dt, fp_tol,
                          plan.theta_seq[static_cast<std::size_t>(level - 1)], horizon_scale);
  cfg.L1 = plan.L1;
  cfg.L2 = plan.L2;
  return cfg;
}

WeightedTrajectory WeightedTrajectory::zeros(int n_max, const PerronConfig& cfg) {
  WeightedTrajectory w;
  w.dt = cfg.dt;
  w.theta = cfg.theta;
  w.states = Eigen::MatrixXd::Zero(n_max, cfg.steps() + 1);
  return w;
}

double WeightedTrajectory::weighted_norm() const {
  Eigen::VectorXd lam(n_max());
  for (int n = 1; n <= n_max(); ++n) lam[n - 1] = eigenvalue(n);
  double s = 0.0;
  for (int j = 0; j <= steps(); ++j) {
    const double h1sq = lam.dot(states.col(j).cwiseAbs2());
    s += dt * std::exp(2.0 * theta * time(j)) * h1sq;
  }
  return std::sqrt(s);
}

WeightedTrajectory operator-(const WeightedTrajectory& a, const WeightedTrajectory& b) {
  WeightedTrajectory out = a;
  out.states -= b.states;
  return out;
}

WeightedTrajectory apply_T_theta(const WeightedTrajectory& h1, const WeightedTrajectory& h2,
                                 const PerronConfig& cfg) {
  check_grid(h2, cfg);
  INERTIA_REQUIRE(h1.n_max() == h2.n_max(), "source channels must share n_max");
  WeightedTrajectory h = h1;
  h.states += h2.states;
  return apply_T_theta(h, cfg);
}

WeightedTrajectory apply_T_theta(const WeightedTrajectory& h, const PerronConfig& cfg) {
  check_grid(h, cfg);
  const int n_max = h.n_max();
  const int S = cfg.steps();
  WeightedTrajectory v = WeightedTrajectory::zeros(n_max, cfg);
  for (int n = 1; n <= n_max; ++n) {
    const int r = n - 1;
    const StepWeights w = step_weights(eigenvalue(n), cfg.dt);
    if (n > cfg.N) {
      // Forward from zero at -T: the solution bounded as t -> -infinity.
      for (int j = 0; j < S; ++j) {
        v.states(r, j + 1) = w.decay * v.states(r, j) + w.w0 * h.states(r, j) + w.w1 * h.states(r, j + 1);
      }
    } else {
      // Backward from zero at t = 0, inverting the forward step.
      const double grow = 1.0 / w.decay;
      for (int j = S - 1; j >= 0; --j) {
        v.states(r, j) = grow * (v.states(r, j + 1) - w.w0 * h.states(r, j) - w.w1 * h.states(r, j + 1));
      }
    }
  }
  return v;
}

WeightedTrajectory homogeneous(const SpectralField& p, const PerronConfig& cfg) {
  cfg.validate();
  INERTIA_REQUIRE(cfg.N <= p.n_max(), "N exceeds the number of modes");
  for (int n = cfg.N + 1; n <= p.n_max(); ++n) {
    INERTIA_REQUIRE(p[n] == 0.0, "homogeneous data must be supported on modes 1..N");
  }
  WeightedTrajectory v = WeightedTrajectory::zeros(p.n_max(), cfg);
  for (int j = 0; j <= v.steps(); ++j) {
    const double t = v.time(j);
    for (int n = 1; n <= cfg.N; ++n) v.states(n - 1, j) = std::exp(-eigenvalue(n) * t) * p[n];
  }
  return v;
}

nlohmann::json to_json(const ContractionReport& report) {
  nlohmann::json j;
  j["iterations"] = report.iterations;
  j["ratios"] = report.ratios;
  j["theta"] = report.theta;
  j["N"] = report.N;
  j["bound"] = report.bound ? nlohmann::json(*report.bound) : nlohmann::json(nullptr);
  return j;
}

ManifoldPoint solve_manifold_point(const SpectralField& p, const PerronConfig& cfg,
                                   const Nonlinearity& nl, const WeightedTrajectory* initial) {
  cfg.validate();
  INERTIA_REQUIRE(p.n_max() == nl.n_max(), "base point size does not match nonlinearity");
  const WeightedTrajectory hp = homogeneous(p, cfg);
  const int S = cfg.steps();

  ManifoldPoint out;
  out.report.theta = cfg.theta;
  out.report.N = cfg.N;
  out.report.bound = cfg.contraction_bound();

  WeightedTrajectory v = hp;
  if (initial) {
    check_grid(*initial, cfg);
    INERTIA_REQUIRE(initial->n_max() == p.n_max(), "initial trajectory size does not match");
    v = *initial;
  }
  WeightedTrajectory source = WeightedTrajectory::zeros(p.n_max(), cfg);
  double prev_update = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= cfg.max_iter; ++it) {
    for (int j = 0; j <= S; ++j) {
      const SpectralField vj = v.at(j);
      if (nl.vanishes_near(vj)) {
        source.states.col(j).setZero();
      } else {
        source.states.col(j) = nl.evaluate(vj).sum().c;
      }
    }
    WeightedTrajectory next = apply_T_theta(source, cfg);
    next.states += hp.states;
    const double update = (next - v).weighted_norm();
    if (!std::isfinite(update)) throw NumericalError("Perron iteration produced non-finite values");
    if (it >= 2 && prev_update > 0.0) out.report.ratios.push_back(update / prev_update);
    out.report.updates.push_back(update);
    prev_update = update;
    v = std::move(next);
    out.report.iterations = it;
    if (update < cfg.fp_tol) {
      out.value = project_high(v.final_state(), cfg.N);
      out.trajectory = std::move(v);
      return out;
    }
  }
  const double last = out.report.ratios.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                 : out.report.ratios.back();
  throw NumericalError("Perron fixed point did not converge in " + std::to_string(cfg.max_iter) +
                       " iterations (last contraction ratio " + std::to_string(last) +
                       "); the gap condition is likely violated");
}

}  // namespace inertia
