#include "inertia/inertial_form.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "inertia/errors.hpp"
#include "inertia/stats.hpp"

namespace inertia {

namespace {

void require_low(const SpectralField& p, int N) {
  for (int n = N + 1; n <= p.n_max(); ++n) {
    if (p[n] != 0.0) throw ValidationError("reduced state must be supported on modes 1.." + std::to_string(N));
  }
}

}  // namespace

DirectManifold::DirectManifold(PerronConfig cfg, const Nonlinearity& nl) : cfg_(cfg), nl_(nl) {
  cfg_.validate();
  INERTIA_REQUIRE(cfg_.N < nl_.n_max(), "N must be below n_max");
}

SpectralField DirectManifold::operator()(const SpectralField& p) const {
  ManifoldPoint m = solve_manifold_point(project_low(p, cfg_.N), cfg_, nl_, last_ ? &*last_ : nullptr);
  ++solves_;
  last_ = std::move(m.trajectory);
  return m.value;
}

GridManifold::GridManifold(const ManifoldEvaluator& exact, std::vector<double> lower,
                           std::vector<double> upper, std::vector<int> counts)
    : N_(exact.N()),
      n_max_(exact.n_max()),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      counts_(std::move(counts)) {
  const auto d = static_cast<std::size_t>(N_);
  INERTIA_REQUIRE(lower_.size() == d && upper_.size() == d && counts_.size() == d,
                  "grid box must have one range per reduced coordinate");
  INERTIA_REQUIRE(N_ <= 3, "grid charts support N <= 3");
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    INERTIA_REQUIRE(upper_[i] > lower_[i] && counts_[i] >= 2, "grid box needs upper > lower and >= 2 nodes");
    total *= static_cast<std::size_t>(counts_[i]);
  }
  values_.resize(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    SpectralField p = SpectralField::zeros(n_max_);
    std::size_t rest = flat;
    for (std::size_t i = d; i-- > 0;) {
      const auto c = static_cast<std::size_t>(counts_[i]);
      const double h = (upper_[i] - lower_[i]) / (counts_[i] - 1);
      p[static_cast<int>(i) + 1] = lower_[i] + static_cast<double>(rest % c) * h;
      rest /= c;
    }
    values_[flat] = exact(p).c;
  }
}

SpectralField GridManifold::operator()(const SpectralField& p) const {
  const auto d = static_cast<std::size_t>(N_);
  std::vector<std::size_t> base(d);
  std::vector<double> frac(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double x = p[static_cast<int>(i) + 1];
    if (!(x >= lower_[i] - 1e-12 && x <= upper_[i] + 1e-12)) {
      throw ValidationError("reduced state left the interpolation box");
    }
    const double h = (upper_[i] - lower_[i]) / (counts_[i] - 1);
    const double s = std::clamp((x - lower_[i]) / h, 0.0, static_cast<double>(counts_[i] - 1));
    const auto k = std::min(static_cast<std::size_t>(s), static_cast<std::size_t>(counts_[i] - 2));
    base[i] = k;
    frac[i] = s - static_cast<double>(k);
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_max_);
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t bit = (corner >> (d - 1 - i)) & 1U;
      w *= bit ? frac[i] : 1.0 - frac[i];
      flat = flat * static_cast<std::size_t>(counts_[i]) + base[i] + bit;
    }
    if (w != 0.0) out += w * values_[flat];
  }
  return SpectralField(out);
}

Trajectory integrate_reduced(const SpectralField& p0, const SimConfig& cfg, const Nonlinearity& nl,
                             const ManifoldEvaluator& manifold) {
  INERTIA_REQUIRE(p0.n_max() == nl.n_max() && manifold.n_max() == nl.n_max(),
                  "reduced state size does not match the nonlinearity");
  const int N = manifold.N();
  require_low(p0, N);
  SimConfig c = cfg;
  c.forcing = SpectralField();
  return integrate_semilinear(p0, c, [&](const SpectralField& p) {
    const SpectralField low = project_low(p, N);
    return project_low(nl.evaluate(low + manifold(low)).sum(), N);
  });
}

Trajectory lift(const Trajectory& reduced, const ManifoldEvaluator& manifold) {
  Trajectory out;
  out.times = reduced.times;
  out.states.reserve(reduced.states.size());
  for (const auto& p : reduced.states) {
    const SpectralField low = project_low(p, manifold.N());
    out.states.push_back(low + manifold(low));
  }
  return out;
}

Trajectory integrate_full(const SpectralField& v0, const SimConfig& cfg, const Nonlinearity& nl) {
  INERTIA_REQUIRE(v0.n_max() == nl.n_max(), "initial state size does not match the nonlinearity");
  SimConfig c = cfg;
  c.forcing = SpectralField();
  return integrate_semilinear(v0, c, [&](const SpectralField& v) { return nl.evaluate(v).sum(); });
}

double graph_distance(const SpectralField& v, const ManifoldEvaluator& manifold) {
  const int N = manifold.N();
  return h1_norm(project_high(v, N) - manifold(project_low(v, N)));
}

nlohmann::json to_json(const TrackingReport& report) {
  nlohmann::json j;
  j["N"] = report.N;
  j["samples"] = report.times.size();
  j["fitted_alpha"] = report.fitted_alpha;
  j["fit_r2"] = report.fit_r2;
  j["fit_intercept"] = report.fit_intercept;
  j["initial_distance"] = report.graph_distances.empty() ? 0.0 : report.graph_distances.front();
  j["final_distance"] = report.graph_distances.empty() ? 0.0 : report.graph_distances.back();
  return j;
}

std::string tracking_csv(const TrackingReport& report) {
  std::string out = "t,distance\n";
  char buf[96];
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", report.times[i], report.graph_distances[i]);
    out += buf;
  }
  return out;
}

TrackingReport tracking_test(const SpectralField& v0, const SimConfig& cfg, const Nonlinearity& nl,
                             const ManifoldEvaluator& manifold) {
  const Trajectory traj = integrate_full(v0, cfg, nl);
  TrackingReport r;
  r.N = manifold.N();
  r.times = traj.times;
  r.graph_distances.reserve(traj.size());
  for (const auto& v : traj.states) r.graph_distances.push_back(graph_distance(v, manifold));

  std::vector<double> t, logd;
  for (std::size_t i = traj.size() / 2; i < traj.size(); ++i) {
    if (r.graph_distances[i] > 0.0) {
      t.push_back(r.times[i]);
      logd.push_back(std::log(r.graph_distances[i]));
    }
  }
  if (t.size() >= 2) {
    const LinearFit f = linear_fit(t, logd);
    r.fitted_alpha = -f.slope;
    r.fit_r2 = f.r2;
    r.fit_intercept = f.intercept;
  }
  return r;
}

}  // namespace inertia
