#include "inertia/burgers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "inertia/diffeo.hpp"
#include "inertia/errors.hpp"
#include "inertia/random_fields.hpp"

namespace inertia {

namespace {

// phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2 with Taylor series
// near zero, where the closed forms cancel catastrophically.
double phi1(double z) {
  if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return std::expm1(z) / z;
}

double phi2(double z) {
  if (std::abs(z) < 1e-3) return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
  return (std::expm1(z) - z) / (z * z);
}

void check_state(const SpectralField& u, double t, double threshold) {
  const double norm = h1_norm(u);
  if (!u.all_finite() || !(norm <= threshold)) {
    throw NumericalError("blow-up detected at t = " + std::to_string(t) +
                         ": H1 norm exceeds " + std::to_string(threshold));
  }
}

}  // namespace

void SimConfig::validate() const {
  INERTIA_REQUIRE(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  INERTIA_REQUIRE(std::isfinite(t_end) && t_end >= 0.0, "t_end must be non-negative");
  INERTIA_REQUIRE(std::isfinite(nu) && nu > 0.0, "nu must be positive");
  INERTIA_REQUIRE(save_every >= 1, "save_every must be at least 1");
  INERTIA_REQUIRE(blowup_threshold > 0.0, "blowup_threshold must be positive");
  INERTIA_REQUIRE(forcing.n_max() == 0 || forcing.all_finite(), "forcing must be finite");
}

int SimConfig::steps() const { return static_cast<int>(std::llround(t_end / dt)); }

Trajectory integrate_semilinear(const SpectralField& u0, const SimConfig& cfg, const Rhs& rhs) {
  cfg.validate();
  INERTIA_REQUIRE(u0.n_max() >= 1 && u0.all_finite(), "initial state must be finite");
  const int n_max = u0.n_max();
  const int steps = cfg.steps();
  const double h = cfg.dt;

  Eigen::VectorXd e(n_max), p1(n_max), p2(n_max), cn_plus(n_max), cn_minus(n_max);
  for (int n = 1; n <= n_max; ++n) {
    const double z = -cfg.nu * eigenvalue(n) * h;
    e[n - 1] = std::exp(z);
    p1[n - 1] = h * phi1(z);
    p2[n - 1] = h * phi2(z);
    cn_plus[n - 1] = 1.0 - 0.5 * z;
    cn_minus[n - 1] = 1.0 + 0.5 * z;
  }

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(u0);

  SpectralField u = u0;
  SpectralField n_prev;
  for (int k = 0; k < steps; ++k) {
    const SpectralField n_u = rhs(u);
    SpectralField next;
    if (cfg.scheme == Scheme::etdrk2 || k == 0) {
      SpectralField star(e.cwiseProduct(u.c) + p1.cwiseProduct(n_u.c));
      const SpectralField n_star = rhs(star);
      next = SpectralField(star.c + p2.cwiseProduct(n_star.c - n_u.c));
    } else {
      // Crank-Nicolson on the diagonal part, Adams-Bashforth on the rest.
      const Eigen::VectorXd explicit_part = 1.5 * n_u.c - 0.5 * n_prev.c;
      next = SpectralField(
          (cn_minus.cwiseProduct(u.c) + h * explicit_part).cwiseQuotient(cn_plus));
    }
    n_prev = n_u;
    u = std::move(next);
    const double t = (k + 1) * h;
    check_state(u, t, cfg.blowup_threshold);
    if ((k + 1) % cfg.save_every == 0 || k + 1 == steps) {
      traj.times.push_back(t);
      traj.states.push_back(u);
    }
  }
  return traj;
}

SpectralField burgers_rhs(const SpectralField& u, const SpectralField& forcing) {
  SpectralField out = dealiased_product(u, u, Factor::derivative);
  if (forcing.n_max() > 0) {
    INERTIA_REQUIRE(forcing.n_max() == u.n_max(), "forcing size does not match state");
    out += forcing;
  }
  return out;
}

Trajectory integrate_burgers(const SpectralField& u0, const SimConfig& cfg) {
  const SpectralField g = cfg.forcing;
  if (cfg.nonlinear) {
    return integrate_semilinear(u0, cfg, [&g](const SpectralField& u) { return burgers_rhs(u, g); });
  }
  return integrate_semilinear(u0, cfg, [&g](const SpectralField& u) {
    return g.n_max() > 0 ? g : SpectralField::zeros(u.n_max());
  });
}

Trajectory integrate_transformed(const SpectralField& v0, const SimConfig& cfg,
                                 const TransformedBurgers& nonlinearity) {
  INERTIA_REQUIRE(v0.n_max() == nonlinearity.n_max(), "state size does not match nonlinearity");
  return integrate_semilinear(v0, cfg, [&nonlinearity](const SpectralField& v) {
    return nonlinearity.evaluate(v).sum();
  });
}

double estimate_absorbing_radius(const SpectralField& forcing, int samples, std::uint64_t seed,
                                 const AbsorbingOptions& options) {
  INERTIA_REQUIRE(samples >= 1, "samples must be at least 1");
  INERTIA_REQUIRE(forcing.n_max() >= 1, "forcing must have at least one mode");
  INERTIA_REQUIRE(options.t_end > 0.0 && options.dt > 0.0, "absorbing horizon and step must be positive");
  SimConfig cfg;
  cfg.dt = options.dt;
  cfg.t_end = options.t_end;
  cfg.forcing = forcing;

  std::mt19937_64 rng(seed);
  FieldSampler sampler;
  sampler.n_max = forcing.n_max();
  double radius = 0.0;
  for (int s = 0; s < samples; ++s) {
    const SpectralField u0 = sampler.draw_in_ball(rng, options.initial_radius);
    const Trajectory traj = integrate_burgers(u0, cfg);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (traj.times[k] >= 0.5 * options.t_end) radius = std::max(radius, h1_norm(traj.states[k]));
    }
  }
  return options.safety * radius;
}

}  // namespace inertia
