// Time integration of u_t - nu u_xx = N(u) in the sine basis.
//
// The stiff diagonal part -nu n^2 is integrated exactly per mode
// (exponential time differencing); IMEX Crank-Nicolson/Adams-Bashforth is
// available as an independent cross-check.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "inertia/spectral.hpp"

namespace inertia {

class TransformedBurgers;

enum class Scheme { etdrk2, imex_cnab };

struct SimConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  double nu = 1.0;
  // Empty means g = 0.
  SpectralField forcing;
  Scheme scheme = Scheme::etdrk2;
  // Test hook: drop the convective term and keep only the forcing.
  bool nonlinear = true;
  // Store every k-th state (the initial and final states are always stored).
  int save_every = 1;
  double blowup_threshold = 1e6;

  void validate() const;
  int steps() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;

  const SpectralField& final_state() const { return states.back(); }
  std::size_t size() const { return times.size(); }
};

using Rhs = std::function<SpectralField(const SpectralField&)>;

// Integrates u' = -nu n^2 u + rhs(u) from u0 over [0, cfg.t_end].
Trajectory integrate_semilinear(const SpectralField& u0, const SimConfig& cfg, const Rhs& rhs);

// Burgers convection plus forcing: u u_x + g (dealiased).
SpectralField burgers_rhs(const SpectralField& u, const SpectralField& forcing);

// S(t) u0 for u_t - u_xx = u u_x + g.
Trajectory integrate_burgers(const SpectralField& u0, const SimConfig& cfg);

// Cut-off transformed system v_t - v_xx = I1(v) + I2(v). The forcing of the
// nonlinearity is used; cfg.forcing is ignored.
Trajectory integrate_transformed(const SpectralField& v0, const SimConfig& cfg,
                                 const TransformedBurgers& nonlinearity);

struct AbsorbingOptions {
  double t_end = 10.0;
  double dt = 1e-2;
  // Initial data are drawn with H1 norm uniform in [0, initial_radius].
  double initial_radius = 5.0;
  double safety = 1.5;
};

// max over sampled initial data of max_{t in [T/2, T]} |u(t)|_{H1_0}, times
// the safety factor.
double estimate_absorbing_radius(const SpectralField& forcing, int samples, std::uint64_t seed,
                                 const AbsorbingOptions& options = {});

}  // namespace inertia
