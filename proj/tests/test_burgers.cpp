#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "inertia/burgers.hpp"
#include "inertia/diffeo.hpp"
#include "inertia/errors.hpp"
#include "inertia/random_fields.hpp"
#include "inertia/stats.hpp"
#include "oracles.hpp"

using namespace inertia;

namespace {

SpectralField smooth_field(std::uint64_t seed, double h1) {
  std::mt19937_64 rng(seed);
  return FieldSampler{64, Spectrum::smooth, 4.0}.draw(rng, h1);
}

}  // namespace

TEST_CASE("zero data and zero forcing stay zero") {
  SimConfig cfg;
  cfg.t_end = 0.1;
  const Trajectory tr = integrate_burgers(SpectralField::zeros(64), cfg);
  for (const auto& s : tr.states) CHECK(s.c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear part is integrated exactly") {
  SimConfig cfg;
  cfg.nonlinear = false;
  cfg.t_end = 1.0;
  cfg.save_every = 100;
  const Trajectory tr = integrate_burgers(SpectralField::mode(64, 1), cfg);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(std::abs(tr.states[k][1] - std::exp(-tr.times[k])) < 1e-8);
  }
  CHECK(tr.times.back() == doctest::Approx(1.0));
}

TEST_CASE("energy law residual converges at second order") {
  const SpectralField u0 = smooth_field(21, 2.0);
  std::vector<double> dts{4e-3, 2e-3, 1e-3}, res;
  for (const double dt : dts) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 0.2;
    res.push_back(oracle::energy_residual(integrate_burgers(u0, cfg), dts[0]));
  }
  CHECK(res[1] < res[0]);
  CHECK(res[2] < res[1]);
  CHECK(loglog_slope(dts, res) >= 2.0);
}

TEST_CASE("unforced energy decreases and the convection term is L2-orthogonal to u") {
  SimConfig cfg;
  cfg.t_end = 0.5;
  const Trajectory tr = integrate_burgers(smooth_field(4, 3.0), cfg);
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    CHECK(l2_norm(tr.states[k + 1]) <= l2_norm(tr.states[k]) + 1e-10);
    const SpectralField& u = tr.states[k];
    CHECK(std::abs(l2_inner(dealiased_product(u, u, Factor::derivative), u)) < 1e-10);
  }
}

TEST_CASE("self-convergence of both schemes") {
  const SpectralField u0 = smooth_field(9, 2.0);
  const SpectralField g = SpectralField::mode(64, 1, 0.5);
  for (const Scheme scheme : {Scheme::etdrk2, Scheme::imex_cnab}) {
    auto run = [&](double dt) {
      SimConfig cfg;
      cfg.dt = dt;
      cfg.t_end = 0.5;
      cfg.forcing = g;
      cfg.scheme = scheme;
      return integrate_burgers(u0, cfg).final_state();
    };
    const SpectralField ref = run(1.25e-4);
    std::vector<double> dts{4e-3, 2e-3, 1e-3}, err;
    for (const double dt : dts) err.push_back(h1_norm(run(dt) - ref));
    CAPTURE(static_cast<int>(scheme));
    CHECK(loglog_slope(dts, err) >= 1.9);
  }
}

TEST_CASE("the two schemes agree") {
  SimConfig a;
  a.t_end = 0.5;
  a.forcing = SpectralField::mode(64, 2, 0.3);
  SimConfig b = a;
  b.scheme = Scheme::imex_cnab;
  b.dt = 2.5e-4;
  const SpectralField u0 = smooth_field(2, 1.5);
  CHECK(h1_norm(integrate_burgers(u0, a).final_state() - integrate_burgers(u0, b).final_state()) < 1e-5);
}

TEST_CASE("invalid configs and blow-up") {
  SimConfig cfg;
  cfg.dt = -1.0;
  CHECK_THROWS_AS(integrate_burgers(SpectralField::mode(8, 1), cfg), ValidationError);
  cfg.dt = 1e-3;
  cfg.blowup_threshold = 0.5;
  CHECK_THROWS_AS(integrate_burgers(SpectralField::mode(8, 1, 2.0), cfg), NumericalError);
}

TEST_CASE("transformed system") {
  TransformedConfig tc;
  tc.K = 8;
  tc.cut = {0.6, 1.0};
  tc.forcing = SpectralField::mode(64, 1, 0.2);
  const TransformedBurgers nl(64, tc);

  SUBCASE("outside the cut-off ball the flow is heat decay") {
    SpectralField v0 = SpectralField::mode(64, 1, 3.0);
    v0[2] = 0.5;
    SimConfig cfg;
    cfg.t_end = 0.5;
    cfg.save_every = 50;
    const Trajectory tr = integrate_transformed(v0, cfg, nl);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double t = tr.times[k];
      CHECK(std::abs(tr.states[k][1] - 3.0 * std::exp(-t)) < 1e-8);
      CHECK(std::abs(tr.states[k][2] - 0.5 * std::exp(-4.0 * t)) < 1e-8);
    }
  }

  SUBCASE("zero data with zero forcing stays zero") {
    TransformedConfig z = tc;
    z.forcing = SpectralField::zeros(64);
    SimConfig cfg;
    cfg.t_end = 0.1;
    const Trajectory tr = integrate_transformed(SpectralField::zeros(64), cfg, TransformedBurgers(64, z));
    for (const auto& s : tr.states) CHECK(s.c.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("mapping back reproduces the Burgers solution") {
    const SpectralField u0 = smooth_field(5, 0.3);
    SimConfig cfg;
    cfg.t_end = 1.0;
    cfg.save_every = 100;
    cfg.forcing = tc.forcing;
    const Trajectory u = integrate_burgers(u0, cfg);
    const Trajectory v = integrate_transformed(inverse_map(u0, tc.K), cfg, nl);
    REQUIRE(u.size() == v.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
      CHECK(h1_norm(v.states[k]) < tc.cut.r);
      CHECK(h1_norm(forward_map(v.states[k], tc.K) - u.states[k]) < 1e-4);
    }
  }
}

TEST_CASE("absorbing radius estimate") {
  AbsorbingOptions opt;
  opt.t_end = 10.0;
  SUBCASE("unforced trajectories decay") {
    CHECK(estimate_absorbing_radius(SpectralField::zeros(32), 5, 1, opt) <= 0.1);
  }
  SUBCASE("forced estimate is positive, reproducible and monotone in samples") {
    const SpectralField g = SpectralField::mode(32, 1);
    const double r4 = estimate_absorbing_radius(g, 4, 7, opt);
    CHECK(r4 > 0.0);
    CHECK(std::isfinite(r4));
    CHECK(estimate_absorbing_radius(g, 4, 7, opt) == r4);
    CHECK(estimate_absorbing_radius(g, 8, 7, opt) >= r4);
  }
}
