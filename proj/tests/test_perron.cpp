#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "inertia/diffeo.hpp"
#include "inertia/errors.hpp"
#include "inertia/gap.hpp"
#include "inertia/nonlinearity.hpp"
#include "inertia/perron.hpp"
#include "inertia/stats.hpp"

using namespace inertia;

namespace {

// Working-resolution Lipschitz estimate for K = 8, cut-off (0.6, 1.0).
constexpr double kL1 = 0.0311;
constexpr double kL2 = 0.6015;

TransformedBurgers burgers_nl() {
  TransformedConfig tc;
  tc.K = 8;
  tc.cut = {0.6, 1.0};
  tc.forcing = SpectralField::mode(64, 1, 0.2);
  return TransformedBurgers(64, tc);
}

// Largest singular value of h_n -> n T_theta h_n between the weighted L2
// and weighted H1 norms, for a single mode, by power iteration on the
// explicit matrix assembled column by column from hat sources.
double mode_operator_norm(int n, const PerronConfig& cfg, int n_max) {
  const int m = cfg.steps() + 1;
  WeightedTrajectory h = WeightedTrajectory::zeros(n_max, cfg);
  Eigen::MatrixXd A(m, m);
  for (int j = 0; j < m; ++j) {
    h.states.setZero();
    h.states(n - 1, j) = 1.0;
    const WeightedTrajectory v = apply_T_theta(h, cfg);
    for (int i = 0; i < m; ++i) {
      A(i, j) = n * std::exp(cfg.theta * (h.time(i) - h.time(j))) * v.states(n - 1, i);
    }
  }
  Eigen::VectorXd x = Eigen::VectorXd::Ones(m).normalized();
  double sigma = 0.0;
  for (int it = 0; it < 500; ++it) {
    const Eigen::VectorXd y = A.transpose() * (A * x);
    const double next = std::sqrt(y.norm());
    x = y.normalized();
    if (std::abs(next - sigma) < 1e-12 * next) break;
    sigma = next;
  }
  return sigma;
}

}  // namespace

TEST_CASE("PerronConfig") {
  SUBCASE("make picks the midpoint and a long enough horizon") {
    const PerronConfig cfg = PerronConfig::make(2, 1e-2, 1e-9);
    CHECK(cfg.theta == 6.5);
    CHECK(std::exp(-(9.0 - 6.5) * cfg.T_horizon) < 1e-9);
    CHECK_NOTHROW(cfg.validate());
  }
  SUBCASE("theta outside the window") {
    PerronConfig cfg = PerronConfig::make(1, 1e-2);
    cfg.theta = 4.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
  SUBCASE("horizon too short for the tolerance") {
    PerronConfig cfg = PerronConfig::make(1, 1e-2);
    cfg.T_horizon = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
  SUBCASE("contraction bound") {
    PerronConfig cfg = PerronConfig::make(1, 1e-2, 1e-9, 2.5);
    CHECK_FALSE(cfg.contraction_bound().has_value());
    cfg.L1 = 0.1;
    cfg.L2 = 0.3;
    CHECK(*cfg.contraction_bound() == doctest::Approx((2.0 * 0.1 + 0.3) / 1.5));
  }
}

TEST_CASE("solution operator") {
  const PerronConfig cfg = PerronConfig::make(1, 1e-2, 1e-9, 2.5);

  SUBCASE("zero source") {
    const WeightedTrajectory v = apply_T_theta(WeightedTrajectory::zeros(8, cfg), cfg);
    CHECK(v.states.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("constant source") {
    WeightedTrajectory h = WeightedTrajectory::zeros(8, cfg);
    for (int n = 1; n <= 8; ++n) h.states.row(n - 1).setConstant(1.0 / n);
    const WeightedTrajectory v = apply_T_theta(h, cfg);
    // Past the left boundary layer e^{-lambda_2 (t + T)} the bounded branch
    // has settled; the low mode is pinned to zero at t = 0.
    for (int j = v.steps() / 2; j <= v.steps(); ++j) {
      const double t = v.time(j);
      for (int n = 2; n <= 8; ++n) {
        const double exact = 1.0 / (n * eigenvalue(n));
        CHECK(std::abs(v.states(n - 1, j) - exact) < 1e-6 * exact);
      }
      CHECK(std::abs(v.states(0, j) - (1.0 - std::exp(-t))) < 1e-9 * std::max(1.0, std::exp(-t)));
    }
  }
  SUBCASE("the two source channels add") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    WeightedTrajectory a = WeightedTrajectory::zeros(6, cfg), b = a;
    for (int j = 0; j <= cfg.steps(); ++j) {
      for (int n = 0; n < 6; ++n) {
        a.states(n, j) = nd(rng);
        b.states(n, j) = nd(rng);
      }
    }
    WeightedTrajectory sum = a;
    sum.states += b.states;
    const WeightedTrajectory lhs = apply_T_theta(a, b, cfg);
    const WeightedTrajectory rhs = apply_T_theta(sum, cfg);
    CHECK((lhs.states - rhs.states).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("grid mismatch") {
    const PerronConfig other = PerronConfig::make(1, 2e-2, 1e-9, 2.5);
    CHECK_THROWS_AS(apply_T_theta(WeightedTrajectory::zeros(4, other), cfg), ValidationError);
  }
  SUBCASE("weighted operator norm from an L2 source into H1") {
    const double bound = std::sqrt(eigenvalue(2)) / std::min(2.5 - 1.0, 4.0 - 2.5);
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) worst = std::max(worst, mode_operator_norm(n, cfg, 3));
    CAPTURE(worst);
    CHECK(worst <= 1.05 * bound);
    CHECK(worst >= 0.9 * bound);
  }
}

TEST_CASE("homogeneous trajectories") {
  const PerronConfig cfg = PerronConfig::make(2, 1e-2, 1e-9);
  SpectralField p = SpectralField::zeros(8);
  p[1] = 1.0;
  p[2] = -0.5;
  const WeightedTrajectory h = homogeneous(p, cfg);
  CHECK(h.final_state().c == p.c);
  const int j = h.steps() - 100;  // t = -1
  CHECK(h.time(j) == doctest::Approx(-1.0));
  CHECK(h.states(0, j) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(h.states(0, j) == doctest::Approx(2.71828).epsilon(1e-5));
  CHECK(h.states(1, j) == doctest::Approx(-0.5 * std::exp(4.0)).epsilon(1e-14));
  CHECK(h.states.bottomRows(6).cwiseAbs().maxCoeff() == 0.0);
  CHECK(homogeneous(SpectralField::zeros(8), cfg).states.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(homogeneous(SpectralField::mode(8, 3), cfg), ValidationError);
}

TEST_CASE("manifold points with known answers") {
  const PerronConfig cfg = PerronConfig::make(2, 1e-2, 1e-12);
  SpectralField p = SpectralField::zeros(16);
  p[1] = 0.4;
  p[2] = -0.2;

  SUBCASE("zero nonlinearity gives the flat manifold") {
    const ManifoldPoint m = solve_manifold_point(p, cfg, ZeroNonlinearity(16));
    CHECK(m.value.c.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("constant nonlinearity gives g_n / lambda_n") {
    SpectralField g = SpectralField::zeros(16);
    for (int n = 1; n <= 16; ++n) g[n] = std::pow(-1.0, n) / n;
    const ManifoldPoint m = solve_manifold_point(p, cfg, ConstantNonlinearity(g));
    CHECK(m.value[1] == 0.0);
    CHECK(m.value[2] == 0.0);
    for (int n = 3; n <= 16; ++n) CHECK(std::abs(m.value[n] - g[n] / eigenvalue(n)) < 1e-8);
  }
  SUBCASE("max_iter exhaustion is reported") {
    PerronConfig few = PerronConfig::make(1, 1e-2, 1e-14, 2.5);
    few.max_iter = 1;
    CHECK_THROWS_AS(solve_manifold_point(SpectralField::mode(64, 1, -0.3), few, burgers_nl()), NumericalError);
  }
}

TEST_CASE("transformed Burgers manifold") {
  const GapPlan plan = find_sequence(1, kL1, kL2, square_eigenvalue, 100);
  REQUIRE(plan.N_seq == std::vector<int>{1});
  const TransformedBurgers nl = burgers_nl();
  const PerronConfig cfg = PerronConfig::from_plan(plan, 1, 5e-3, 1e-12);
  const SpectralField p = SpectralField::mode(64, 1, -0.3);
  const ManifoldPoint m = solve_manifold_point(p, cfg, nl);

  SUBCASE("contraction ratios stay below one and the Lipschitz bound") {
    REQUIRE(m.report.bound.has_value());
    CHECK(*m.report.bound < 1.0);
    REQUIRE(m.report.ratios.size() >= 3);
    for (const double r : m.report.ratios) {
      CHECK(r < 1.0);
      CHECK(r <= 1.1 * *m.report.bound);
    }
  }
  SUBCASE("values live in Q_N") {
    CHECK(m.value[1] == 0.0);
    CHECK(h1_norm(m.value) > 0.0);
  }
  SUBCASE("doubling the horizon changes nothing beyond the tolerance") {
    PerronConfig longer = cfg;
    longer.T_horizon *= 2.0;
    CHECK(h1_norm(solve_manifold_point(p, longer, nl).value - m.value) < 10.0 * cfg.fp_tol);
  }
  SUBCASE("second-order convergence in dt") {
    std::vector<SpectralField> vals;
    for (const double dt : {2e-2, 1e-2, 5e-3}) {
      vals.push_back(solve_manifold_point(p, PerronConfig::from_plan(plan, 1, dt, 1e-12), nl).value);
    }
    const double d1 = h1_norm(vals[0] - vals[1]);
    const double d2 = h1_norm(vals[1] - vals[2]);
    CAPTURE(d1);
    CAPTURE(d2);
    CHECK(std::log2(d1 / d2) >= 2.0);
  }
  SUBCASE("sampled Lipschitz ratios of M stay below k / (1 - k)") {
    const double k = *m.report.bound;
    std::vector<double> ratios;
    for (const double a : {-0.4, -0.1, 0.15}) {
      const SpectralField pa = SpectralField::mode(64, 1, a);
      const SpectralField pb = SpectralField::mode(64, 1, a + 0.05);
      ratios.push_back(h1_norm(solve_manifold_point(pa, cfg, nl).value - solve_manifold_point(pb, cfg, nl).value) /
                       h1_norm(pa - pb));
    }
    for (const double r : ratios) {
      CHECK(std::isfinite(r));
      CHECK(r <= k / (1.0 - k));
    }
  }
  SUBCASE("warm start reaches the same point") {
    const ManifoldPoint warm = solve_manifold_point(p, cfg, nl, &m.trajectory);
    CHECK(h1_norm(warm.value - m.value) < 10.0 * cfg.fp_tol);
    CHECK(warm.report.iterations <= 2);
  }
}
