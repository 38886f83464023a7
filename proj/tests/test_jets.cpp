#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "inertia/diffeo.hpp"
#include "inertia/errors.hpp"
#include "inertia/gap.hpp"
#include "inertia/jets.hpp"
#include "inertia/nonlinearity.hpp"
#include "inertia/stats.hpp"

using namespace inertia;

namespace {

constexpr int kModes = 64;
constexpr double kL1 = 0.0311;
constexpr double kL2 = 0.6015;

TransformedBurgers burgers_nl() {
  TransformedConfig tc;
  tc.K = 8;
  tc.cut = {0.6, 1.0};
  tc.forcing = SpectralField::mode(kModes, 1, 0.2);
  return TransformedBurgers(kModes, tc);
}

SpectralField e(int n, double s = 1.0) { return SpectralField::mode(kModes, n, s); }

// Weak linear coupling B(n, m) = c / (n + m).
LinearNonlinearity coupling(double c) {
  Eigen::MatrixXd B(kModes, kModes);
  for (int n = 0; n < kModes; ++n) {
    for (int m = 0; m < kModes; ++m) B(n, m) = c / (n + m + 2.0);
  }
  return LinearNonlinearity(B);
}

// Analytic chart over one coordinate: M(p) = (sin 3p, p^2 / 2, cos p).
Eigen::VectorXd toy_chart(const Eigen::VectorXd& p) {
  return Eigen::Vector3d(std::sin(3.0 * p[0]), 0.5 * p[0] * p[0], std::cos(p[0]));
}

JetSample toy_sample(double s) {
  JetSample j;
  j.p = Eigen::VectorXd::Constant(1, s);
  j.value = toy_chart(j.p);
  j.jet1 = Eigen::MatrixXd(3, 1);
  j.jet1 << 3.0 * std::cos(3.0 * s), s, -std::sin(s);
  return j;
}

}  // namespace

TEST_CASE("solver setup") {
  const TransformedBurgers nl = burgers_nl();
  const JetSolver solver(make_plan(2, kL1, kL2, {1, 2}), nl);
  CHECK(solver.top_level() == 2);
  CHECK(solver.N(1) == 1);
  CHECK(solver.N(2) == 2);
  CHECK(solver.level(1).theta == doctest::Approx(solver.plan().theta_seq[0]));
  CHECK(solver.second_order().theta == doctest::Approx(solver.plan().weight(2, 1)));
  CHECK(solver.second_order().N == 2);
  CHECK(solver.level(1).steps() == solver.level(2).steps());
}

TEST_CASE("zero nonlinearity has flat jets") {
  const ZeroNonlinearity nl(kModes);
  const JetSolver solver(make_plan(2, 0.0, 0.0, {1, 2}), nl);
  const ChartBase b = solver.base(e(1, 0.4));
  CHECK(h1_norm(project_high(b.state, 1)) == 0.0);
  CHECK(h1_norm(solver.first_jet(b, e(1), 1).value) == 0.0);
  CHECK(h1_norm(solver.second_jet(b, e(1), e(1)).value) == 0.0);
  const ChartBase b1 = solver.base(e(1, 0.5));
  for (const double r : solver.compatibility_residuals(b, b1)) CHECK(r < 1e-14);
}

TEST_CASE("linear nonlinearity") {
  const LinearNonlinearity nl = coupling(0.2);
  const JetSolver solver(make_plan(2, kL1, kL2, {1, 2}), nl);
  const ChartBase b0 = solver.base(e(1, 0.0));
  const ChartBase b1 = solver.base(e(1, 0.7));

  SUBCASE("the manifold is a linear graph") {
    const SpectralField d1 = solver.first_jet(b0, e(1), 1).value;
    CHECK(h1_norm(project_high(b1.state, 1) - 0.7 * d1) < 1e-10);
    CHECK(h1_norm(solver.first_jet(b1, e(1), 1).value - d1) < 1e-10);
  }
  SUBCASE("second jets vanish") {
    CHECK(h1_norm(solver.second_jet(b1, e(1), e(1)).value) < 1e-12);
  }
}

TEST_CASE("transformed Burgers jets") {
  const TransformedBurgers nl = burgers_nl();
  const JetSolver solver(make_plan(2, kL1, kL2, {1, 2}), nl);
  const ChartBase b = solver.base(e(1, -0.3));
  const SpectralField m1 = project_high(b.state, 1);

  SUBCASE("first jets are linear in the direction") {
    const SpectralField a = solver.first_jet(b, e(1), 2).value;
    const SpectralField c = solver.first_jet(b, e(2), 2).value;
    const SpectralField ac = solver.first_jet(b, e(1, 2.0) + e(2, -0.5), 2).value;
    CHECK(h1_norm(ac - (2.0 * a - 0.5 * c)) <= 1e-9 * h1_norm(ac));
  }
  SUBCASE("first jet matches re-solved manifold points") {
    const SpectralField j1 = solver.first_jet(b, e(1), 1).value;
    std::vector<double> hs{1e-1, 1e-2, 1e-3}, rs;
    for (const double h : hs) {
      rs.push_back(h1_norm(solver.manifold(b.coords + h * e(1), 1).value - m1 - h * j1));
    }
    CAPTURE(rs[0]);
    CAPTURE(rs[2]);
    CHECK(loglog_slope(hs, rs) >= 1.5);
  }
  SUBCASE("second jet matches re-solved points along the tangent lift") {
    const SpectralField z = solver.tangent_lift(b, e(1));
    CHECK(z[1] == 1.0);
    const DirectionJets dz = solver.direction_jets(b, z);
    const SpectralField j2 = solver.second_jet(b, dz, dz).value;
    const SpectralField q = project_low(b.state, 2);
    const SpectralField m2 = project_high(b.state, 2);
    std::vector<double> hs{1e-1, 3e-2, 1e-2}, rs;
    for (const double h : hs) {
      rs.push_back(h1_norm(solver.manifold(q + h * z, 2).value - m2 - h * dz.w.value - 0.5 * h * h * j2));
    }
    CHECK(loglog_slope(hs, rs) >= 2.5);
  }
  SUBCASE("second jet is symmetric") {
    const SpectralField a = solver.second_jet(b, e(1), e(2)).value;
    const SpectralField c = solver.second_jet(b, e(2), e(1)).value;
    CHECK(h1_norm(a - c) <= 1e-9);
    CHECK(h1_norm(a) > 0.0);
  }
  SUBCASE("compatibility residuals vanish at p1 = p") {
    for (const double r : solver.compatibility_residuals(b, b)) CHECK(r < 1e-13);
  }
  SUBCASE("bundle") {
    const JetBundle jb = solver.bundle(b);
    CHECK(jb.N == 2);
    CHECK(jb.jet1.cols() == 2);
    REQUIRE(jb.jet2.size() == 2);
    CHECK((jb.jet2[0].col(1) - jb.jet2[1].col(0)).norm() < 1e-9);
    CHECK(jb.theta_weights.size() == 3);
    CHECK(jb.theta_weights[2] == doctest::Approx(jb.theta_weights[0] + jb.theta_weights[1]));
  }
}

TEST_CASE("order-0 compatibility is the first-order Taylor remainder for n = 1") {
  const TransformedBurgers nl = burgers_nl();
  const JetSolver solver(find_sequence(1, kL1, kL2, square_eigenvalue, 100), nl);
  REQUIRE(solver.top_level() == 1);
  const ChartBase b = solver.base(e(1, -0.3));
  const SpectralField j1 = solver.first_jet(b, e(1), 1).value;
  for (const double h : {1e-1, 3e-2}) {
    const double compat = solver.compatibility_residual(b, solver.base(b.coords + h * e(1)), 0);
    const double fd = h1_norm(solver.manifold(b.coords + h * e(1), 1).value - project_high(b.state, 1) - h * j1);
    CHECK(compat <= 2.0 * fd);
    CHECK(compat >= 0.5 * fd);
  }
  CHECK_THROWS_AS(solver.compatibility_residual(b, b, 2), ValidationError);
  CHECK_THROWS_AS(solver.second_jet(b, e(1), e(1)), ValidationError);
}

TEST_CASE("mollifier") {
  for (const int dim : {1, 2}) {
    for (const double radius : {0.2, 0.01}) {
      CHECK(std::abs(mollifier_mass(dim, radius, radius / 40.0) - 1.0) < 1e-8);
    }
  }
  CHECK(bump_kernel(1, Eigen::VectorXd::Constant(1, 1.0)) == 0.0);
  CHECK(bump_kernel(2, Eigen::Vector2d(0.8, 0.8)) == 0.0);
  CHECK(bump_kernel(1, Eigen::VectorXd::Zero(1)) > bump_kernel(1, Eigen::VectorXd::Constant(1, 0.5)));
  CHECK_THROWS_AS(bump_kernel(3, Eigen::VectorXd::Zero(3)), ValidationError);
  CHECK(ExtensionConfig{0.1, 1, 2}.mollifier_radius() == doctest::Approx(0.01));
}

TEST_CASE("blend extension on an analytic chart") {
  auto chart = [](double spacing) {
    const int count = static_cast<int>(std::lround(2.0 / spacing)) + 1;
    return sample_chart(1, {-1.0}, {spacing}, {count}, {1.0}, toy_chart);
  };
  const std::vector<JetSample> base{toy_sample(-0.3), toy_sample(0.2)};

  SUBCASE("under-sampled charts are rejected") {
    CHECK_THROWS_AS(BlendExtension(chart(0.1), base, ExtensionConfig{0.1, 1, 1}), ValidationError);
    CHECK_THROWS_AS(BlendExtension(chart(0.01), {}, ExtensionConfig{0.1, 1, 1}), ValidationError);
  }
  SUBCASE("exact on the base set, mollified far from it") {
    const BlendExtension ext(chart(0.005), base, ExtensionConfig{0.1, 1, 1});
    for (const auto& s : base) {
      CHECK(ext.rho(s.p) == 0.0);
      CHECK((ext(s.p) - s.value).norm() < 1e-14);
    }
    const Eigen::VectorXd far = Eigen::VectorXd::Constant(1, 0.7);
    CHECK(ext.rho(far) == 1.0);
    CHECK((ext(far) - ext.mollified(far)).norm() == 0.0);
    CHECK(ext.distance_to_base(far) == doctest::Approx(0.5));
    CHECK(ext.supported(far));
    CHECK_FALSE(ext.supported(Eigen::VectorXd::Constant(1, 0.97)));
  }
  SUBCASE("deviation shrinks with mu") {
    double prev = 1e300;
    for (const double mu : {0.2, 0.1, 0.05}) {
      const BlendExtension ext(chart(0.005), base, ExtensionConfig{mu, 1, 1});
      const BlendDeviation d = blend_deviation(ext, {-0.7}, {0.6});
      CHECK(d.nodes > 0);
      CHECK(d.sup < prev);
      prev = d.sup;
    }
  }
}
