#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "inertia/errors.hpp"
#include "inertia/gap.hpp"
#include "oracles.hpp"

using namespace inertia;

namespace {

bool feasible(int n, double L1, double L2, int N_cap) {
  try {
    find_sequence(n, L1, L2, square_eigenvalue, N_cap);
    return true;
  } catch (const NumericalError&) {
    return false;
  }
}

// (lambda_{N+1} - lambda_N - lambda_{N_prev}) / (lambda_{N+1}^{1/2} + lambda_N^{1/2}) > L,
// written out for lambda = N^2.
bool kz_holds(double L, int N_prev, int N) {
  return (2.0 * N + 1.0 - static_cast<double>(N_prev) * N_prev) / (2.0 * N + 1.0) > L;
}

}  // namespace

TEST_CASE("make_plan") {
  SUBCASE("n = 1, L1 = 0.1, L2 = 1, N_1 = 1") {
    const GapPlan plan = make_plan(1, 0.1, 1.0, {1});
    CHECK(plan.margins[0] == doctest::Approx(3.0 - 2.4));
    CHECK(plan.gamma == doctest::Approx(0.3));
    CHECK(plan.theta_seq[0] == doctest::Approx(1.0 + 0.3 + 2.0 * 0.1 + 1.0));
    CHECK(plan.theta_seq[0] > 1.0);
    CHECK(plan.theta_seq[0] < 4.0);
  }
  SUBCASE("zero Lipschitz constants") {
    for (const int N : {1, 2, 5, 30}) {
      const GapPlan plan = make_plan(1, 0.0, 0.0, {N});
      CHECK(plan.gamma == doctest::Approx((2.0 * N + 1.0) / 2.0));
      CHECK(plan.theta_seq[0] == doctest::Approx(N * N + plan.gamma));
    }
  }
  SUBCASE("violated condition reports index and margin") {
    std::string msg;
    try {
      make_plan(1, 0.1, 10.0, {1});
    } catch (const ValidationError& e) {
      msg = e.what();
    }
    CAPTURE(msg);
    CHECK(msg.find("-17.4") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
  SUBCASE("sequence must increase") {
    CHECK_THROWS_AS(make_plan(2, 0.0, 0.0, {3, 3}), ValidationError);
    CHECK_THROWS_AS(make_plan(2, 0.0, 0.0, {1}), ValidationError);
  }
  SUBCASE("weights") {
    const GapPlan plan = make_plan(2, 0.0311, 0.6015, {1, 2});
    CHECK(plan.weight(1, 0) == plan.theta_seq[0]);
    CHECK(plan.weight(2, 1) == doctest::Approx(plan.theta_seq[1] + plan.theta_seq[0]));
    for (int i = 1; i <= 2; ++i) {
      for (int j = 0; j < i; ++j) CHECK(plan.weight(i, j) < square_eigenvalue(plan.N_seq[i - 1] + 1));
    }
  }
}

TEST_CASE("find_sequence") {
  SUBCASE("n = 1, L1 = 0.1, L2 = 1") {
    CHECK(find_sequence(1, 0.1, 1.0, square_eigenvalue, 100).N_seq == std::vector<int>{1});
  }
  SUBCASE("n = 3, L1 = 0.05, L2 = 2 matches the exhaustive search") {
    const GapPlan plan = find_sequence(3, 0.05, 2.0, square_eigenvalue, 500);
    const auto ref = oracle::exhaustive_sequence(3, 0.05, 2.0, 500);
    REQUIRE(ref.has_value());
    CHECK(plan.N_seq == *ref);
    const GapPlan again = make_plan(3, 0.05, 2.0, plan.N_seq);
    CHECK(again.gamma == plan.gamma);
    CHECK(again.theta_seq == plan.theta_seq);
  }
  SUBCASE("agrees with the exhaustive search on a grid") {
    for (const int n : {1, 2, 3}) {
      for (const double L1 : {0.0, 0.03, 0.1, 0.3}) {
        for (const double L2 : {0.0, 0.5, 1.0, 3.0}) {
          const auto ref = oracle::exhaustive_sequence(n, L1, L2, 60);
          CAPTURE(n);
          CAPTURE(L1);
          CAPTURE(L2);
          if (ref) {
            CHECK(find_sequence(n, L1, L2, square_eigenvalue, 60).N_seq == *ref);
          } else {
            CHECK_FALSE(feasible(n, L1, L2, 60));
          }
        }
      }
    }
  }
  SUBCASE("infeasible") {
    CHECK_THROWS_AS(find_sequence(1, 0.1, 1e6, square_eigenvalue, 100), NumericalError);
  }
  SUBCASE("returned plans carry contraction quotients below one") {
    for (const double L2 : {0.1, 0.6, 2.0}) {
      const GapPlan plan = find_sequence(2, 0.05, L2, square_eigenvalue, 200);
      for (const double q : plan.contraction_quotients) CHECK(q < 1.0);
      for (const double m : plan.margins) CHECK(m > 0.0);
    }
  }
  SUBCASE("larger Lipschitz constants never restore feasibility") {
    const std::vector<double> grid{0.0, 0.1, 0.3, 1.0, 3.0, 10.0};
    for (const int n : {1, 2, 3}) {
      for (std::size_t a = 0; a < grid.size(); ++a) {
        for (std::size_t b = 0; b < grid.size(); ++b) {
          if (feasible(n, grid[a], grid[b], 40)) continue;
          for (std::size_t a2 = a; a2 < grid.size(); ++a2) {
            for (std::size_t b2 = b; b2 < grid.size(); ++b2) CHECK_FALSE(feasible(n, grid[a2], grid[b2], 40));
          }
        }
      }
    }
  }
  SUBCASE("the strong form implies the theorem form") {
    for (const double L2 : {0.1, 0.5, 1.0}) {
      const GapPlan plan = find_sequence(2, 0.05, L2, square_eigenvalue, 200, GapCondition::strong);
      CHECK_NOTHROW(make_plan(2, 0.05, L2, plan.N_seq));
    }
  }
}

TEST_CASE("classical and kz conditions") {
  SUBCASE("n = 2 with square eigenvalues is never persistently satisfied") {
    for (const double L : {1e-6, 1e-3, 0.1, 1.0}) CHECK_FALSE(check_classical(2, L, square_eigenvalue, 10000).has_value());
  }
  SUBCASE("n = 1, L = 0") {
    CHECK(check_classical(1, 0.0, square_eigenvalue, 100) == 1);
  }
  SUBCASE("the literal first-hit scan") {
    CHECK(check_classical(2, 0.1, square_eigenvalue, 100, 1.0, ScanMode::first) == 1);
  }
  SUBCASE("kz feasibility agrees with brute force for n = 2") {
    for (const double L : {0.0, 0.05, 0.2, 0.5, 0.8, 0.95, 1.0}) {
      bool brute = false;
      for (int N1 = 1; N1 <= 60 && !brute; ++N1) {
        if (!kz_holds(L, 0, N1)) continue;
        for (int N2 = N1 + 1; N2 <= 60 && !brute; ++N2) brute = kz_holds(L, N1, N2);
      }
      CAPTURE(L);
      CHECK(check_kz(2, L, square_eigenvalue, 60).has_value() == brute);
    }
  }
}
