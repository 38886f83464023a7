#include "inertia/gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "inertia/errors.hpp"

namespace inertia {

namespace {

double eigen_at(const EigenvalueFn& lambda, int N) { return N == 0 ? 0.0 : lambda(N); }

void require_params(int n, double L1, double L2) {
  INERTIA_REQUIRE(n >= 1, "smoothness order n must be at least 1");
  INERTIA_REQUIRE(std::isfinite(L1) && L1 >= 0.0, "L1 must be finite and non-negative");
  INERTIA_REQUIRE(std::isfinite(L2) && L2 >= 0.0, "L2 must be finite and non-negative");
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

double square_eigenvalue(int N) { return static_cast<double>(N) * N; }

double GapPlan::weight(int i, int j) const {
  const double prev = i >= 2 ? theta_seq[static_cast<std::size_t>(i - 2)] : 0.0;
  return theta_seq[static_cast<std::size_t>(i - 1)] + j * prev;
}

nlohmann::json to_json(const GapPlan& plan) {
  nlohmann::json j;
  j["n"] = plan.n;
  j["L1"] = plan.L1;
  j["L2"] = plan.L2;
  j["N_seq"] = plan.N_seq;
  j["gamma"] = plan.gamma;
  j["theta_seq"] = plan.theta_seq;
  j["margins"] = plan.margins;
  j["window_slack"] = plan.window_slack;
  j["slack_ratios"] = plan.slack_ratios;
  j["contraction_quotients"] = plan.contraction_quotients;
  return j;
}

double gap_margin(GapCondition condition, int n, int i, double L1, double L2, int N_prev, int N,
                  const EigenvalueFn& lambda) {
  const double gap = lambda(N + 1) - lambda(N);
  const double root = std::sqrt(lambda(N + 1));
  const double prev = eigen_at(lambda, N_prev);
  if (condition == GapCondition::theorem) {
    return gap - ((i - 1) * prev + (i + 1) * root * L1 + (i + 1) * L2);
  }
  const double reduced = gap - (n - 1) * prev;
  const double m1 = reduced / (2.0 * root * (n + 1)) - L1;
  const double m2 = reduced / (2.0 * (n + 1)) - L2;
  return std::min(m1, m2);
}

GapPlan make_plan(int n, double L1, double L2, const std::vector<int>& N_seq,
                  const EigenvalueFn& lambda, double window_slack) {
  require_params(n, L1, L2);
  INERTIA_REQUIRE(static_cast<int>(N_seq.size()) == n, "N_seq must have exactly n entries");
  INERTIA_REQUIRE(N_seq.front() >= 1, "N_seq entries must be positive");
  for (std::size_t k = 1; k < N_seq.size(); ++k) {
    INERTIA_REQUIRE(N_seq[k] > N_seq[k - 1], "N_seq must be strictly increasing");
  }
  INERTIA_REQUIRE(window_slack >= 1.0, "window slack must be at least 1");

  GapPlan plan;
  plan.n = n;
  plan.L1 = L1;
  plan.L2 = L2;
  plan.N_seq = N_seq;
  plan.eigen = lambda;
  plan.window_slack = window_slack;

  plan.gamma = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= n; ++i) {
    const int N = N_seq[static_cast<std::size_t>(i - 1)];
    const int N_prev = i >= 2 ? N_seq[static_cast<std::size_t>(i - 2)] : 0;
    const double margin = gap_margin(GapCondition::theorem, n, i, L1, L2, N_prev, N, lambda);
    plan.margins.push_back(margin);
    if (!(margin > 0.0)) {
      throw ValidationError("gap condition violated at i = " + std::to_string(i) + " (N_i = " +
                            std::to_string(N) + "): margin " + format_double(margin));
    }
    plan.gamma = std::min(plan.gamma, margin / (i + 1));
  }

  for (int i = 1; i <= n; ++i) {
    const int N = N_seq[static_cast<std::size_t>(i - 1)];
    const double coupling = std::sqrt(lambda(N + 1)) * L1 + L2;
    plan.theta_seq.push_back(lambda(N) + plan.gamma + coupling);
    plan.contraction_quotients.push_back(coupling / (plan.gamma + coupling));
  }

  for (int i = 1; i <= n; ++i) {
    const int N = N_seq[static_cast<std::size_t>(i - 1)];
    const double lo = lambda(N);
    const double hi = lambda(N + 1);
    double worst = 0.0;
    for (int j = 0; j <= std::max(0, i - 1); ++j) {
      const double w = plan.weight(i, j);
      if (!(w > lo && w < hi)) {
        throw ValidationError("weight theta_" + std::to_string(i) + " + " + std::to_string(j) +
                              " theta_" + std::to_string(i - 1) + " = " + format_double(w) +
                              " leaves the window (" + format_double(lo) + ", " +
                              format_double(hi) + ")");
      }
      worst = std::max(worst, window_slack * w / hi);
    }
    plan.slack_ratios.push_back(worst);
  }
  return plan;
}

GapPlan find_sequence(int n, double L1, double L2, const EigenvalueFn& lambda, int N_cap,
                      GapCondition condition, int min_index) {
  require_params(n, L1, L2);
  INERTIA_REQUIRE(N_cap >= 1, "N_cap must be positive");
  INERTIA_REQUIRE(min_index >= 1, "min_index must be positive");
  std::vector<int> seq;
  int prev = 0;
  for (int i = 1; i <= n; ++i) {
    int found = 0;
    for (int N = std::max(prev + 1, min_index); N <= N_cap; ++N) {
      if (gap_margin(condition, n, i, L1, L2, prev, N, lambda) > 0.0) {
        found = N;
        break;
      }
    }
    if (found == 0) {
      throw NumericalError("no sequence satisfies the gap condition up to N_cap = " +
                           std::to_string(N_cap) + " (stuck at i = " + std::to_string(i) +
                           "); increase K to shrink L1 or raise N_cap");
    }
    seq.push_back(found);
    prev = found;
  }
  return make_plan(n, L1, L2, seq, lambda);
}

std::optional<int> check_classical(int n, double L, const EigenvalueFn& lambda, int N_cap, double C,
                                   ScanMode mode) {
  INERTIA_REQUIRE(n >= 1, "smoothness order n must be at least 1");
  INERTIA_REQUIRE(std::isfinite(L) && L >= 0.0, "L must be finite and non-negative");
  INERTIA_REQUIRE(N_cap >= 1, "N_cap must be positive");
  auto holds = [&](int N) {
    const double lhs = (lambda(N + 1) - n * lambda(N)) /
                       (std::sqrt(lambda(N + 1)) + std::sqrt(lambda(N)));
    return lhs > C * L;
  };
  if (mode == ScanMode::first) {
    for (int N = 1; N <= N_cap; ++N) {
      if (holds(N)) return N;
    }
    return std::nullopt;
  }
  // Scan downward: the answer is the start of the run of valid indices
  // that reaches N_cap.
  std::optional<int> start;
  for (int N = N_cap; N >= 1 && holds(N); --N) start = N;
  return start;
}

std::optional<std::vector<int>> check_kz(int n, double L, const EigenvalueFn& lambda, int N_cap,
                                         double C1, double C2) {
  INERTIA_REQUIRE(n >= 1, "smoothness order n must be at least 1");
  INERTIA_REQUIRE(std::isfinite(L) && L >= 0.0, "L must be finite and non-negative");
  INERTIA_REQUIRE(N_cap >= 1, "N_cap must be positive");
  std::vector<int> seq;
  int prev = 0;
  for (int i = 1; i <= n; ++i) {
    int found = 0;
    for (int N = prev + 1; N <= N_cap; ++N) {
      const double lhs = (lambda(N + 1) - lambda(N) - C1 * eigen_at(lambda, prev)) /
                         (std::sqrt(lambda(N + 1)) + std::sqrt(lambda(N)));
      if (lhs > C2 * L) {
        found = N;
        break;
      }
    }
    if (found == 0) return std::nullopt;
    seq.push_back(found);
    prev = found;
  }
  return seq;
}

}  // namespace inertia
