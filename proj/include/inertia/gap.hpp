// Spectral gap algebra for two-channel nonlinearities.
//
// For a sequence N_1 < ... < N_n the gap condition reads
//   lambda_{N_i+1} - lambda_{N_i} > (i-1) lambda_{N_{i-1}}
//                                   + (i+1) lambda_{N_i+1}^{1/2} L1 + (i+1) L2
// with lambda_{N_0} = 0. The weights used by the jet solvers are
//   theta_i = lambda_{N_i} + gamma + lambda_{N_i+1}^{1/2} L1 + L2,
//   gamma   = min_i margin_i / (i+1).
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"

namespace inertia {

using EigenvalueFn = std::function<double(int)>;

// lambda_N = N^2, the Dirichlet Laplacian on (0, pi).
double square_eigenvalue(int N);

struct GapPlan {
  int n = 0;
  double L1 = 0.0;
  double L2 = 0.0;
  std::vector<int> N_seq;
  double gamma = 0.0;
  std::vector<double> theta_seq;
  // LHS - RHS of the gap condition per i; all positive for a valid plan.
  std::vector<double> margins;
  // Diagnostics: max over j < i of slack * (theta_i + j theta_{i-1}) / lambda_{N_i+1}
  // (< 1 means the slack-inflated weight still fits the window) and the
  // contraction quotients (lambda^{1/2} L1 + L2) / (gamma + lambda^{1/2} L1 + L2).
  double window_slack = 1.01;
  std::vector<double> slack_ratios;
  std::vector<double> contraction_quotients;

  // Exponent theta_i + j theta_{i-1} for 1-based i (theta_0 = 0).
  double weight(int i, int j) const;
  double lambda(int N) const { return eigen(N); }

  EigenvalueFn eigen = square_eigenvalue;
};

nlohmann::json to_json(const GapPlan& plan);

// Computes gamma and theta and validates every invariant; throws
// ValidationError naming the failing index and its margin.
GapPlan make_plan(int n, double L1, double L2, const std::vector<int>& N_seq,
                  const EigenvalueFn& lambda = square_eigenvalue, double window_slack = 1.01);

enum class GapCondition {
  // The gap condition above; every returned plan passes make_plan.
  theorem,
  // Per-index split form (gap - (n-1) lambda_{N_{i-1}}) / (2 (n+1) lambda^{1/2}) > L1 and
  // (gap - (n-1) lambda_{N_{i-1}}) / (2 (n+1)) > L2, which implies the above.
  strong,
};

// Greedy scan: N_1 is the smallest admissible index >= min_index, then the
// smallest admissible N_2 > N_1, and so on. Smaller predecessors only make
// later conditions easier, so this is also the lexicographic minimum.
// Throws NumericalError when no sequence exists below N_cap.
GapPlan find_sequence(int n, double L1, double L2, const EigenvalueFn& lambda, int N_cap,
                      GapCondition condition = GapCondition::theorem, int min_index = 1);

// Margin of the selected condition at index i for the pair (N_prev, N).
double gap_margin(GapCondition condition, int n, int i, double L1, double L2, int N_prev, int N,
                  const EigenvalueFn& lambda);

enum class ScanMode {
  // Return N only if the condition holds at every index from N up to N_cap.
  persistent,
  // Return the first N at which the condition holds.
  first,
};

// (lambda_{N+1} - n lambda_N) / (lambda_{N+1}^{1/2} + lambda_N^{1/2}) > C L.
std::optional<int> check_classical(int n, double L, const EigenvalueFn& lambda, int N_cap,
                                   double C = 1.0, ScanMode mode = ScanMode::persistent);

// (lambda_{N_i+1} - lambda_{N_i} - C1 lambda_{N_{i-1}}) / (lambda_{N_i+1}^{1/2} + lambda_{N_i}^{1/2})
//   > C2 L for i = 1..n, found greedily.
std::optional<std::vector<int>> check_kz(int n, double L, const EigenvalueFn& lambda, int N_cap,
                                         double C1 = 1.0, double C2 = 1.0);

}  // namespace inertia
