// Sine-eigenbasis representation of fields on (0, pi) with Dirichlet
// boundary conditions.
//
// A SpectralField stores coefficients c_1..c_Nmax against the L2-orthonormal
// eigenfunctions e_n(x) = sqrt(2/pi) sin(n x) of -d^2/dx^2, whose eigenvalues
// are lambda_n = n^2. In this normalization
//   |u|_{L2}^2 = sum c_n^2,   |u|_{H1_0}^2 = sum n^2 c_n^2.
// Physical-space work happens on the interior collocation grid
// x_j = j pi / (m + 1), j = 1..m, where the discrete sine transform (DST-I)
// is exact for band-limited data with n <= m.
#pragma once

#include <Eigen/Dense>

#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace inertia {

constexpr double kPi = std::numbers::pi;

inline double eigenvalue(int n) { return static_cast<double>(n) * n; }

class Grid {
 public:
  explicit Grid(int m);

  // Smallest grid that removes quadratic aliasing for n_max modes with room
  // to spare: m = 3 n_max - 1 (191 for the default 64 modes).
  static Grid for_modes(int n_max);

  int size() const { return m_; }
  double point(int j) const { return points_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& points() const { return points_; }

 private:
  int m_;
  std::vector<double> points_;
};

struct SpectralField {
  Eigen::VectorXd c;

  SpectralField() = default;
  explicit SpectralField(Eigen::VectorXd coeffs) : c(std::move(coeffs)) {}

  static SpectralField zeros(int n_max) { return SpectralField(Eigen::VectorXd::Zero(n_max)); }
  // Unit coefficient on mode k (1-based).
  static SpectralField mode(int n_max, int k, double amplitude = 1.0);

  int n_max() const { return static_cast<int>(c.size()); }
  // 1-based coefficient access matching the e_n numbering.
  double operator[](int n) const { return c[n - 1]; }
  double& operator[](int n) { return c[n - 1]; }

  bool all_finite() const { return c.allFinite(); }

  SpectralField& operator+=(const SpectralField& o) { c += o.c; return *this; }
  SpectralField& operator-=(const SpectralField& o) { c -= o.c; return *this; }
  SpectralField& operator*=(double s) { c *= s; return *this; }
};

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double s, SpectralField a) { return a *= s; }
inline SpectralField operator*(SpectralField a, double s) { return a *= s; }

struct PhysField {
  Eigen::VectorXd values;

  int size() const { return static_cast<int>(values.size()); }
  bool all_finite() const { return values.allFinite(); }
};

// Precomputed transform tables for a (n_max, m) pair. Instances are immutable
// and shared; get() caches them process-wide.
class SineTables {
 public:
  SineTables(int n_max, int m);

  static std::shared_ptr<const SineTables> get(int n_max, int m);

  int n_max() const { return n_max_; }
  int grid_size() const { return m_; }
  const Grid& grid() const { return grid_; }

  // Column-major m x n_max: e_n(x_j).
  const Eigen::MatrixXd& values() const { return values_; }
  // Column-major m x n_max: e_n'(x_j) = sqrt(2/pi) n cos(n x_j).
  const Eigen::MatrixXd& derivatives() const { return derivatives_; }
  // Column-major m x n_max: int_0^{x_j} e_n = sqrt(2/pi) (1 - cos(n x_j)) / n.
  const Eigen::MatrixXd& antiderivatives() const { return antiderivatives_; }
  // Column-major n_max x m: discrete analysis weights pi/(m+1) e_n(x_j).
  const Eigen::MatrixXd& analysis() const { return analysis_; }

 private:
  int n_max_;
  int m_;
  Grid grid_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd derivatives_;
  Eigen::MatrixXd antiderivatives_;
  Eigen::MatrixXd analysis_;
};

// Discrete sine analysis of grid samples onto the first n_max modes.
SpectralField to_modes(const PhysField& f, const Grid& g, int n_max);
// Pointwise synthesis sum c_n e_n(x_j).
PhysField to_phys(const SpectralField& u, const Grid& g);
// Grid values of du/dx.
PhysField derivative_values(const SpectralField& u, const Grid& g);

// Coefficients with index > N (resp. <= N) zeroed. Requires 1 <= N <= n_max.
SpectralField project_low(const SpectralField& u, int N);
SpectralField project_high(const SpectralField& u, int N);

// Diagonal second derivative: (u_xx)_n = -n^2 u_n.
SpectralField second_derivative(const SpectralField& u);

enum class Factor { value, derivative };

// Sine coefficients of u * v (or u * dv/dx) computed on a 3/2-padded grid and
// truncated to n_max. The advective form u * v_x of two sine series is again a
// sine series and is resolved exactly; u * v is even about x = 0 and only its
// L2 projection is returned.
SpectralField dealiased_product(const SpectralField& u, const SpectralField& v,
                                Factor second = Factor::value);

double l2_inner(const SpectralField& u, const SpectralField& v);
double h1_inner(const SpectralField& u, const SpectralField& v);
double l2_norm(const SpectralField& u);
double h1_norm(const SpectralField& u);

// Low-level kernels shared with the templated nonlinearity code. They operate
// on contiguous arrays so that dual-number scalars can pass through.
namespace kernels {

// out_j = sum_n table(j, n) c_n for n < count.
template <class T>
void synthesize(const Eigen::MatrixXd& table, std::span<const T> c, int count, std::span<T> out) {
  const auto m = static_cast<std::size_t>(table.rows());
  for (std::size_t j = 0; j < m; ++j) out[j] = T(0.0);
  for (int n = 0; n < count; ++n) {
    const T cn = c[static_cast<std::size_t>(n)];
    const double* col = table.data() + static_cast<std::size_t>(n) * m;
    for (std::size_t j = 0; j < m; ++j) out[j] += col[j] * cn;
  }
}

// out_n = sum_j analysis(n, j) f_j for n < count.
template <class T>
void analyze(const Eigen::MatrixXd& analysis, std::span<const T> f, int count, std::span<T> out) {
  const auto rows = static_cast<std::size_t>(analysis.rows());
  const auto m = static_cast<std::size_t>(analysis.cols());
  for (int n = 0; n < count; ++n) out[static_cast<std::size_t>(n)] = T(0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const T fj = f[j];
    const double* col = analysis.data() + j * rows;
    for (int n = 0; n < count; ++n) out[static_cast<std::size_t>(n)] += col[n] * fj;
  }
}

}  // namespace kernels

}  // namespace inertia
