#include "inertia/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "inertia/errors.hpp"

namespace inertia {

namespace {

const double kBasisScale = std::sqrt(2.0 / kPi);

std::shared_ptr<const SineTables> tables_for(const SpectralField& u, const Grid& g) {
  return SineTables::get(u.n_max(), g.size());
}

}  // namespace

Grid::Grid(int m) : m_(m) {
  INERTIA_REQUIRE(m >= 1, "grid size must be positive");
  points_.resize(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) points_[static_cast<std::size_t>(j)] = (j + 1) * kPi / (m + 1);
}

Grid Grid::for_modes(int n_max) { return Grid(3 * n_max - 1); }

SpectralField SpectralField::mode(int n_max, int k, double amplitude) {
  INERTIA_REQUIRE(k >= 1 && k <= n_max, "mode index out of range");
  SpectralField f = zeros(n_max);
  f[k] = amplitude;
  return f;
}

SineTables::SineTables(int n_max, int m)
    : n_max_(n_max),
      m_(m),
      grid_(m),
      values_(m, n_max),
      derivatives_(m, n_max),
      antiderivatives_(m, n_max),
      analysis_(n_max, m) {
  INERTIA_REQUIRE(n_max >= 1, "n_max must be positive");
  INERTIA_REQUIRE(m >= n_max, "grid too small for requested n_max");
  const double weight = kPi / (m + 1);
  for (int n = 1; n <= n_max; ++n) {
    for (int j = 0; j < m; ++j) {
      const double x = grid_.point(j);
      const double s = std::sin(n * x);
      const double c = std::cos(n * x);
      values_(j, n - 1) = kBasisScale * s;
      derivatives_(j, n - 1) = kBasisScale * n * c;
      // 1 - cos(nx) = 2 sin^2(nx/2) avoids cancellation near x = 0.
      const double half = std::sin(0.5 * n * x);
      antiderivatives_(j, n - 1) = kBasisScale * 2.0 * half * half / n;
      analysis_(n - 1, j) = weight * kBasisScale * s;
    }
  }
}

std::shared_ptr<const SineTables> SineTables::get(int n_max, int m) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const SineTables>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{n_max, m}];
  if (!slot) slot = std::make_shared<const SineTables>(n_max, m);
  return slot;
}

SpectralField to_modes(const PhysField& f, const Grid& g, int n_max) {
  INERTIA_REQUIRE(f.size() == g.size(), "field length does not match grid size");
  INERTIA_REQUIRE(g.size() >= n_max,
                  "grid too small for requested n_max (" + std::to_string(g.size()) + " < " +
                      std::to_string(n_max) + ")");
  const auto tables = SineTables::get(n_max, g.size());
  return SpectralField(tables->analysis() * f.values);
}

PhysField to_phys(const SpectralField& u, const Grid& g) {
  const auto tables = tables_for(u, g);
  return PhysField{tables->values() * u.c};
}

PhysField derivative_values(const SpectralField& u, const Grid& g) {
  const auto tables = tables_for(u, g);
  return PhysField{tables->derivatives() * u.c};
}

SpectralField project_low(const SpectralField& u, int N) {
  INERTIA_REQUIRE(N >= 1 && N <= u.n_max(), "projection order N out of range [1, n_max]");
  SpectralField out = u;
  out.c.tail(u.n_max() - N).setZero();
  return out;
}

SpectralField project_high(const SpectralField& u, int N) {
  INERTIA_REQUIRE(N >= 1 && N <= u.n_max(), "projection order N out of range [1, n_max]");
  SpectralField out = u;
  out.c.head(N).setZero();
  return out;
}

SpectralField second_derivative(const SpectralField& u) {
  SpectralField out = u;
  for (int n = 1; n <= u.n_max(); ++n) out[n] *= -eigenvalue(n);
  return out;
}

SpectralField dealiased_product(const SpectralField& u, const SpectralField& v, Factor second) {
  INERTIA_REQUIRE(u.n_max() == v.n_max(), "product operands must share n_max");
  const Grid g = Grid::for_modes(u.n_max());
  const auto tables = tables_for(u, g);
  const Eigen::VectorXd ug = tables->values() * u.c;
  const Eigen::VectorXd vg =
      second == Factor::value ? Eigen::VectorXd(tables->values() * v.c)
                              : Eigen::VectorXd(tables->derivatives() * v.c);
  return SpectralField(tables->analysis() * ug.cwiseProduct(vg));
}

double l2_inner(const SpectralField& u, const SpectralField& v) { return u.c.dot(v.c); }

double h1_inner(const SpectralField& u, const SpectralField& v) {
  double s = 0.0;
  for (int n = 1; n <= u.n_max(); ++n) s += eigenvalue(n) * u[n] * v[n];
  return s;
}

double l2_norm(const SpectralField& u) { return u.c.norm(); }

double h1_norm(const SpectralField& u) { return std::sqrt(h1_inner(u, u)); }

}  // namespace inertia
