#include "inertia/diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>

#include "inertia/dual.hpp"
#include "inertia/errors.hpp"

namespace inertia {

namespace {

const double kBasisScale = std::sqrt(2.0 / kPi);

template <class T>
bool finite_scalar(const T& x) {
  return std::isfinite(max_component(x));
}

template <class T>
void throw_nonconvergence(const char* what, int K, int iters) {
  throw NumericalError(std::string("solve_a: ") + what + " after " + std::to_string(iters) +
                       " iterations (K = " + std::to_string(K) +
                       " is likely below K0 for this field)");
}

// a = exp(-1/2 S c) on the grid for coefficients c.
template <class T>
void a_from_coeffs(const SineTables& tb, int K, const std::vector<T>& ck, std::vector<T>& expo,
                   std::vector<T>& a) {
  using std::exp;
  kernels::synthesize<T>(tb.antiderivatives(), ck, K, expo);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = exp(-0.5 * expo[j]);
}

// Solves L x = b in place by Gaussian elimination with partial pivoting on
// the real parts. M is row-major K x K.
template <class T>
bool dense_solve(std::vector<T>& M, std::vector<T>& b, int K) {
  const auto k = static_cast<std::size_t>(K);
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(real_part(M[r * k + col])) > std::abs(real_part(M[piv * k + col]))) piv = r;
    }
    if (real_part(M[piv * k + col]) == 0.0) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(M[col * k + c], M[piv * k + c]);
      std::swap(b[col], b[piv]);
    }
    const T inv = 1.0 / M[col * k + col];
    for (std::size_t r = col + 1; r < k; ++r) {
      const T f = M[r * k + col] * inv;
      if (real_part(f) == 0.0 && max_component(f) == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) M[r * k + c] -= f * M[col * k + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = k; i-- > 0;) {
    T s = b[i];
    for (std::size_t c = i + 1; c < k; ++c) s -= M[i * k + c] * b[c];
    b[i] = s / M[i * k + i];
  }
  return true;
}

// Fixed point a = exp(-1/2 S P_K(a v)) on the grid, S the mode
// antiderivative table. On return `a` holds the solution and `ck` the first
// K coefficients of a v. Returns the number of iterations. Convergence is
// measured over every dual component so derivative parts converge too,
// relative to the largest component once that exceeds 1.
template <class T>
int solve_a_grid(const SineTables& tb, int K, std::span<const T> vg, const PicardOptions& opt,
                 std::vector<T>& a, std::vector<T>& ck) {
  const std::size_t m = static_cast<std::size_t>(tb.grid_size());
  const auto k = static_cast<std::size_t>(K);
  a.assign(m, T(1.0));
  ck.assign(k, T(0.0));
  std::vector<T> prod(m), expo(m), next(m);

  if (opt.method == ASolver::picard) {
    for (int it = 1; it <= opt.max_iter; ++it) {
      for (std::size_t j = 0; j < m; ++j) prod[j] = a[j] * vg[j];
      kernels::analyze<T>(tb.analysis(), prod, K, ck);
      a_from_coeffs<T>(tb, K, ck, expo, next);
      double delta = 0.0, scale = 1.0;
      for (std::size_t j = 0; j < m; ++j) {
        delta = std::max(delta, max_component(next[j] - a[j]));
        scale = std::max(scale, max_component(next[j]));
      }
      a.swap(next);
      if (!std::isfinite(delta)) throw_nonconvergence<T>("Picard iterate became non-finite", K, it);
      if (delta < opt.tol * scale) {
        for (std::size_t j = 0; j < m; ++j) prod[j] = a[j] * vg[j];
        kernels::analyze<T>(tb.analysis(), prod, K, ck);
        return it;
      }
    }
    throw_nonconvergence<T>("Picard iteration did not converge", K, opt.max_iter);
  }

  // Newton on G(c) = c - A (a(c) v), A the analysis table. The Jacobian is
  // I + 1/2 A diag(a v) S.
  const Eigen::MatrixXd& A = tb.analysis();
  const Eigen::MatrixXd& S = tb.antiderivatives();
  std::vector<T> residual(k), jac(k * k), weighted(m);
  auto eval_residual = [&](const std::vector<T>& c, std::vector<T>& a_out, std::vector<T>& r) {
    a_from_coeffs<T>(tb, K, c, expo, a_out);
    for (std::size_t j = 0; j < m; ++j) prod[j] = a_out[j] * vg[j];
    kernels::analyze<T>(A, prod, K, r);
    for (std::size_t i = 0; i < k; ++i) r[i] = c[i] - r[i];
  };
  auto residual_norm = [&](const std::vector<T>& r) {
    double s = 0.0;
    for (const T& x : r) s = std::max(s, std::abs(real_part(x)));
    return s;
  };

  eval_residual(ck, a, residual);
  std::vector<T> trial_c(k), trial_a(m), trial_r(k);
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (std::size_t j = 0; j < m; ++j) weighted[j] = 0.5 * a[j] * vg[j];
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) jac[r * k + c] = T(r == c ? 1.0 : 0.0);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const T wj = weighted[j];
      for (std::size_t r = 0; r < k; ++r) {
        const T arw = A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) * wj;
        for (std::size_t c = 0; c < k; ++c) {
          jac[r * k + c] += arw * S(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
        }
      }
    }
    std::vector<T> step = residual;
    if (!dense_solve<T>(jac, step, K)) throw_nonconvergence<T>("singular Newton Jacobian", K, it);

    // Backtracking on the real residual keeps early iterates from
    // overshooting. Near round-off the residual stops decreasing
    // monotonically, so full steps are taken there.
    const double r0 = residual_norm(residual);
    double alpha = 1.0;
    for (int bt = 0;; ++bt) {
      for (std::size_t i = 0; i < k; ++i) trial_c[i] = ck[i] - alpha * step[i];
      eval_residual(trial_c, trial_a, trial_r);
      const double r1 = residual_norm(trial_r);
      if (r0 <= 1e-12 || bt == 30 || (std::isfinite(r1) && r1 <= (1.0 - 1e-4 * alpha) * r0)) break;
      alpha *= 0.5;
    }
    double delta = 0.0, scale = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      delta = std::max(delta, max_component(trial_a[j] - a[j]));
      scale = std::max(scale, max_component(trial_a[j]));
    }
    ck.swap(trial_c);
    a.swap(trial_a);
    residual.swap(trial_r);
    if (!std::isfinite(delta)) throw_nonconvergence<T>("Newton iterate became non-finite", K, it);
    if (delta < opt.tol * scale && alpha == 1.0) {
      // Return the coefficients consistent with the final a.
      for (std::size_t j = 0; j < m; ++j) prod[j] = a[j] * vg[j];
      kernels::analyze<T>(A, prod, K, ck);
      return it;
    }
  }
  throw_nonconvergence<T>("Newton iteration did not converge", K, opt.max_iter);
  return 0;
}

void require_K(int K, int n_max) {
  INERTIA_REQUIRE(K >= 1, "K must be at least 1");
  INERTIA_REQUIRE(K <= n_max, "K must not exceed n_max");
}

struct KernelContext {
  const SineTables& tb;
  int n_max;
  int K;
  const CutoffConfig* cut;  // null: no cut-off
  const std::vector<double>& forcing;
  const std::vector<double>& forcing_grid;
  PicardOptions picard;
  TimeDerivativeConvention convention;
};

// (I1, I2) coefficients, optionally multiplied by the cut-off weight.
// Written once over the scalar type so that Dual instantiations give exact
// first and second directional derivatives.
template <class T>
void transformed_kernel(const KernelContext& ctx, std::span<const T> v, std::vector<T>& i1,
                        std::vector<T>& i2) {
  const int n_max = ctx.n_max;
  const int K = ctx.K;
  const std::size_t m = static_cast<std::size_t>(ctx.tb.grid_size());
  i1.assign(static_cast<std::size_t>(n_max), T(0.0));
  i2.assign(static_cast<std::size_t>(n_max), T(0.0));

  T phi(1.0);
  if (ctx.cut != nullptr) {
    T z(0.0);
    for (int n = 1; n <= n_max; ++n) z += eigenvalue(n) * (v[n - 1] * v[n - 1]);
    const double R2 = ctx.cut->R_big * ctx.cut->R_big;
    if (real_part(z) >= R2) return;
    phi = cutoff_weight(z, *ctx.cut);
  }

  std::vector<T> vg(m), vxg(m);
  kernels::synthesize<T>(ctx.tb.values(), v, n_max, vg);
  kernels::synthesize<T>(ctx.tb.derivatives(), v, n_max, vxg);

  std::vector<T> a, ck;
  solve_a_grid<T>(ctx.tb, K, vg, ctx.picard, a, ck);

  // P_K u and its derivative on the grid (u = a v).
  std::vector<T> pk(m), dpk(m);
  kernels::synthesize<T>(ctx.tb.values(), ck, K, pk);
  kernels::synthesize<T>(ctx.tb.derivatives(), ck, K, dpk);

  std::vector<T> u(m), ax(m), axx(m), conv(m), r1(m);
  for (std::size_t j = 0; j < m; ++j) {
    u[j] = a[j] * vg[j];
    ax[j] = -0.5 * pk[j] * a[j];
    axx[j] = 0.25 * pk[j] * pk[j] * a[j] - 0.5 * dpk[j] * a[j];
    const T ux = ax[j] * vg[j] + a[j] * vxg[j];
    conv[j] = u[j] * ux;
    r1[j] = (u[j] - pk[j]) * vxg[j];
  }

  // P_K u_t = P_K(u_xx + u u_x + g), mode by mode.
  std::vector<T> ut(static_cast<std::size_t>(K));
  kernels::analyze<T>(ctx.tb.analysis(), conv, K, ut);
  for (int k = 1; k <= K; ++k) {
    auto& c = ut[static_cast<std::size_t>(k - 1)];
    c += ctx.forcing[static_cast<std::size_t>(k - 1)] - eigenvalue(k) * ck[static_cast<std::size_t>(k - 1)];
  }
  std::vector<T> jt(m);
  kernels::synthesize<T>(ctx.tb.antiderivatives(), ut, K, jt);

  std::vector<T> r2(m);
  for (std::size_t j = 0; j < m; ++j) {
    const T inv_a = 1.0 / a[j];
    // a_t / a for both conventions.
    const T at_over_a = ctx.convention == TimeDerivativeConvention::chain_rule
                            ? T(-0.5 * jt[j])
                            : T(0.5 * jt[j] * inv_a * inv_a);
    r2[j] = (axx[j] * inv_a - at_over_a + vg[j] * ax[j]) * vg[j] + ctx.forcing_grid[j] * inv_a;
  }

  kernels::analyze<T>(ctx.tb.analysis(), r1, n_max, i1);
  kernels::analyze<T>(ctx.tb.analysis(), r2, n_max, i2);
  if (ctx.cut != nullptr) {
    for (auto& x : i1) x = phi * x;
    for (auto& x : i2) x = phi * x;
  }
}

template <class T, class Extract>
NonlinearPair collect(const std::vector<T>& i1, const std::vector<T>& i2, Extract extract) {
  const int n = static_cast<int>(i1.size());
  NonlinearPair out{SpectralField::zeros(n), SpectralField::zeros(n)};
  for (int k = 0; k < n; ++k) {
    out.reducing.c[k] = extract(i1[static_cast<std::size_t>(k)]);
    out.preserving.c[k] = extract(i2[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace

void CutoffConfig::validate() const {
  INERTIA_REQUIRE(std::isfinite(r) && r > 0.0, "cut-off inner radius r must be positive");
  INERTIA_REQUIRE(std::isfinite(R_big) && R_big > r, "cut-off outer radius R_big must exceed r");
}

double DiffeoState::a(double x) const {
  double s = 0.0;
  for (int k = 1; k <= exponent_coeffs.size(); ++k) {
    const double half = std::sin(0.5 * k * x);
    s += exponent_coeffs[k - 1] * kBasisScale * 2.0 * half * half / k;
  }
  return std::exp(-0.5 * s);
}

double DiffeoState::b(double x) const { return 1.0 / a(x); }

DiffeoState solve_a(const SpectralField& v, int K, const PicardOptions& options) {
  require_K(K, v.n_max());
  INERTIA_REQUIRE(options.tol > 0.0, "Picard tolerance must be positive");
  INERTIA_REQUIRE(options.max_iter >= 1, "Picard max_iter must be at least 1");
  INERTIA_REQUIRE(v.all_finite(), "field must be finite");
  const Grid grid = Grid::for_modes(v.n_max());
  const auto tb = SineTables::get(v.n_max(), grid.size());
  const auto m = static_cast<std::size_t>(grid.size());

  std::vector<double> vg(m);
  kernels::synthesize<double>(tb->values(), std::span<const double>(v.c.data(), v.c.size()),
                              v.n_max(), vg);
  std::vector<double> a, ck;
  DiffeoState state;
  state.iterations = solve_a_grid<double>(*tb, K, vg, options, a, ck);
  state.K = K;
  state.base_field = v;
  state.exponent_coeffs = Eigen::Map<const Eigen::VectorXd>(ck.data(), K);

  std::vector<double> expo(m);
  kernels::synthesize<double>(tb->antiderivatives(), ck, K, expo);
  state.a_profile.values.resize(static_cast<Eigen::Index>(m));
  state.b_profile.values.resize(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    state.a_profile.values[i] = a[j];
    state.b_profile.values[i] = 1.0 / a[j];
    state.residual = std::max(state.residual, std::abs(a[j] - std::exp(-0.5 * expo[j])));
  }
  return state;
}

DiffeoState b_of_u(const SpectralField& u, int K) {
  require_K(K, u.n_max());
  INERTIA_REQUIRE(u.all_finite(), "field must be finite");
  const Grid grid = Grid::for_modes(u.n_max());
  const auto tb = SineTables::get(u.n_max(), grid.size());
  DiffeoState state;
  state.K = K;
  state.base_field = u;
  state.exponent_coeffs = u.c.head(K);
  const Eigen::VectorXd expo = tb->antiderivatives().leftCols(K) * state.exponent_coeffs;
  state.b_profile.values = (0.5 * expo).array().exp();
  state.a_profile.values = (-0.5 * expo).array().exp();
  return state;
}

SpectralField forward_map(const SpectralField& v, int K, const PicardOptions& options) {
  const DiffeoState st = solve_a(v, K, options);
  const Grid grid = Grid::for_modes(v.n_max());
  const PhysField vg = to_phys(v, grid);
  return to_modes(PhysField{st.a_profile.values.cwiseProduct(vg.values)}, grid, v.n_max());
}

SpectralField inverse_map(const SpectralField& u, int K) {
  const DiffeoState st = b_of_u(u, K);
  const Grid grid = Grid::for_modes(u.n_max());
  const PhysField ug = to_phys(u, grid);
  return to_modes(PhysField{st.b_profile.values.cwiseProduct(ug.values)}, grid, u.n_max());
}

std::optional<int> detect_K0(double radius, const std::vector<int>& candidates, int samples,
                             std::uint64_t seed, int n_max, ASolver method) {
  INERTIA_REQUIRE(radius > 0.0, "radius must be positive");
  INERTIA_REQUIRE(samples >= 1, "samples must be at least 1");
  std::vector<int> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  FieldSampler sampler;
  sampler.n_max = n_max;
  sampler.spectrum = Spectrum::h1_white;
  for (int K : sorted) {
    require_K(K, n_max);
    std::mt19937_64 rng(seed);
    bool ok = true;
    for (int s = 0; s < samples && ok; ++s) {
      const SpectralField v = sampler.draw_in_ball(rng, radius);
      try {
        solve_a(v, K, PicardOptions{1e-12, 200, method});
      } catch (const NumericalError&) {
        ok = false;
      }
    }
    if (ok) return K;
  }
  return std::nullopt;
}

TransformedBurgers::TransformedBurgers(int n_max, TransformedConfig cfg)
    : n_max_(n_max), cfg_(std::move(cfg)) {
  INERTIA_REQUIRE(n_max >= 1, "n_max must be positive");
  require_K(cfg_.K, n_max);
  cfg_.cut.validate();
  INERTIA_REQUIRE(cfg_.picard.tol > 0.0 && cfg_.picard.max_iter >= 1, "invalid Picard options");
  forcing_.assign(static_cast<std::size_t>(n_max), 0.0);
  if (cfg_.forcing.n_max() > 0) {
    INERTIA_REQUIRE(cfg_.forcing.n_max() == n_max, "forcing size does not match n_max");
    INERTIA_REQUIRE(cfg_.forcing.all_finite(), "forcing must be finite");
    for (int n = 0; n < n_max; ++n) forcing_[static_cast<std::size_t>(n)] = cfg_.forcing.c[n];
  }
}

namespace {

struct ContextStorage {
  std::shared_ptr<const SineTables> tb;
  std::vector<double> forcing_grid;
};

ContextStorage make_storage(int n_max, const std::vector<double>& forcing) {
  ContextStorage s;
  s.tb = SineTables::get(n_max, Grid::for_modes(n_max).size());
  s.forcing_grid.assign(static_cast<std::size_t>(s.tb->grid_size()), 0.0);
  kernels::synthesize<double>(s.tb->values(), forcing, n_max, s.forcing_grid);
  return s;
}

}  // namespace

NonlinearPair TransformedBurgers::evaluate(const SpectralField& v) const {
  INERTIA_REQUIRE(v.n_max() == n_max_, "field size does not match nonlinearity");
  if (h1_norm(v) >= cfg_.cut.R_big) return {SpectralField::zeros(n_max_), SpectralField::zeros(n_max_)};
  const ContextStorage s = make_storage(n_max_, forcing_);
  const KernelContext ctx{*s.tb, n_max_, cfg_.K, &cfg_.cut, forcing_, s.forcing_grid, cfg_.picard,
                          cfg_.convention};
  std::vector<double> i1, i2;
  transformed_kernel<double>(ctx, std::span<const double>(v.c.data(), v.c.size()), i1, i2);
  return collect(i1, i2, [](double x) { return x; });
}

NonlinearPair TransformedBurgers::evaluate_uncut(const SpectralField& v) const {
  INERTIA_REQUIRE(v.n_max() == n_max_, "field size does not match nonlinearity");
  const ContextStorage s = make_storage(n_max_, forcing_);
  const KernelContext ctx{*s.tb, n_max_, cfg_.K, nullptr, forcing_, s.forcing_grid, cfg_.picard,
                          cfg_.convention};
  std::vector<double> i1, i2;
  transformed_kernel<double>(ctx, std::span<const double>(v.c.data(), v.c.size()), i1, i2);
  return collect(i1, i2, [](double x) { return x; });
}

NonlinearPair TransformedBurgers::derivative(const SpectralField& v, const SpectralField& w) const {
  INERTIA_REQUIRE(v.n_max() == n_max_ && w.n_max() == n_max_, "field size does not match nonlinearity");
  if (vanishes_near(v)) return {SpectralField::zeros(n_max_), SpectralField::zeros(n_max_)};
  using D = Dual<double>;
  const ContextStorage s = make_storage(n_max_, forcing_);
  const KernelContext ctx{*s.tb, n_max_, cfg_.K, &cfg_.cut, forcing_, s.forcing_grid, cfg_.picard,
                          cfg_.convention};
  std::vector<D> vd(static_cast<std::size_t>(n_max_));
  for (int n = 0; n < n_max_; ++n) vd[static_cast<std::size_t>(n)] = D(v.c[n], w.c[n]);
  std::vector<D> i1, i2;
  transformed_kernel<D>(ctx, vd, i1, i2);
  return collect(i1, i2, [](const D& x) { return x.eps; });
}

NonlinearPair TransformedBurgers::second_derivative(const SpectralField& v, const SpectralField& w1,
                                                    const SpectralField& w2) const {
  INERTIA_REQUIRE(v.n_max() == n_max_ && w1.n_max() == n_max_ && w2.n_max() == n_max_,
                  "field size does not match nonlinearity");
  if (vanishes_near(v)) return {SpectralField::zeros(n_max_), SpectralField::zeros(n_max_)};
  if (cfg_.second == SecondDerivativeMode::finite_difference) return second_derivative_fd(v, w1, w2);
  using D = Dual<double>;
  using DD = Dual<D>;
  const ContextStorage s = make_storage(n_max_, forcing_);
  const KernelContext ctx{*s.tb, n_max_, cfg_.K, &cfg_.cut, forcing_, s.forcing_grid, cfg_.picard,
                          cfg_.convention};
  std::vector<DD> vd(static_cast<std::size_t>(n_max_));
  for (int n = 0; n < n_max_; ++n) {
    vd[static_cast<std::size_t>(n)] = DD(D(v.c[n], w1.c[n]), D(w2.c[n], 0.0));
  }
  std::vector<DD> i1, i2;
  transformed_kernel<DD>(ctx, vd, i1, i2);
  return collect(i1, i2, [](const DD& x) { return x.eps.eps; });
}

bool TransformedBurgers::vanishes_near(const SpectralField& v) const {
  return h1_norm(v) > cfg_.cut.R_big;
}

LipschitzEstimate estimate_lipschitz(int K, double radius, int samples, std::uint64_t seed,
                                     const LipschitzOptions& options) {
  INERTIA_REQUIRE(samples >= 10, "estimate_lipschitz needs at least 10 samples");
  INERTIA_REQUIRE(radius > 0.0, "radius must be positive");
  INERTIA_REQUIRE(options.inner_fraction > 0.0 && options.inner_fraction < 1.0,
                  "inner_fraction must lie in (0, 1)");
  TransformedConfig cfg;
  cfg.K = K;
  cfg.cut = CutoffConfig{options.inner_fraction * radius, radius};
  cfg.forcing = options.forcing;
  const TransformedBurgers nl(options.n_max, cfg);

  FieldSampler sampler;
  sampler.n_max = options.n_max;
  sampler.spectrum = options.spectrum;
  // One stream per sample so that estimates at different K reuse the same
  // (v, w) pairs.
  LipschitzEstimate est;
  est.K = K;
  est.samples = samples;
  est.seed = seed;
  for (int s = 0; s < samples; ++s) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(s + 1));
    const SpectralField v = sampler.draw_in_ball(rng, radius);
    const SpectralField w = sampler.draw(rng, 1.0);
    const NonlinearPair d = nl.derivative(v, w);
    est.L1 = std::max(est.L1, l2_norm(d.reducing));
    est.L2 = std::max(est.L2, h1_norm(d.preserving));
  }
  return est;
}

}  // namespace inertia
