// Abstract two-channel nonlinearity F1 + F2 driving v_t + A v = F1(v) + F2(v).
//
// F1 maps H1_0 into L2 (it may lose a derivative), F2 maps H1_0 into itself.
// The Perron and jet solvers only see this interface, which lets tests swap
// in zero, constant and linear nonlinearities with known answers.
#pragma once

#include <Eigen/Dense>

#include "inertia/spectral.hpp"

namespace inertia {

struct NonlinearPair {
  SpectralField reducing;    // F1, L2-valued channel
  SpectralField preserving;  // F2, H1_0-valued channel

  SpectralField sum() const { return reducing + preserving; }
};

class Nonlinearity {
 public:
  virtual ~Nonlinearity() = default;

  virtual int n_max() const = 0;
  virtual NonlinearPair evaluate(const SpectralField& v) const = 0;
  // F'(v)[w].
  virtual NonlinearPair derivative(const SpectralField& v, const SpectralField& w) const = 0;
  // F''(v)[w1, w2]. The default is a central difference of derivative().
  virtual NonlinearPair second_derivative(const SpectralField& v, const SpectralField& w1,
                                          const SpectralField& w2) const;
  // True when F and all its derivatives vanish in a neighbourhood of v.
  virtual bool vanishes_near(const SpectralField& /*v*/) const { return false; }

  // Central difference (F'(v + h w2) w1 - F'(v - h w2) w1) / 2h with
  // h = rel_step * max(|v|_H1, 1) / |w2|_H1.
  NonlinearPair second_derivative_fd(const SpectralField& v, const SpectralField& w1,
                                     const SpectralField& w2, double rel_step = 1e-3) const;
};

class ZeroNonlinearity final : public Nonlinearity {
 public:
  explicit ZeroNonlinearity(int n_max) : n_max_(n_max) {}
  int n_max() const override { return n_max_; }
  NonlinearPair evaluate(const SpectralField& v) const override;
  NonlinearPair derivative(const SpectralField& v, const SpectralField& w) const override;
  NonlinearPair second_derivative(const SpectralField& v, const SpectralField& w1,
                                  const SpectralField& w2) const override;
  bool vanishes_near(const SpectralField&) const override { return true; }

 private:
  int n_max_;
};

// F(v) = g regardless of v, carried in the H1_0 channel.
class ConstantNonlinearity final : public Nonlinearity {
 public:
  explicit ConstantNonlinearity(SpectralField g) : g_(std::move(g)) {}
  int n_max() const override { return g_.n_max(); }
  NonlinearPair evaluate(const SpectralField& v) const override;
  NonlinearPair derivative(const SpectralField& v, const SpectralField& w) const override;
  NonlinearPair second_derivative(const SpectralField& v, const SpectralField& w1,
                                  const SpectralField& w2) const override;

 private:
  SpectralField g_;
};

// F(v) = B v for a fixed coefficient matrix B, carried in the H1_0 channel.
class LinearNonlinearity final : public Nonlinearity {
 public:
  explicit LinearNonlinearity(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {}
  int n_max() const override { return static_cast<int>(matrix_.rows()); }
  NonlinearPair evaluate(const SpectralField& v) const override;
  NonlinearPair derivative(const SpectralField& v, const SpectralField& w) const override;
  NonlinearPair second_derivative(const SpectralField& v, const SpectralField& w1,
                                  const SpectralField& w2) const override;

 private:
  Eigen::MatrixXd matrix_;
};

}  // namespace inertia
