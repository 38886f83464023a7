#include "inertia/nonlinearity.hpp"

#include <algorithm>

#include "inertia/errors.hpp"

namespace inertia {

NonlinearPair Nonlinearity::second_derivative(const SpectralField& v, const SpectralField& w1,
                                              const SpectralField& w2) const {
  return second_derivative_fd(v, w1, w2);
}

NonlinearPair Nonlinearity::second_derivative_fd(const SpectralField& v, const SpectralField& w1,
                                                 const SpectralField& w2, double rel_step) const {
  const double w2_norm = h1_norm(w2);
  if (w2_norm == 0.0) {
    return {SpectralField::zeros(n_max()), SpectralField::zeros(n_max())};
  }
  const double h = rel_step * std::max(h1_norm(v), 1.0) / w2_norm;
  const NonlinearPair plus = derivative(v + h * w2, w1);
  const NonlinearPair minus = derivative(v - h * w2, w1);
  const double scale = 0.5 / h;
  return {scale * (plus.reducing - minus.reducing), scale * (plus.preserving - minus.preserving)};
}

NonlinearPair ZeroNonlinearity::evaluate(const SpectralField&) const {
  return {SpectralField::zeros(n_max_), SpectralField::zeros(n_max_)};
}

NonlinearPair ZeroNonlinearity::derivative(const SpectralField&, const SpectralField&) const {
  return {SpectralField::zeros(n_max_), SpectralField::zeros(n_max_)};
}

NonlinearPair ZeroNonlinearity::second_derivative(const SpectralField&, const SpectralField&,
                                                  const SpectralField&) const {
  return {SpectralField::zeros(n_max_), SpectralField::zeros(n_max_)};
}

NonlinearPair ConstantNonlinearity::evaluate(const SpectralField&) const {
  return {SpectralField::zeros(n_max()), g_};
}

NonlinearPair ConstantNonlinearity::derivative(const SpectralField&, const SpectralField&) const {
  return {SpectralField::zeros(n_max()), SpectralField::zeros(n_max())};
}

NonlinearPair ConstantNonlinearity::second_derivative(const SpectralField&, const SpectralField&,
                                                      const SpectralField&) const {
  return {SpectralField::zeros(n_max()), SpectralField::zeros(n_max())};
}

NonlinearPair LinearNonlinearity::evaluate(const SpectralField& v) const {
  INERTIA_REQUIRE(v.n_max() == n_max(), "field size does not match linear map");
  return {SpectralField::zeros(n_max()), SpectralField(matrix_ * v.c)};
}

NonlinearPair LinearNonlinearity::derivative(const SpectralField&, const SpectralField& w) const {
  INERTIA_REQUIRE(w.n_max() == n_max(), "field size does not match linear map");
  return {SpectralField::zeros(n_max()), SpectralField(matrix_ * w.c)};
}

NonlinearPair LinearNonlinearity::second_derivative(const SpectralField&, const SpectralField&,
                                                    const SpectralField&) const {
  return {SpectralField::zeros(n_max()), SpectralField::zeros(n_max())};
}

}  // namespace inertia
