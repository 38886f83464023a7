#include "inertia/random_fields.hpp"

#include <cmath>

#include "inertia/errors.hpp"

namespace inertia {

SpectralField FieldSampler::draw(std::mt19937_64& rng, double h1_target) const {
  INERTIA_REQUIRE(n_max >= 1, "sampler n_max must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  SpectralField f = SpectralField::zeros(n_max);
  for (int n = 1; n <= n_max; ++n) {
    switch (spectrum) {
      case Spectrum::smooth: f[n] = normal(rng) * std::exp(-n / decay); break;
      case Spectrum::h1_white: f[n] = normal(rng) / n; break;
      case Spectrum::h1_signs: f[n] = (coin(rng) ? 1.0 : -1.0) / n; break;
    }
  }
  const double norm = h1_norm(f);
  if (norm > 0.0) f *= h1_target / norm;
  return f;
}

SpectralField FieldSampler::draw_in_ball(std::mt19937_64& rng, double radius) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double target = radius * uniform(rng);
  return draw(rng, target);
}

}  // namespace inertia
