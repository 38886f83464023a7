// Seeded random test fields.
#pragma once

#include <cstdint>
#include <random>

#include "inertia/spectral.hpp"

namespace inertia {

enum class Spectrum {
  // c_n ~ xi_n exp(-n / decay): analytic fields, resolved far below n_max.
  smooth,
  // c_n ~ xi_n / n: equal H1 energy per mode up to n_max (rough H1 fields).
  h1_white,
  // c_n = +-1/n with random signs: h1_white without amplitude fluctuations,
  // so every spectral tail carries its expected share of the norm.
  h1_signs,
};

struct FieldSampler {
  int n_max = 64;
  Spectrum spectrum = Spectrum::smooth;
  double decay = 4.0;

  // Random field rescaled to the given H1_0 norm.
  SpectralField draw(std::mt19937_64& rng, double h1_target) const;
  // Random field with H1_0 norm drawn uniformly in [0, radius].
  SpectralField draw_in_ball(std::mt19937_64& rng, double radius) const;
};

}  // namespace inertia
