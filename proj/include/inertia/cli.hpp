// Command-line pipelines: flat key=value run configs, the shared problem
// setup (transformed nonlinearity, Lipschitz estimate, gap plan) and the
// subcommand driver that writes CSV/JSON artifacts plus a manifest.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "inertia/diffeo.hpp"
#include "inertia/gap.hpp"
#include "inertia/perron.hpp"

namespace inertia {

struct RunConfig {
  int n_max = 64;
  int grid_m = 0;  // 0 selects 3 n_max - 1
  double dt = 1e-3;
  double t_end = 1.0;
  int K = 8;
  double r = 0.6;
  double R_big = 1.0;
  int n_order = 2;
  int N_cap = 100;
  std::uint64_t seed = 1;
  std::string theta_policy = "plan";  // plan | midpoint
  double fp_tol = 1e-12;
  double T_horizon = 0.0;  // 0 derives the horizon from fp_tol
  std::string output_dir = "inertia_out";
  // Amplitude of the mode-1 forcing g = forcing e_1.
  double forcing = 0.2;
  // Step of the Perron and jet trajectory grids.
  double perron_dt = 5e-3;

  int grid() const { return grid_m > 0 ? grid_m : 3 * n_max - 1; }
  void validate() const;
  // Sorted key=value lines of every field that affects results (all but
  // output_dir), resolved; hashed into the manifest.
  std::string canonical() const;
};

// Raised when the config file cannot be read (exit 66).
class ConfigReadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& config_keys();
// Throws ValidationError on unknown keys or malformed values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
// One pair per line; blank lines and text after '#' are ignored.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view bytes);

// g = forcing e_1 with the configured K and cut-off.
TransformedBurgers make_nonlinearity(const RunConfig& cfg);
// Max over the smooth and random-sign spectra of estimate_lipschitz at the
// working resolution, sampled in the ball of radius R_big.
LipschitzEstimate working_lipschitz(const RunConfig& cfg, int samples = 50);
GapPlan plan_for(const RunConfig& cfg, double L1, double L2);
// Level-1 Perron config: theta from the plan or the window midpoint, and
// the configured horizon when T_horizon > 0.
PerronConfig level_config(const RunConfig& cfg, const GapPlan& plan);

// argv[1] is the subcommand. Returns 0 on success, 2 on validation errors,
// 3 on numerical failures, 64 for an unknown subcommand and 66 for an
// unreadable config.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace inertia
