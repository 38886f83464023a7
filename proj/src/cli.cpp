#include "inertia/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "inertia/burgers.hpp"
#include "inertia/errors.hpp"
#include "inertia/inertial_form.hpp"
#include "inertia/jets.hpp"
#include "inertia/parallel.hpp"
#include "inertia/random_fields.hpp"
#include "json.hpp"

namespace inertia {

namespace {

constexpr const char* kVersion = "1.0.0";

// Round-trip samples decay like e^{-n/2}: the product b(u) u then has no
// content above mode 64 at the 1e-12 level, so truncation stays out of the
// measured error.
constexpr double kRoundtripDecay = 2.0;

const std::set<std::string>& subcommands() {
  static const std::set<std::string> names{"simulate", "roundtrip", "gaps",  "manifold",
                                           "jets",     "reduce",    "track", "selftest"};
  return names;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("config key " + std::string(key) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

SpectralField forcing_field(const RunConfig& cfg) { return SpectralField::mode(cfg.n_max, 1, cfg.forcing); }

std::string coefficient_header(const std::string& first, int n_max) {
  std::string h = first;
  for (int n = 1; n <= n_max; ++n) h += ",c_" + std::to_string(n);
  return h + "\n";
}

std::string coefficient_row(double t, const SpectralField& f) {
  std::string row = fmt(t);
  for (int n = 1; n <= f.n_max(); ++n) row += "," + fmt(f[n]);
  return row + "\n";
}

// Output files of one run; the manifest is written last and lists them all.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    outputs_.push_back({{"path", name}, {"bytes", content.size()}, {"fnv1a", hex64(fnv1a(content))}});
  }

  void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  void finish(const std::string& command, const RunConfig& cfg) {
    nlohmann::json m;
    m["command"] = command;
    m["config-hash"] = hex64(fnv1a(cfg.canonical()));
    m["versions"] = {
        {"inertia", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"cli11", CLI11_VERSION},
    };
    m["outputs"] = outputs_;
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    f << m.dump(2) << "\n";
    if (!f) throw std::runtime_error("cannot write " + (dir_ / "manifest.json").string());
  }

 private:
  std::filesystem::path dir_;
  nlohmann::json outputs_ = nlohmann::json::array();
};

struct Options {
  std::optional<double> L1;
  std::optional<double> L2;
  double p1 = -0.3;
  int nodes = 41;
};

SpectralField base_coords(const RunConfig& cfg, double p1) { return SpectralField::mode(cfg.n_max, 1, p1); }

GapPlan estimated_plan(const RunConfig& cfg) {
  const LipschitzEstimate lip = working_lipschitz(cfg);
  return plan_for(cfg, lip.L1, lip.L2);
}

void cmd_simulate(const RunConfig& cfg, const Options&, Artifacts& out) {
  std::mt19937_64 rng(cfg.seed);
  const SpectralField u0 = FieldSampler{cfg.n_max, Spectrum::smooth, 4.0}.draw(rng, 1.0);
  SimConfig s;
  s.dt = cfg.dt;
  s.t_end = cfg.t_end;
  s.forcing = forcing_field(cfg);
  s.save_every = std::max(1, s.steps() / 200);
  const Trajectory tr = integrate_burgers(u0, s);

  std::string csv = coefficient_header("t", cfg.n_max);
  for (std::size_t i = 0; i < tr.size(); ++i) csv += coefficient_row(tr.times[i], tr.states[i]);
  out.write("trajectory.csv", csv);

  const Grid g(cfg.grid());
  const PhysField u = to_phys(tr.final_state(), g);
  std::string prof = "x,u\n";
  for (int j = 0; j < g.size(); ++j) prof += fmt(g.point(j)) + "," + fmt(u.values[j]) + "\n";
  out.write("profile.csv", prof);

  out.write_json("summary.json", {{"steps", s.steps()},
                                  {"saved", tr.size()},
                                  {"t_end", tr.times.back()},
                                  {"initial_h1", h1_norm(u0)},
                                  {"final_h1", h1_norm(tr.final_state())},
                                  {"final_l2", l2_norm(tr.final_state())}});
}

void cmd_roundtrip(const RunConfig& cfg, const Options&, Artifacts& out) {
  constexpr int samples = 20;
  constexpr double radius = 5.0;
  std::mt19937_64 rng(cfg.seed);
  const FieldSampler fs{cfg.n_max, Spectrum::smooth, kRoundtripDecay};
  std::vector<SpectralField> us;
  for (int i = 0; i < samples; ++i) us.push_back(fs.draw_in_ball(rng, radius));
  std::vector<double> errors(samples);
  parallel_for(samples, [&](int i) {
    const SpectralField& u = us[static_cast<std::size_t>(i)];
    errors[static_cast<std::size_t>(i)] = h1_norm(forward_map(inverse_map(u, cfg.K), cfg.K) - u);
  });
  const double worst = *std::max_element(errors.begin(), errors.end());

  const DiffeoState a = solve_a(inverse_map(us[0], cfg.K), cfg.K);
  const DiffeoState b = b_of_u(us[0], cfg.K);
  const Grid g(cfg.grid());
  std::string prof = "x,a,b\n";
  double product = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.point(j);
    prof += fmt(x) + "," + fmt(a.a(x)) + "," + fmt(b.b(x)) + "\n";
    product = std::max(product, std::abs(a.a(x) * b.b(x) - 1.0));
  }
  out.write("profiles.csv", prof);
  out.write_json("roundtrip.json", {{"K", cfg.K},
                                    {"samples", samples},
                                    {"radius", radius},
                                    {"errors", errors},
                                    {"max_error", worst},
                                    {"within_1e-8", worst <= 1e-8},
                                    {"max_ab_minus_one", product}});
}

void cmd_gaps(const RunConfig& cfg, const Options& opt, Artifacts& out) {
  INERTIA_REQUIRE(opt.L1.has_value() == opt.L2.has_value(), "--L1 and --L2 must be given together");
  double L1, L2;
  std::string source = "flags";
  if (opt.L1) {
    L1 = *opt.L1;
    L2 = *opt.L2;
  } else {
    const LipschitzEstimate lip = working_lipschitz(cfg);
    L1 = lip.L1;
    L2 = lip.L2;
    source = "estimated";
  }
  nlohmann::json j = to_json(plan_for(cfg, L1, L2));
  j["lipschitz_source"] = source;
  out.write_json("plan.json", j);
}

void cmd_manifold(const RunConfig& cfg, const Options&, Artifacts& out) {
  const TransformedBurgers nl = make_nonlinearity(cfg);
  const GapPlan plan = estimated_plan(cfg);
  const PerronConfig pc = level_config(cfg, plan);
  constexpr int samples = 21;
  std::vector<ManifoldPoint> points(samples);
  auto coord = [](int i) { return -0.5 + 0.05 * i; };
  parallel_for(samples, [&](int i) {
    points[static_cast<std::size_t>(i)] = solve_manifold_point(base_coords(cfg, coord(i)), pc, nl);
  });
  std::string csv = coefficient_header("p1", cfg.n_max);
  nlohmann::json reports = nlohmann::json::array();
  for (int i = 0; i < samples; ++i) {
    const ManifoldPoint& m = points[static_cast<std::size_t>(i)];
    csv += coefficient_row(coord(i), m.value);
    nlohmann::json r = to_json(m.report);
    r["p1"] = coord(i);
    r["value_h1"] = h1_norm(m.value);
    reports.push_back(r);
  }
  out.write("manifold.csv", csv);
  out.write_json("contraction.json",
                 {{"N", pc.N}, {"theta", pc.theta}, {"T_horizon", pc.T_horizon}, {"points", reports}});
}

void cmd_jets(const RunConfig& cfg, const Options& opt, Artifacts& out) {
  const TransformedBurgers nl = make_nonlinearity(cfg);
  const JetSolver solver(estimated_plan(cfg), nl, JetOptions{cfg.perron_dt, cfg.fp_tol, 200});
  const ChartBase b = solver.base(base_coords(cfg, opt.p1));
  nlohmann::json j = to_json(solver.bundle(b));
  j["plan"] = to_json(solver.plan());
  out.write_json("jets.json", j);
}

void cmd_reduce(const RunConfig& cfg, const Options& opt, Artifacts& out) {
  const TransformedBurgers nl = make_nonlinearity(cfg);
  const PerronConfig pc = level_config(cfg, estimated_plan(cfg));
  INERTIA_REQUIRE(pc.N <= 3, "reduce interpolates the chart and supports N <= 3");
  INERTIA_REQUIRE(opt.nodes >= 2, "--nodes must be at least 2");
  INERTIA_REQUIRE(std::abs(opt.p1) < 0.6, "--p1 must lie inside the chart box (-0.6, 0.6)");
  const DirectManifold exact(pc, nl);
  const auto d = static_cast<std::size_t>(pc.N);
  const GridManifold chart(exact, std::vector<double>(d, -0.6), std::vector<double>(d, 0.6),
                           std::vector<int>(d, opt.nodes));

  SimConfig s;
  s.dt = cfg.dt;
  s.t_end = cfg.t_end;
  s.save_every = std::max(1, s.steps() / 100);
  const SpectralField p0 = base_coords(cfg, opt.p1);
  const Trajectory reduced = integrate_reduced(p0, s, nl, chart);
  const Trajectory lifted = lift(reduced, chart);
  const Trajectory full = integrate_full(p0 + exact(p0), s, nl);

  std::string csv = "t";
  for (int n = 1; n <= pc.N; ++n) csv += ",p_" + std::to_string(n);
  csv += ",deviation\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    const double dev = h1_norm(lifted.states[i] - full.states[i]);
    worst = std::max(worst, dev);
    csv += fmt(reduced.times[i]);
    for (int n = 1; n <= pc.N; ++n) csv += "," + fmt(reduced.states[i][n]);
    csv += "," + fmt(dev) + "\n";
  }
  out.write("reduced.csv", csv);
  out.write_json("reduce.json", {{"N", pc.N},
                                 {"theta", pc.theta},
                                 {"chart_nodes_per_axis", opt.nodes},
                                 {"chart_box", {-0.6, 0.6}},
                                 {"max_h1_deviation", worst}});
}

void cmd_track(const RunConfig& cfg, const Options& opt, Artifacts& out) {
  const TransformedBurgers nl = make_nonlinearity(cfg);
  const PerronConfig pc = level_config(cfg, estimated_plan(cfg));
  const DirectManifold M(pc, nl);
  const SpectralField p = base_coords(cfg, opt.p1);
  std::mt19937_64 rng(cfg.seed);
  const SpectralField q = project_high(FieldSampler{cfg.n_max, Spectrum::smooth, 4.0}.draw(rng, 0.2), pc.N);
  SimConfig s;
  s.dt = cfg.dt;
  s.t_end = cfg.t_end;
  s.save_every = std::max(1, s.steps() / 20);
  const TrackingReport r = tracking_test(p + M(p) + q, s, nl, M);
  out.write("tracking.csv", tracking_csv(r));
  nlohmann::json j = to_json(r);
  j["theta"] = pc.theta;
  j["perturbation_h1"] = h1_norm(q);
  out.write_json("tracking.json", j);
}

// Fast deterministic checks of each module against closed-form values.
void cmd_selftest(const RunConfig& cfg, const Options&, Artifacts& out, bool& passed) {
  std::mt19937_64 rng(cfg.seed);
  const FieldSampler fs{cfg.n_max, Spectrum::smooth, 4.0};
  nlohmann::json checks = nlohmann::json::array();
  passed = true;
  auto record = [&](const std::string& name, double value, double tol) {
    const bool ok = value <= tol;
    passed = passed && ok;
    checks.push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", ok}});
  };

  const Grid g = Grid::for_modes(cfg.n_max);
  double transform = 0.0;
  for (int i = 0; i < 10; ++i) {
    const SpectralField u = fs.draw(rng, 1.0);
    transform = std::max(transform, (to_modes(to_phys(u, g), g, cfg.n_max).c - u.c).cwiseAbs().maxCoeff());
  }
  record("spectral_roundtrip", transform, 1e-12);

  double diffeo = 0.0;
  const FieldSampler smooth{cfg.n_max, Spectrum::smooth, kRoundtripDecay};
  for (int i = 0; i < 5; ++i) {
    const SpectralField u = smooth.draw_in_ball(rng, 5.0);
    diffeo = std::max(diffeo, h1_norm(forward_map(inverse_map(u, 16), 16) - u));
  }
  record("diffeo_roundtrip", diffeo, 1e-8);

  const GapPlan plan = find_sequence(1, 0.1, 1.0, square_eigenvalue, 100);
  record("gap_plan_N1", std::abs(plan.N_seq.at(0) - 1.0) + std::abs(plan.gamma - 0.3), 1e-12);

  const SpectralField h = fs.draw(rng, 1.0);
  const ConstantNonlinearity constant(h);
  const ManifoldPoint m = solve_manifold_point(SpectralField::mode(cfg.n_max, 1, 0.3),
                                               PerronConfig::make(2, cfg.perron_dt, 1e-10), constant);
  double perron = 0.0;
  for (int n = 3; n <= cfg.n_max; ++n) perron = std::max(perron, std::abs(m.value[n] - h[n] / eigenvalue(n)));
  record("perron_constant_source", perron, 1e-8);

  SimConfig s;
  s.dt = cfg.dt;
  s.t_end = 1.0;
  s.nonlinear = false;
  const Trajectory heat = integrate_burgers(SpectralField::mode(cfg.n_max, 1), s);
  record("heat_decay", std::abs(heat.final_state()[1] - std::exp(-1.0)), 1e-8);

  out.write_json("selftest.json", {{"seed", cfg.seed}, {"checks", checks}, {"pass", passed}});
}

std::string dashed(const std::string& key) {
  std::string d = key;
  std::replace(d.begin(), d.end(), '_', '-');
  return d;
}

}  // namespace

void RunConfig::validate() const {
  INERTIA_REQUIRE(n_max >= 2, "n_max must be at least 2");
  INERTIA_REQUIRE(grid_m == 0 || 2 * grid_m >= 3 * n_max,
                  "grid_m must be at least 3 n_max / 2 (or 0 for 3 n_max - 1)");
  INERTIA_REQUIRE(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  INERTIA_REQUIRE(std::isfinite(t_end) && t_end > 0.0, "t_end must be positive");
  INERTIA_REQUIRE(K >= 1 && K <= n_max, "K must lie in 1..n_max");
  INERTIA_REQUIRE(std::isfinite(r) && std::isfinite(R_big) && r > 0.0 && r < R_big,
                  "cut-off radii must satisfy 0 < r < R_big");
  INERTIA_REQUIRE(n_order >= 1 && n_order <= 3, "n_order must lie in 1..3");
  INERTIA_REQUIRE(N_cap >= 2, "N_cap must be at least 2");
  INERTIA_REQUIRE(theta_policy == "plan" || theta_policy == "midpoint", "theta_policy must be plan or midpoint");
  INERTIA_REQUIRE(std::isfinite(fp_tol) && fp_tol > 0.0 && fp_tol < 1.0, "fp_tol must lie in (0, 1)");
  INERTIA_REQUIRE(std::isfinite(T_horizon) && T_horizon >= 0.0, "T_horizon must be non-negative");
  INERTIA_REQUIRE(!output_dir.empty(), "output_dir must not be empty");
  INERTIA_REQUIRE(std::isfinite(forcing), "forcing must be finite");
  INERTIA_REQUIRE(std::isfinite(perron_dt) && perron_dt > 0.0, "perron_dt must be positive");
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv{
      {"n_max", std::to_string(n_max)},       {"grid_m", std::to_string(grid())},
      {"dt", fmt(dt)},                        {"t_end", fmt(t_end)},
      {"K", std::to_string(K)},               {"r", fmt(r)},
      {"R_big", fmt(R_big)},                  {"n_order", std::to_string(n_order)},
      {"N_cap", std::to_string(N_cap)},       {"seed", std::to_string(seed)},
      {"theta_policy", theta_policy},         {"fp_tol", fmt(fp_tol)},
      {"T_horizon", fmt(T_horizon)},
      {"forcing", fmt(forcing)},              {"perron_dt", fmt(perron_dt)},
  };
  std::string s;
  for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
  return s;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"n_max", "grid_m",       "dt",     "t_end",     "K",
                                             "r",     "R_big",        "n_order", "N_cap",    "seed",
                                             "theta_policy", "fp_tol", "T_horizon", "output_dir",
                                             "forcing", "perron_dt"};
  return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  if (key == "n_max") cfg.n_max = parse_number<int>(key, value);
  else if (key == "grid_m") cfg.grid_m = parse_number<int>(key, value);
  else if (key == "dt") cfg.dt = parse_number<double>(key, value);
  else if (key == "t_end") cfg.t_end = parse_number<double>(key, value);
  else if (key == "K") cfg.K = parse_number<int>(key, value);
  else if (key == "r") cfg.r = parse_number<double>(key, value);
  else if (key == "R_big") cfg.R_big = parse_number<double>(key, value);
  else if (key == "n_order") cfg.n_order = parse_number<int>(key, value);
  else if (key == "N_cap") cfg.N_cap = parse_number<int>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "theta_policy") cfg.theta_policy = value;
  else if (key == "fp_tol") cfg.fp_tol = parse_number<double>(key, value);
  else if (key == "T_horizon") cfg.T_horizon = parse_number<double>(key, value);
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "forcing") cfg.forcing = parse_number<double>(key, value);
  else if (key == "perron_dt") cfg.perron_dt = parse_number<double>(key, value);
  else throw ValidationError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(number) + " is not key=value");
    }
    set_config_value(cfg, trim(std::string_view(body).substr(0, eq)), std::string_view(body).substr(eq + 1));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigReadError("cannot read config file " + path.string());
  std::ostringstream text;
  text << f.rdbuf();
  if (f.bad()) throw ConfigReadError("cannot read config file " + path.string());
  return parse_config(text.str());
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

TransformedBurgers make_nonlinearity(const RunConfig& cfg) {
  TransformedConfig tc;
  tc.K = cfg.K;
  tc.cut = {cfg.r, cfg.R_big};
  tc.forcing = forcing_field(cfg);
  return TransformedBurgers(cfg.n_max, tc);
}

LipschitzEstimate working_lipschitz(const RunConfig& cfg, int samples) {
  LipschitzEstimate best;
  for (const Spectrum sp : {Spectrum::smooth, Spectrum::h1_signs}) {
    LipschitzOptions o;
    o.n_max = cfg.n_max;
    o.spectrum = sp;
    o.inner_fraction = cfg.r / cfg.R_big;
    o.forcing = forcing_field(cfg);
    const LipschitzEstimate e = estimate_lipschitz(cfg.K, cfg.R_big, samples, cfg.seed, o);
    best.L1 = std::max(best.L1, e.L1);
    best.L2 = std::max(best.L2, e.L2);
    best.K = e.K;
    best.samples = e.samples;
    best.seed = e.seed;
  }
  return best;
}

GapPlan plan_for(const RunConfig& cfg, double L1, double L2) {
  const GapPlan plan = find_sequence(cfg.n_order, L1, L2, square_eigenvalue, cfg.N_cap);
  INERTIA_REQUIRE(plan.N_seq.back() < cfg.n_max,
                  "plan needs N_" + std::to_string(plan.n) + " = " + std::to_string(plan.N_seq.back()) +
                      " below n_max = " + std::to_string(cfg.n_max));
  return plan;
}

PerronConfig level_config(const RunConfig& cfg, const GapPlan& plan) {
  std::optional<double> theta;
  if (cfg.theta_policy == "plan") theta = plan.theta_seq.at(0);
  PerronConfig pc = PerronConfig::make(plan.N_seq.at(0), cfg.perron_dt, cfg.fp_tol, theta);
  pc.L1 = plan.L1;
  pc.L2 = plan.L2;
  if (cfg.T_horizon > 0.0) {
    pc.T_horizon = std::max(1.0, std::round(cfg.T_horizon / cfg.perron_dt)) * cfg.perron_dt;
    pc.validate();
  }
  return pc;
}

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc < 2) {
    err << "usage: inertia <simulate|roundtrip|gaps|manifold|jets|reduce|track|selftest> [options]\n";
    return 64;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h") {
    out << "usage: inertia <simulate|roundtrip|gaps|manifold|jets|reduce|track|selftest> [options]\n";
    return 0;
  }
  if (!subcommands().count(command)) {
    err << "unknown subcommand '" << command << "'\n";
    return 64;
  }

  CLI::App app{"inertia " + command};
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value config file");
  std::map<std::string, std::string> overrides;
  for (const auto& key : config_keys()) {
    std::string names = "--" + key;
    if (dashed(key) != key) names += ",--" + dashed(key);
    if (key == "n_order") names += ",--n";
    app.add_option(names, overrides[key], "overrides config key " + key);
  }
  Options opt;
  if (command == "gaps") {
    app.add_option("--L1", opt.L1, "Lipschitz constant of the reducing channel");
    app.add_option("--L2", opt.L2, "Lipschitz constant of the preserving channel");
  }
  if (command == "jets" || command == "reduce" || command == "track") {
    app.add_option("--p1", opt.p1, "first chart coordinate of the base point");
  }
  if (command == "reduce") app.add_option("--nodes", opt.nodes, "chart nodes per axis");

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 2; --i) args.emplace_back(argv[i]);
    app.parse(args);

    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& key : config_keys()) {
      if (app.count("--" + key) > 0) set_config_value(cfg, key, overrides[key]);
    }
    cfg.validate();

    Artifacts artifacts(cfg.output_dir);
    bool passed = true;
    if (command == "simulate") cmd_simulate(cfg, opt, artifacts);
    else if (command == "roundtrip") cmd_roundtrip(cfg, opt, artifacts);
    else if (command == "gaps") cmd_gaps(cfg, opt, artifacts);
    else if (command == "manifold") cmd_manifold(cfg, opt, artifacts);
    else if (command == "jets") cmd_jets(cfg, opt, artifacts);
    else if (command == "reduce") cmd_reduce(cfg, opt, artifacts);
    else if (command == "track") cmd_track(cfg, opt, artifacts);
    else cmd_selftest(cfg, opt, artifacts, passed);
    artifacts.finish(command, cfg);
    out << "wrote " << (std::filesystem::path(cfg.output_dir) / "manifest.json").string() << "\n";
    if (!passed) {
      err << command << ": one or more checks failed\n";
      return 3;
    }
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << command << ": " << e.what() << "\n";
    return 2;
  } catch (const ConfigReadError& e) {
    err << command << ": " << e.what() << "\n";
    return 66;
  } catch (const ValidationError& e) {
    err << command << ": invalid input: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << command << ": numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << command << ": " << e.what() << "\n";
    return 74;
  } catch (const std::runtime_error& e) {
    err << command << ": " << e.what() << "\n";
    return 74;
  }
}

}  // namespace inertia
