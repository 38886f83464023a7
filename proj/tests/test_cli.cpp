#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "inertia/cli.hpp"
#include "inertia/errors.hpp"
#include "json.hpp"

using namespace inertia;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "inertia");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("inertia_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("defaults") {
    const RunConfig cfg;
    CHECK(cfg.grid() == 191);
    CHECK_NOTHROW(cfg.validate());
  }
  SUBCASE("key=value lines with comments") {
    const RunConfig cfg = parse_config("# run\nK = 16\n\ndt=2e-3  # smaller step\ntheta_policy=midpoint\nseed=9\n");
    CHECK(cfg.K == 16);
    CHECK(cfg.dt == 2e-3);
    CHECK(cfg.theta_policy == "midpoint");
    CHECK(cfg.seed == 9);
    CHECK(cfg.n_max == 64);
  }
  SUBCASE("every documented key is accepted") {
    RunConfig cfg;
    for (const auto& key : config_keys()) {
      CAPTURE(key);
      std::string value = "1";
      if (key == "theta_policy") value = "plan";
      if (key == "output_dir") value = "out";
      CHECK_NOTHROW(set_config_value(cfg, key, value));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_config("bogus=1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("K=eight\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("K 8\n"), ValidationError);
    CHECK_THROWS_AS(load_config("/nonexistent/inertia.cfg"), ConfigReadError);
    RunConfig cfg;
    cfg.r = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = RunConfig{};
    cfg.theta_policy = "largest";
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
  SUBCASE("canonical form ignores the output directory") {
    RunConfig a, b;
    b.output_dir = "elsewhere";
    CHECK(a.canonical() == b.canonical());
    b.K = 9;
    CHECK(a.canonical() != b.canonical());
    CHECK(a.canonical().find("grid_m=191") != std::string::npos);
  }
}

TEST_CASE("fnv1a") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 64);
  CHECK(run({"bogus"}).code == 64);
  CHECK(run({"simulate", "--dt", "-1", "--output-dir", scratch("neg").string()}).code == 2);
  CHECK(run({"gaps", "--config", "/nonexistent/inertia.cfg"}).code == 66);
  CHECK(run({"gaps", "--no-such-flag"}).code == 2);
  CHECK(run({"gaps", "--L1", "0.1", "--output-dir", scratch("half").string()}).code == 2);
  CHECK(run({"gaps", "--help"}).code == 0);
}

TEST_CASE("gaps with explicit constants") {
  const fs::path dir = scratch("gaps");
  const Run r = run({"gaps", "--n", "1", "--L1", "0.1", "--L2", "1", "--N-cap", "100", "--output-dir", dir.string()});
  CHECK(r.code == 0);
  const auto plan = nlohmann::json::parse(slurp(dir / "plan.json"));
  CHECK(plan["N_seq"] == nlohmann::json::array({1}));
  CHECK(plan["gamma"].get<double>() == doctest::Approx(0.3));
  CHECK(plan["lipschitz_source"] == "flags");

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["command"] == "gaps");
  REQUIRE(manifest["outputs"].size() == 1);
  const auto& entry = manifest["outputs"][0];
  CHECK(entry["path"] == "plan.json");
  CHECK(entry["bytes"].get<std::size_t>() == fs::file_size(dir / "plan.json"));

  SUBCASE("infeasible constants are a numerical failure") {
    CHECK(run({"gaps", "--L1", "0.1", "--L2", "1e6", "--output-dir", scratch("inf").string()}).code == 3);
  }
  SUBCASE("a config file feeds the same run") {
    const fs::path cfg = scratch("cfg_file");
    fs::create_directories(cfg);
    std::ofstream(cfg / "run.cfg") << "n_order=1\nN_cap=100\noutput_dir=" << (cfg / "out").string() << "\n";
    CHECK(run({"gaps", "--config", (cfg / "run.cfg").string(), "--L1", "0.1", "--L2", "1"}).code == 0);
    CHECK(slurp(cfg / "out" / "plan.json") == slurp(dir / "plan.json"));
  }
}

TEST_CASE("identical runs write identical manifests") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  for (const auto& d : {a, b}) {
    CHECK(run({"roundtrip", "--K", "16", "--seed", "7", "--output-dir", d.string()}).code == 0);
  }
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  const auto report = nlohmann::json::parse(slurp(a / "roundtrip.json"));
  CHECK(report["max_error"].get<double>() <= 1e-8);
}
