#include "helpers.hpp"

#include "pathlangevin/cli/app.hpp"
#include "pathlangevin/cli/config.hpp"
#include "pathlangevin/cli/observations_io.hpp"
#include "pathlangevin/cli/outputs.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace testing;
using namespace pathlangevin::cli;
namespace fs = std::filesystem;

namespace {

const char* kMinimalBridge = R"(
[problem]
kind = "bridge"
start = [-1.0]
end = [1.0]

[potential]
kind = "double_well"

[grid]
intervals = 16

[sampler]
steps = 4000
)";

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("pathlangevin_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_tool(std::vector<std::string> args) {
  args.insert(args.begin(), "pathlangevin");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write_config(const TempDir& dir, const std::string& text,
                         const std::string& name = "run.toml") {
  const std::string path = dir.file(name);
  write_text(path, text);
  return path;
}

}  // namespace

TEST_CASE("minimal config fills every default") {
  const RunPlan plan = parse_config_string(kMinimalBridge);
  const Settings& s = plan.settings;
  CHECK(s.problem.kind == "bridge");
  CHECK(s.problem.dim == 1);
  CHECK(s.problem.A(0, 0) == 0.0);
  CHECK(s.problem.B(0, 0) == 1.0);
  CHECK(s.intervals == 16);
  CHECK(s.sampler.scheme == Scheme::semi_implicit);
  CHECK(s.sampler.theta == 0.5);
  CHECK(s.sampler.delta == doctest::Approx(0.1 / 16));
  CHECK(s.sampler.burn_in == 400);
  CHECK(s.sampler.thin == 1);
  CHECK(s.run.seed == 0);
  CHECK(s.run.chains == 1);
  CHECK(s.run.marginal_nodes == std::vector<int>{8});
  CHECK(s.gates.z_max == 3.0);
  CHECK(s.gates.ks_max == 0.05);
  CHECK(s.oracle.mala_step == doctest::Approx(0.1 / 256));
  CHECK(plan.grid.intervals == 16);
  CHECK(kind_of(plan.spec) == ProblemKind::bridge);
}

TEST_CASE("unknown keys are rejected with a suggestion") {
  const std::string text = std::string(kMinimalBridge) + "stepsize = 0.1\n";
  try {
    parse_config_string(text, ".", "bridge.toml");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bridge.toml:") == 0);
    CHECK(msg.find(":15:") != std::string::npos);
    CHECK(msg.find("'stepsize'") != std::string::npos);
    CHECK(msg.find("'delta'") != std::string::npos);
  }
  CHECK(suggest_key("thetta", {"theta", "delta"}) == "theta");
  CHECK(suggest_key("burnin", {"burn_in", "steps"}) == "burn_in");
  CHECK(suggest_key("completely_unrelated", {"theta"}).empty());
  CHECK_THROWS_AS(parse_config_string("[problem]\nkind = \"bridge\"\n[potentail]\n"), ConfigError);
}

TEST_CASE("invalid values are config errors") {
  CHECK_THROWS_AS(parse_config_string("[problem]\nkind = \"loop\"\nstart = [0.0]\n[potential]\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_string(std::string(kMinimalBridge) + "theta = 2.0\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_string("[problem]\nkind = \"bridge\"\nstart = [0.0]\n[potential]\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_string("[problem]\nkind = \"bridge\"\nstart = [0.0]\nend = [0.0]\n"
                                      "[potential]\nkind = \"quadratic\"\nQ = [[1.0, 2.0], [2.0, 1.0]]\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_string("not toml = = ="), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/run.toml"), ConfigError);
}

TEST_CASE("canonical config round-trips") {
  const std::string rich = R"(
[problem]
kind = "free_path"
start = [0.5, -0.25]
A = [[-0.3, 0.2], [0.1, -0.4]]
B = [[1.0, 0.0], [0.3, 0.8]]

[potential]
kind = "double_well"
a = 1.5
b = 0.7

[grid]
intervals = 24

[sampler]
scheme = "preconditioned"
delta = 0.0333
steps = 999
burn_in = 17
thin = 3
robin_epsilon = 2.0

[oracle]
method = "mala"
mala_step = 1e-4
mala_chains = 2

[run]
seed = 12345678901
chains = 3
marginal_nodes = [0, 12, 24]

[compare]
z_max = 4.0
ks_max = 0.1
)";
  const RunPlan a = parse_config_string(rich);
  const std::string canonical = to_toml(a.settings);
  const RunPlan b = parse_config_string(canonical);
  CHECK(a.settings == b.settings);
  CHECK(to_toml(b.settings) == canonical);

  const RunPlan c = parse_config_string(kMinimalBridge);
  CHECK(parse_config_string(to_toml(c.settings)).settings == c.settings);
}

TEST_CASE("observations") {
  TempDir dir;
  const Grid grid = Grid::make(4);
  SUBCASE("node values of a straight line") {
    write_text(dir.file("y.csv"), "u,Y_1\n0,0\n0.25,0.25\n0.5,0.5\n0.75,0.75\n1,1\n");
    const Observations obs = load_observations(dir.file("y.csv"), grid);
    REQUIRE(obs.intervals() == 4);
    for (int m = 0; m < 4; ++m) CHECK(obs.increments(m, 0) == doctest::Approx(0.25));
  }
  SUBCASE("increments pass through") {
    write_text(dir.file("dy.csv"), "cell,dY_1,dY_2\n0,0.1,1\n1,-0.2,2\n2,0.3,3\n3,0.4,4\n");
    const Observations obs = load_observations(dir.file("dy.csv"), grid);
    CHECK(obs.dim() == 2);
    CHECK(obs.increments(1, 0) == -0.2);
    CHECK(obs.increments(3, 1) == 4.0);
  }
  SUBCASE("malformed files") {
    write_text(dir.file("short.csv"), "cell,dY_1\n0,0.1\n1,0.2\n");
    CHECK_THROWS_AS(load_observations(dir.file("short.csv"), grid), IoError);
    write_text(dir.file("order.csv"), "u,Y_1\n0,0\n0.5,0.25\n0.25,0.5\n0.75,0.75\n1,1\n");
    CHECK_THROWS_AS(load_observations(dir.file("order.csv"), grid), IoError);
    write_text(dir.file("offgrid.csv"), "u,Y_1\n0,0\n0.2,0.25\n0.5,0.5\n0.75,0.75\n1,1\n");
    CHECK_THROWS_AS(load_observations(dir.file("offgrid.csv"), grid), IoError);
    write_text(dir.file("header.csv"), "time,Y_1\n0,0\n");
    CHECK_THROWS_AS(load_observations(dir.file("header.csv"), grid), IoError);
    CHECK_THROWS_AS(load_observations(dir.file("missing.csv"), grid), IoError);
  }
  SUBCASE("simulated data round-trips bit-exactly") {
    const Grid g = Grid::make(32);
    RandomStream rng(1);
    const SimulatedPath sim = simulate_sde(double_well_smoothing(32), g, rng);
    save_observations(dir.file("sim.csv"), *sim.observations);
    const Observations back = load_observations(dir.file("sim.csv"), g);
    CHECK((back.increments.array() == sim.observations->increments.array()).all());
  }
}

TEST_CASE("JSON formatting is fixed") {
  nlohmann::json j;
  j["zeta"] = 1;
  j["alpha"] = {{"value", 0.1 + 0.2}, {"se", std::numeric_limits<double>::infinity()}};
  j["list"] = {1.0 / 3.0, 2.5e-17, 1e21};
  j["flag"] = true;
  j["name"] = "x\"y";
  j["empty"] = nlohmann::json::object();
  const std::string expected =
      "{\n"
      "  \"alpha\": {\n"
      "    \"se\": null,\n"
      "    \"value\": 0.3\n"
      "  },\n"
      "  \"empty\": {},\n"
      "  \"flag\": true,\n"
      "  \"list\": [\n"
      "    0.333333333333,\n"
      "    2.5e-17,\n"
      "    1e+21\n"
      "  ],\n"
      "  \"name\": \"x\\\"y\",\n"
      "  \"zeta\": 1\n"
      "}\n";
  CHECK(format_json(j) == expected);
}

TEST_CASE("CSV emitters") {
  const Grid grid = Grid::make(2);
  Matrix empty(0, 3);
  CHECK(samples_csv({&empty}, grid, 1) == "sample_index,u,component_1\n");
  Matrix two(2, 3);
  two << 1, 2, 3, 4, 5, 6;
  Matrix one(1, 3);
  one << 7, 8, 9;
  const std::string csv = samples_csv({&two, &one}, grid, 1);
  CHECK(csv.rfind("sample_index,u,component_1\n0,0,1\n0,0.5,2\n", 0) == 0);
  CHECK(csv.find("2,1,9\n") != std::string::npos);
  Path p(2, 2);
  p.at(1, 1) = 0.5;
  CHECK(path_csv(p, grid) == "u,component_1,component_2\n0,0,0\n0.5,0,0.5\n1,0,0\n");

  ReferenceSummary s;
  s.marginals.push_back({"node[1,0]", {0.1, 1.0 / 3.0}, {0.0, -2.0}});
  s.marginals.push_back({"node[2,0]", {5.0}, {}});
  ReferenceSummary back;
  read_marginals_csv(marginals_csv(s), back);
  REQUIRE(back.marginals.size() == 2);
  CHECK(back.marginals[0].values == s.marginals[0].values);
  CHECK(back.marginals[0].log_weights == s.marginals[0].log_weights);
  CHECK(back.marginals[1].values == s.marginals[1].values);
  CHECK(back.marginals[1].log_weights.empty());
}

TEST_CASE("tool subcommands") {
  TempDir dir;
  const std::string cfg = write_config(dir, kMinimalBridge);

  SUBCASE("sample writes outputs deterministically") {
    const Outcome a = run_tool({"sample", "--config", cfg, "--seed", "42", "--out", dir.file("a")});
    CHECK(a.code == kSuccess);
    for (const char* f : {"samples.csv", "summary.json", "marginals.csv", "config.toml"}) {
      CHECK(fs::exists(fs::path(dir.file("a")) / f));
    }
    const Outcome b = run_tool({"sample", "--config", cfg, "--seed", "42", "--out", dir.file("b")});
    CHECK(b.code == kSuccess);
    for (const char* f : {"samples.csv", "summary.json", "marginals.csv"}) {
      CHECK(read_text((fs::path(dir.file("a")) / f).string()) ==
            read_text((fs::path(dir.file("b")) / f).string()));
    }
    const auto summary = nlohmann::json::parse(read_text(dir.file("a/summary.json")));
    CHECK(summary["seed"] == 42);
    CHECK(summary["diverged"] == false);
    CHECK(summary["no_samples"] == false);
    CHECK(summary["samples"] == 3600);
    CHECK(summary["chains"][0]["functionals"].contains("energy"));
    CHECK(summary["chains"][0]["functionals"]["energy"]["iact"].get<double>() >= 1.0);
    // The echoed config re-parses to the same plan.
    CHECK(parse_config_string(summary["config"]["toml"].get<std::string>()).settings.sampler.total_steps ==
          4000);
    const std::string header = read_text(dir.file("a/samples.csv")).substr(0, 27);
    CHECK(header == "sample_index,u,component_1\n");

    const Outcome cmp = run_tool({"compare", "--chain", dir.file("a"), "--oracle", dir.file("b"),
                                  "--out", dir.file("cmp")});
    CHECK(cmp.code == kSuccess);
    const auto report = nlohmann::json::parse(read_text(dir.file("cmp/compare.json")));
    CHECK(report["pass"] == true);
  }
  SUBCASE("more chains pool their estimates") {
    const Outcome a = run_tool({"sample", "--config", cfg, "--chains", "3", "--out", dir.file("c")});
    CHECK(a.code == kSuccess);
    const auto summary = nlohmann::json::parse(read_text(dir.file("c/summary.json")));
    CHECK(summary["chains"].size() == 3);
    CHECK(summary["samples"] == 3 * 3600);
  }
  SUBCASE("zero steps give a header-only sample file") {
    const std::string zero = write_config(
        dir, std::string(kMinimalBridge).replace(std::string(kMinimalBridge).find("steps = 4000"),
                                                 12, "steps = 0"),
        "zero.toml");
    const Outcome r = run_tool({"sample", "--config", zero, "--out", dir.file("z")});
    CHECK(r.code == kSuccess);
    CHECK(read_text(dir.file("z/samples.csv")) == "sample_index,u,component_1\n");
    const auto summary = nlohmann::json::parse(read_text(dir.file("z/summary.json")));
    CHECK(summary["no_samples"] == true);
    CHECK(summary["chains"][0]["message"] == "no samples");
  }
  SUBCASE("divergence exits 3 with partial results") {
    const std::string bad =
        write_config(dir, std::string(kMinimalBridge) + "theta = 0.0\ndelta = 0.5\n", "bad.toml");
    const Outcome r = run_tool({"sample", "--config", bad, "--out", dir.file("d")});
    CHECK(r.code == kDiverged);
    const auto summary = nlohmann::json::parse(read_text(dir.file("d/summary.json")));
    CHECK(summary["diverged"] == true);
    CHECK(summary["diverged_step"].get<long>() > 0);
  }
  SUBCASE("mean-path of the straight bridge") {
    const std::string line = write_config(dir,
                                          "[problem]\nkind = \"bridge\"\nstart = -1.0\nend = 1.0\n"
                                          "[potential]\nkind = \"zero\"\n[grid]\nintervals = 4\n",
                                          "line.toml");
    const Outcome r = run_tool({"mean-path", "--config", line, "--out", dir.file("m")});
    CHECK(r.code == kSuccess);
    const std::string csv = read_text(dir.file("m/mean_path.csv"));
    CHECK(csv.rfind("u,component_1\n0,-1\n0.25,-0.5\n", 0) == 0);
    CHECK(csv.find("0.75,0.5\n1,1\n") != std::string::npos);
  }
  SUBCASE("oracles") {
    const std::string imp = write_config(
        dir, std::string(kMinimalBridge) + "[oracle]\nmethod = \"importance\"\nsamples = 500\n",
        "imp.toml");
    CHECK(run_tool({"oracle", "--config", imp, "--out", dir.file("o")}).code == kSuccess);
    const auto summary = nlohmann::json::parse(read_text(dir.file("o/summary.json")));
    CHECK(summary["method"] == "importance");
    CHECK(summary["size"] == 500);

    const std::string rej = write_config(
        dir,
        std::string(kMinimalBridge) + "[oracle]\nmethod = \"rejection\"\ntolerance = 1e-12\n",
        "rej.toml");
    CHECK(run_tool({"oracle", "--config", rej, "--out", dir.file("r")}).code == kOracleInfeasible);

    const std::string gauss =
        write_config(dir,
                     "[problem]\nkind = \"bridge\"\nstart = 0.0\nend = 0.0\n[potential]\n"
                     "kind = \"quadratic\"\n[oracle]\nmethod = \"gaussian\"\n",
                     "gauss.toml");
    CHECK(run_tool({"oracle", "--config", gauss, "--out", dir.file("g")}).code == kSuccess);
    CHECK(fs::exists(dir.file("g/mean_path.csv")));
  }
  SUBCASE("smoothing with an observation file") {
    const Grid grid = Grid::make(8);
    save_observations(dir.file("obs.csv"), synthetic_observations(8, 1, 2));
    const std::string sm = write_config(dir,
                                        "[problem]\nkind = \"smoothing\"\nA21 = 1.0\n"
                                        "observations = \"obs.csv\"\nlog_alpha = \"gaussian\"\n"
                                        "[potential]\nkind = \"quadratic\"\n[grid]\nintervals = 8\n"
                                        "[oracle]\nmethod = \"rts\"\n[sampler]\nsteps = 100\n",
                                        "sm.toml");
    CHECK(run_tool({"oracle", "--config", sm, "--out", dir.file("rts")}).code == kSuccess);
    CHECK(run_tool({"sample", "--config", sm, "--out", dir.file("sm")}).code == kSuccess);
    CHECK(run_tool({"mean-path", "--config", sm, "--out", dir.file("smm")}).code == kSuccess);
  }
  SUBCASE("validate and config errors") {
    CHECK(run_tool({"validate", "--config", cfg}).code == kSuccess);
    const std::string unstable = write_config(
        dir, "[problem]\nkind = \"bridge\"\nstart = 0.0\nend = 0.0\nA = 1.0\n[potential]\n",
        "unstable.toml");
    CHECK(run_tool({"validate", "--config", unstable}).code == kSuccess);
    CHECK(run_tool({"validate", "--config", unstable, "--strict"}).code == kConfigError);
    CHECK(run_tool({"mean-path", "--config", unstable, "--strict", "--out", dir.file("u")}).code ==
          kConfigError);
    const std::string typo = write_config(dir, std::string(kMinimalBridge) + "stepsize = 1\n",
                                          "typo.toml");
    const Outcome r = run_tool({"sample", "--config", typo, "--out", dir.file("t")});
    CHECK(r.code == kConfigError);
    CHECK(r.err.find("did you mean 'delta'") != std::string::npos);
    CHECK(run_tool({"frobnicate"}).code == kConfigError);
    CHECK(run_tool({"sample"}).code == kConfigError);
  }
  SUBCASE("I/O failures exit 1") {
    CHECK(run_tool({"compare", "--chain", dir.file("nope"), "--oracle", dir.file("nope2")}).code ==
          kFailure);
  }
}

TEST_CASE("the installed tool runs") {
  const char* tool = std::getenv("PATHLANGEVIN_TOOL");
  if (!tool) return;
  TempDir dir;
  const std::string cfg = write_config(dir, kMinimalBridge);
  const std::string cmd = std::string(tool) + " sample --config " + cfg + " --seed 42 --out " +
                          dir.file("run1") + " > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir.file("run1/samples.csv")));
  CHECK(fs::exists(dir.file("run1/summary.json")));
  const std::string fail = std::string(tool) + " validate --config " + dir.file("none.toml") +
                           " > /dev/null 2>&1";
  const int status = std::system(fail.c_str());
  CHECK(WEXITSTATUS(status) == kConfigError);
}
