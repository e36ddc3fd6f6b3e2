#include "pathlangevin/cli/app.hpp"

#include "pathlangevin/cli/config.hpp"
#include "pathlangevin/cli/observations_io.hpp"
#include "pathlangevin/cli/outputs.hpp"
#include "pathlangevin/oracle.hpp"
#include "pathlangevin/sampler.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

namespace pathlangevin::cli {

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<int> chains;
  bool strict = false;
  std::string chain_dir;
  std::string oracle_dir;
};

void apply_thread_cap() {
  if (const char* env = std::getenv("PATHLANGEVIN_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
}

RunPlan load_plan(const Flags& flags) {
  RunPlan plan = parse_config(flags.config);
  if (flags.seed) plan.settings.run.seed = *flags.seed;
  if (flags.chains) {
    if (*flags.chains < 1) throw ConfigError("--chains must be at least 1");
    plan.settings.run.chains = *flags.chains;
  }
  if (flags.strict) plan.settings.run.strict = true;
  return plan;
}

std::string prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create output directory: " + ec.message());
  return dir;
}

std::string in_dir(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void report_validation(const ValidationReport& report, std::ostream& out) {
  for (const auto& c : report.checks) {
    out << c.name << ": " << (c.skipped ? "skipped" : (c.passed ? "pass" : "FAIL"))
        << " (statistic " << c.statistic << ")";
    if (!c.detail.empty()) out << " " << c.detail;
    out << "\n";
  }
}

// Runs the structural checks; strict mode turns failures into config errors.
void validate(const RunPlan& plan, std::ostream& err) {
  ValidationOptions options;
  options.strict = plan.settings.run.strict;
  try {
    const ValidationReport report = validate_problem(plan.spec, options);
    if (!report.ok()) {
      err << "warning: problem validation failed\n";
      report_validation(report, err);
    }
  } catch (const ValidationError& e) {
    report_validation(e.report(), err);
    throw ConfigError(std::string("strict validation failed: ") + e.what());
  }
}

int cmd_sample(const Flags& flags, std::ostream& out, std::ostream& err) {
  const RunPlan plan = load_plan(flags);
  validate(plan, err);
  const Settings& s = plan.settings;
  AssemblyOptions assembly;
  assembly.robin_epsilon = s.sampler.robin_epsilon;
  auto target = std::make_shared<const TargetMeasure>(plan.spec, plan.grid, assembly);
  ChainOptions options;
  options.marginal_nodes = s.run.marginal_nodes;
  options.functionals = monitored_functionals(plan.grid, target->op().dim, s.run.marginal_nodes);
  const auto results = run_chains(target, s.sampler, s.run.seed, s.run.chains, options);
  const ReferenceSummary pooled = pool_chains(results, options);

  const std::string dir = prepare_dir(flags.out);
  std::vector<const Matrix*> samples;
  for (const auto& r : results) samples.push_back(&r.samples);
  write_text(in_dir(dir, "samples.csv"), samples_csv(samples, plan.grid, target->op().dim));
  const nlohmann::json summary = chain_summary_json(s, results, pooled);
  write_text(in_dir(dir, "summary.json"), format_json(summary));
  write_text(in_dir(dir, "marginals.csv"), marginals_csv(pooled));
  write_text(in_dir(dir, "config.toml"), to_toml(s));
  if (summary["diverged"].get<bool>()) {
    err << "chain diverged at step " << summary["diverged_step"] << "; partial results in "
        << dir << "\n";
    return kDiverged;
  }
  out << "wrote " << summary["samples"] << " samples to " << dir << "\n";
  return kSuccess;
}

int cmd_oracle(const Flags& flags, std::ostream& out, std::ostream& err) {
  const RunPlan plan = load_plan(flags);
  validate(plan, err);
  const Settings& s = plan.settings;
  const auto& o = s.oracle;
  AssemblyOptions assembly;
  assembly.robin_epsilon = s.sampler.robin_epsilon;
  const std::string dir = prepare_dir(flags.out);
  const int dim = state_dim(plan.spec);

  if (o.method == "gaussian" || o.method == "rts") {
    Path mean(plan.grid.intervals, dim), variance(plan.grid.intervals, dim);
    if (o.method == "gaussian") {
      const GaussianMoments g = gaussian_reference_moments(plan.spec, plan.grid, assembly);
      mean = g.mean;
      variance = g.variance;
    } else {
      const auto* sm = std::get_if<SmoothingProblem>(&plan.spec);
      if (!sm) throw OracleError("rts oracle needs a smoothing problem");
      const SmootherResult r = rts_smoother(*sm, plan.grid);
      mean = r.mean;
      variance = r.variance;
    }
    GaussianMoments moments;
    moments.mean = mean;
    moments.variance = variance;
    const ReferenceSummary summary = summarize_gaussian(moments);
    write_text(in_dir(dir, "summary.json"),
               format_json(oracle_summary_json(s, o.method, summary, 0.0, 1.0, 0, {})));
    write_text(in_dir(dir, "mean_path.csv"), path_csv(mean, plan.grid));
    write_text(in_dir(dir, "config.toml"), to_toml(s));
    out << "wrote " << o.method << " moments to " << dir << "\n";
    return kSuccess;
  }

  WeightedEnsemble ens;
  if (o.method == "importance") {
    ens = importance_bridge(plan.spec, plan.grid, static_cast<int>(o.samples), s.run.seed, assembly);
  } else if (o.method == "rejection") {
    RejectionOptions ro;
    ro.tolerance = o.tolerance;
    ro.target_count = static_cast<int>(o.samples);
    ro.simulation.substeps = o.substeps;
    ens = rejection_bridge(plan.spec, plan.grid, ro, s.run.seed);
  } else {
    auto target = std::make_shared<const TargetMeasure>(plan.spec, plan.grid, assembly);
    MalaOptions mo;
    mo.steps = o.mala_steps;
    mo.burn_in = o.mala_burn_in;
    mo.thin = o.mala_thin;
    mo.chains = o.mala_chains;
    ens = mala_oracle(target, o.mala_step, s.run.seed, mo);
  }
  for (const auto& w : ens.warnings) err << "warning: " << w << "\n";
  const ReferenceSummary summary = summarize_ensemble(ens, s.run.marginal_nodes, s.sampler.batches);
  write_text(in_dir(dir, "samples.csv"), samples_csv({&ens.paths}, plan.grid, dim));
  write_text(in_dir(dir, "summary.json"),
             format_json(oracle_summary_json(s, o.method, summary, ens.n_eff(), ens.acceptance_rate,
                                             static_cast<long>(ens.size()), ens.warnings)));
  write_text(in_dir(dir, "marginals.csv"), marginals_csv(summary));
  write_text(in_dir(dir, "config.toml"), to_toml(s));
  out << "wrote " << ens.size() << " " << o.method << " paths to " << dir << "\n";
  return kSuccess;
}

int cmd_compare(const Flags& flags, std::ostream& out, std::ostream&) {
  GateConfig gates;
  if (!flags.config.empty()) gates = parse_config(flags.config).settings.gates;
  const ReferenceSummary chain = read_run(flags.chain_dir);
  const ReferenceSummary oracle = read_run(flags.oracle_dir);
  const CompareReport report = compare_report(chain, oracle, {}, gates);
  const std::string dir = prepare_dir(flags.out);
  write_text(in_dir(dir, "compare.json"), format_json(compare_json(report)));
  out << (report.all_pass() ? "PASS" : "FAIL") << ": " << report.rows.size() << " functionals, "
      << report.ks_rows.size() << " marginals, max |z| = " << report.max_abs_z() << "\n";
  return report.all_pass() ? kSuccess : kFailure;
}

int cmd_mean_path(const Flags& flags, std::ostream& out, std::ostream& err) {
  const RunPlan plan = load_plan(flags);
  validate(plan, err);
  AssemblyOptions assembly;
  assembly.robin_epsilon = plan.settings.sampler.robin_epsilon;
  const Path m = mean_path(plan.spec, plan.grid, assembly);
  const std::string dir = prepare_dir(flags.out);
  write_text(in_dir(dir, "mean_path.csv"), path_csv(m, plan.grid));
  out << "wrote mean path to " << dir << "\n";
  return kSuccess;
}

int cmd_validate(const Flags& flags, std::ostream& out, std::ostream&) {
  const RunPlan plan = load_plan(flags);
  ValidationOptions options;
  options.strict = false;
  const ValidationReport report = validate_problem(plan.spec, options);
  report_validation(report, out);
  if (!report.ok() && plan.settings.run.strict) return kConfigError;
  return kSuccess;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  apply_thread_cap();
  CLI::App app{"Path-space Langevin sampler for conditioned diffusions"};
  app.require_subcommand(1);
  Flags flags;

  auto add_run_flags = [&](CLI::App* sub, bool sampling) {
    sub->add_option("--config", flags.config, "TOML configuration")->required();
    sub->add_option("--out", flags.out, "output directory");
    sub->add_flag("--strict", flags.strict, "fail on validation warnings");
    if (sampling) {
      sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { flags.seed = v; },
                                              "random seed");
      sub->add_option_function<int>("--chains", [&](const int& v) { flags.chains = v; },
                                    "independent chains");
    }
  };

  auto* sample = app.add_subcommand("sample", "run Langevin chains");
  add_run_flags(sample, true);
  auto* oracle = app.add_subcommand("oracle", "run the configured reference sampler");
  add_run_flags(oracle, true);
  auto* mean = app.add_subcommand("mean-path", "solve the mean-path boundary value problem");
  add_run_flags(mean, false);
  auto* validate_cmd = app.add_subcommand("validate", "check the problem conditions");
  validate_cmd->add_option("--config", flags.config, "TOML configuration")->required();
  validate_cmd->add_flag("--strict", flags.strict, "exit 2 when a check fails");
  auto* compare = app.add_subcommand("compare", "compare a chain run with an oracle run");
  compare->add_option("--chain", flags.chain_dir, "chain run directory")->required();
  compare->add_option("--oracle", flags.oracle_dir, "oracle run directory")->required();
  compare->add_option("--out", flags.out, "output directory");
  compare->add_option("--config", flags.config, "config supplying the gates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    if (*sample) return cmd_sample(flags, out, err);
    if (*oracle) return cmd_oracle(flags, out, err);
    if (*compare) return cmd_compare(flags, out, err);
    if (*mean) return cmd_mean_path(flags, out, err);
    if (*validate_cmd) return cmd_validate(flags, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ModelError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const OracleError& e) {
    err << "oracle infeasible: " << e.what() << "\n";
    return kOracleInfeasible;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace pathlangevin::cli
