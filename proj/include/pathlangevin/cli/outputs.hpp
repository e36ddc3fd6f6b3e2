#pragma once

#include "pathlangevin/cli/config.hpp"
#include "pathlangevin/diagnostics.hpp"
#include "pathlangevin/oracle.hpp"
#include "pathlangevin/sampler.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace pathlangevin::cli {

/// Pretty JSON with sorted keys, two-space indent and numbers printed with
/// %.12g; non-finite numbers become null. Deterministic for equal input.
std::string format_json(const nlohmann::json& value);

/// Writes `content` to `path`, throwing IoError naming the path.
void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

/// Rows "sample_index,u,component_1..d", one per (sample, node). Sample
/// indices continue across the matrices in order.
std::string samples_csv(const std::vector<const Matrix*>& samples, const Grid& grid, int dim);

/// "u,component_1..d" for one path.
std::string path_csv(const Path& path, const Grid& grid);

/// "name,value,log_weight" for every marginal sample.
std::string marginals_csv(const ReferenceSummary& summary);
/// Fills summary.marginals from marginals_csv output.
void read_marginals_csv(const std::string& text, ReferenceSummary& summary);

/// Functionals monitored by the sample subcommand: node values at the
/// marginal nodes, and the path integrals of x_k and |x|^2.
std::vector<Functional> monitored_functionals(const Grid& grid, int dim,
                                              const std::vector<int>& nodes);

/// Averages chain estimates (SEs combined as independent) and concatenates
/// marginals.
ReferenceSummary pool_chains(const std::vector<ChainResult>& results,
                             const ChainOptions& options);

nlohmann::json estimates_json(const ReferenceSummary& summary);
ReferenceSummary estimates_from_json(const nlohmann::json& summary);

nlohmann::json chain_summary_json(const Settings& settings,
                                  const std::vector<ChainResult>& results,
                                  const ReferenceSummary& pooled);
nlohmann::json oracle_summary_json(const Settings& settings, const std::string& method,
                                   const ReferenceSummary& summary, double n_eff,
                                   double acceptance_rate, long size,
                                   const std::vector<std::string>& warnings);
nlohmann::json compare_json(const CompareReport& report);

/// summary.json and marginals.csv of a run directory.
ReferenceSummary read_run(const std::string& dir);

}  // namespace pathlangevin::cli
