#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathlangevin {

class DiagnosticsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ErgodicEstimate {
  double value = 0.0;
  /// Batch-means standard error.
  double se = 0.0;
  int batches = 0;
  long burn_in = 0;
  long samples = 0;

  bool reportable() const { return batches >= 20; }
};

/// Mean of series[burn_in:] with a non-overlapping batch-means SE. The batch
/// size is floor(n / batches); trailing values that do not fill a batch
/// count toward the mean but not the SE. Throws when fewer than one value per
/// batch remains.
ErgodicEstimate ergodic_average(std::span<const double> series, long burn_in = 0,
                                int batches = 20);

/// Integrated autocorrelation time, 1 + 2 sum rho_k, truncated by Geyer's
/// initial positive (monotone) sequence. A constant series gives 1.
double iact(std::span<const double> series);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::span<const double> a, std::span<const double> b);
/// Weighted variant; empty log-weight spans mean equal weights.
double ks_distance(std::span<const double> a, std::span<const double> log_wa,
                   std::span<const double> b, std::span<const double> log_wb);

/// (sum w)^2 / sum w^2 for w = exp(log_w), computed stably.
double effective_sample_size(std::span<const double> log_weights);

struct Estimate {
  std::string name;
  double value = 0.0;
  double se = 0.0;
};

struct MarginalSample {
  std::string name;
  std::vector<double> values;
  /// Empty for equally weighted samples.
  std::vector<double> log_weights;
};

/// Estimates plus raw marginals for one run, on a given grid.
struct ReferenceSummary {
  int intervals = 0;
  int dim = 0;
  std::vector<Estimate> estimates;
  std::vector<MarginalSample> marginals;

  const Estimate* find(const std::string& name) const;
  const MarginalSample* find_marginal(const std::string& name) const;
};

struct GateConfig {
  double z_max = 3.0;
  double ks_max = 0.05;
};

struct CompareRow {
  std::string name;
  double chain_value = 0.0;
  double chain_se = 0.0;
  double oracle_value = 0.0;
  double oracle_se = 0.0;
  double z = 0.0;
  bool pass = true;
};

struct KsRow {
  std::string name;
  double ks = 0.0;
  bool pass = true;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  std::vector<KsRow> ks_rows;
  GateConfig gates;

  bool all_pass() const;
  double max_abs_z() const;
};

/// Joins estimates and marginals by name. An empty `functionals` selects
/// every estimate present in both summaries. Throws DiagnosticsError on grid
/// mismatch or a requested functional missing from either side.
CompareReport compare_report(const ReferenceSummary& chain, const ReferenceSummary& oracle,
                             const std::vector<std::string>& functionals = {},
                             const GateConfig& gates = {});

/// Names used for node functionals: "mean[m,k]", "var[m,k]", "node[m,k]".
std::string mean_name(int node, int component);
std::string variance_name(int node, int component);
std::string marginal_name(int node, int component);

}  // namespace pathlangevin
