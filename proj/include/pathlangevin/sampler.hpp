#pragma once

#include "pathlangevin/block_tridiagonal.hpp"
#include "pathlangevin/diagnostics.hpp"
#include "pathlangevin/measure.hpp"
#include "pathlangevin/random.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pathlangevin {

enum class Scheme { semi_implicit, preconditioned };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct SamplerConfig {
  Scheme scheme = Scheme::semi_implicit;
  /// Step size; 0 selects default_delta.
  double delta = 0.0;
  double theta = 0.5;
  /// Negative selects 10% of total_steps.
  long burn_in = -1;
  long total_steps = 0;
  long thin = 1;
  /// Sup-norm abort threshold; 0 selects 1e3 (1 + |m|_inf).
  double divergence_threshold = 0.0;
  /// Robin coefficient of the smoothing preconditioner.
  double robin_epsilon = 1.0;
  /// Batches for the batch-means standard errors in the summary.
  int batches = 20;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  double resolved_delta(const Grid& grid) const;
  long resolved_burn_in() const;
};

/// 0.1 du for the semi-implicit scheme, 0.1 for the preconditioned one.
double default_delta(Scheme scheme, const Grid& grid);

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Per-node running sums of x and x^2 over post-burn-in steps.
struct MomentAccumulator {
  Vector sum;
  Vector sum_sq;
  long count = 0;

  void reset(Eigen::Index size);
  void add(const Vector& x);
  Vector mean() const;
  Vector variance() const;
};

struct ChainState {
  ChainState(Path x, std::uint64_t seed, std::uint64_t stream = 0);

  Path x;
  /// Last preconditioner solve for x (preconditioned scheme only).
  Path y;
  bool has_y = false;
  long step = 0;
  RandomStream rng;
  double watermark = 0.0;
  MomentAccumulator moments;
};

/// One theta-scheme step of dx = grad log pi(x) dt + sqrt(2) dW on the free
/// unknowns:
///   (I + delta theta Lambda) x+ = x - delta (1 - theta) Lambda x
///                                 + delta (g + grad log U(x)) + sqrt(2 delta) xi.
/// Caches the factorization of I + delta theta Lambda; one instance per chain.
class SemiImplicitStepper {
 public:
  SemiImplicitStepper(std::shared_ptr<const TargetMeasure> target, double delta,
                      double theta = 0.5);
  void step(ChainState& state);

  double delta() const { return delta_; }
  const TargetMeasure& target() const { return *target_; }

 private:
  std::shared_ptr<const TargetMeasure> target_;
  double delta_;
  double theta_;
  CholeskyFactor factor_;
  Vector drift_, rhs_, noise_, work_;
};

/// y = Lambda0^{-1} (g + grad log U(x) - Lambda1 x) with Dirichlet values
/// reinstated, so that y - x = Lambda0^{-1} grad log pi(x).
Path solve_preconditioner(const TargetMeasure& target, const CholeskyFactor& leading_factor,
                          const Path& x);
Path solve_preconditioner(const TargetMeasure& target, const Path& x);

/// Lie-splitting step with y frozen:
///   x+ = y + e^{-delta} (x - y) + sqrt(1 - e^{-2 delta}) Lambda0^{-1/2} xi,
/// followed by a refresh of y.
class PreconditionedStepper {
 public:
  PreconditionedStepper(std::shared_ptr<const TargetMeasure> target, double delta);
  void step(ChainState& state);
  /// The noise term alone, for testing its covariance.
  Vector noise(RandomStream& rng) const;
  void refresh(ChainState& state) const;

  double delta() const { return delta_; }
  const CholeskyFactor& leading_factor() const { return factor_; }

 private:
  std::shared_ptr<const TargetMeasure> target_;
  double delta_;
  CholeskyFactor factor_;
  Vector drift_, work_;
};

/// Allocating one-off forms; they factorize on every call.
ChainState step_semi_implicit(ChainState state, const TargetMeasure& target, double delta,
                              double theta = 0.5);
ChainState step_preconditioned(ChainState state, const TargetMeasure& target, double delta);

struct Functional {
  std::string name;
  std::function<double(const Path&)> evaluate;
};

struct ChainOptions {
  /// Starting path; the mean path when absent. Dirichlet nodes are
  /// overwritten with the boundary data.
  std::optional<Path> initial;
  std::vector<Functional> functionals;
  /// Record thinned paths in ChainResult::samples.
  bool keep_samples = true;
  /// Nodes whose thinned values are kept as marginals in the summary.
  std::vector<int> marginal_nodes;
};

struct FunctionalSummary {
  std::string name;
  ErgodicEstimate estimate;
  double iact = 1.0;
};

struct ChainSummary {
  long samples = 0;
  long steps = 0;
  long burn_in = 0;
  long thin = 1;
  double delta = 0.0;
  /// Node means and variances of the thinned samples with batch-means SEs;
  /// mean holds the initial path when there are no samples.
  Path mean, mean_se, variance, variance_se;
  std::vector<FunctionalSummary> functionals;
  bool diverged = false;
  long diverged_step = -1;
  std::string message;
};

struct ChainResult {
  /// Thinned paths, one row each (node-major values).
  Matrix samples;
  std::vector<long> sample_steps;
  /// Thinned functional values, one column per functional.
  Matrix functional_series;
  /// Thinned values at ChainOptions::marginal_nodes, one column per (node,
  /// component).
  Matrix marginal_series;
  ChainSummary summary;
  Path final_state;
  /// Running post-burn-in node moments over every step (not thinned).
  MomentAccumulator moments;
};

ChainResult run_chain(std::shared_ptr<const TargetMeasure> target, const SamplerConfig& config,
                      std::uint64_t seed, const ChainOptions& options = {},
                      std::uint64_t stream = 0);
ChainResult run_chain(const ProblemSpec& spec, const Grid& grid, const SamplerConfig& config,
                      std::uint64_t seed, const ChainOptions& options = {});

/// Independent chains with streams 0..n-1 of `seed`, run in parallel.
std::vector<ChainResult> run_chains(std::shared_ptr<const TargetMeasure> target,
                                    const SamplerConfig& config, std::uint64_t seed, int chains,
                                    const ChainOptions& options = {});

/// Node means and variances (and marginals at `options.marginal_nodes`) of a
/// chain as a summary for compare_report.
ReferenceSummary summarize_chain(const ChainResult& result, const ChainOptions& options = {});

}  // namespace pathlangevin
