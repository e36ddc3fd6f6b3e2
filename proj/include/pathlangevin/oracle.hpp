#pragma once

#include "pathlangevin/diagnostics.hpp"
#include "pathlangevin/measure.hpp"
#include "pathlangevin/random.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pathlangevin {

/// A reference sampler could not produce a usable ensemble (explosion,
/// acceptance collapse, non-Gaussian input to an exact method, ...).
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Paths on a grid, one per row (node-major values), with optional
/// log-weights. `correlated` marks MCMC output, whose standard errors use
/// batch means instead of the i.i.d. formula.
struct WeightedEnsemble {
  int intervals = 0;
  int dim = 0;
  Matrix paths;
  /// Empty for equal weights.
  Vector log_weights;
  bool correlated = false;
  /// MALA and rejection acceptance rates; 1 otherwise.
  double acceptance_rate = 1.0;
  std::vector<std::string> warnings;

  Eigen::Index size() const { return paths.rows(); }
  /// Normalized weights.
  Vector weights() const;
  /// (sum w)^2 / sum w^2; the ensemble size when unweighted.
  double n_eff() const;
  Path mean() const;
  Path variance() const;
  std::vector<double> marginal(int node, int component) const;
};

/// Estimates mean[m,k] and var[m,k] at every node and marginals at
/// `marginal_nodes`. Weighted standard errors for independent draws, batch
/// means for correlated ones.
ReferenceSummary summarize_ensemble(const WeightedEnsemble& ensemble,
                                    const std::vector<int>& marginal_nodes = {}, int batches = 20);

struct SimulatedPath {
  Path x;
  /// Synthetic observation increments (smoothing problems only).
  std::optional<Observations> observations;
};

struct SimulationOptions {
  /// Euler substeps per grid cell.
  int substeps = 1;
  /// |X| beyond this aborts with advice to refine the grid.
  double explosion_limit = 1e8;
  /// Random-walk Metropolis steps for a non-Gaussian initial law (smoothing).
  int initial_mcmc_steps = 2000;
};

/// Euler-Maruyama path of dX = AX du - BB^T grad V(X) du + B dW on the grid
/// nodes. Free-path and bridge problems start at their left value (the
/// bridge end is ignored). Smoothing problems draw X(0) from the density
/// proportional to alpha e^{-V} and also simulate dY = A21 X du + B22 dW.
SimulatedPath simulate_sde(const ProblemSpec& spec, const Grid& grid, RandomStream& rng,
                           const SimulationOptions& options = {});

/// n exact draws of the reference Gaussian (mean Lambda^{-1} g, precision
/// Lambda) weighted by exp(log U). Draw i uses stream i of `seed`; the loop
/// runs in parallel.
WeightedEnsemble importance_bridge(const ProblemSpec& spec, const Grid& grid, int n,
                                   std::uint64_t seed, const AssemblyOptions& options = {});
/// Same ensemble computed in a plain loop, for tests.
WeightedEnsemble importance_bridge_serial(const ProblemSpec& spec, const Grid& grid, int n,
                                          std::uint64_t seed,
                                          const AssemblyOptions& options = {});

struct RejectionOptions {
  double tolerance = 0.05;
  int target_count = 1000;
  /// Abort when the acceptance rate estimate drops below this.
  double min_acceptance = 1e-5;
  /// Give up after this many proposals even if acceptance is fine.
  long max_proposals = 100000000;
  SimulationOptions simulation;
};

/// Simulates the unconditioned SDE and keeps paths with |X(1) - x+| <= tol.
WeightedEnsemble rejection_bridge(const ProblemSpec& spec, const Grid& grid,
                                  const RejectionOptions& options, std::uint64_t seed);

struct MalaOptions {
  long steps = 100000;
  /// Negative selects 10% of steps.
  long burn_in = -1;
  long thin = 1;
  int chains = 1;
  std::optional<Path> initial;
};

/// Metropolis-adjusted Langevin on the free unknowns of the discrete target
/// with step h: proposal x + h grad log pi(x) + sqrt(2h) xi. Chains use
/// streams 0..chains-1 of `seed` and are concatenated.
WeightedEnsemble mala_oracle(std::shared_ptr<const TargetMeasure> target, double h,
                             std::uint64_t seed, const MalaOptions& options = {});

struct SmootherResult {
  Path mean;
  /// Marginal variances per node and component.
  Path variance;
};

/// Kalman filter and Rauch-Tung-Striebel smoother on the Euler
/// discretization x_{m+1} = x_m + f(x_m) du + noise, with each increment
/// observing the cell average: dY_m = A21 (x_m + x_{m+1}) / 2 du + noise.
/// Requires a quadratic potential and a quadratic log alpha.
SmootherResult rts_smoother(const SmoothingProblem& problem, const Grid& grid);

struct GaussianMoments {
  Path mean;
  /// Node variances (zero on Dirichlet nodes).
  Path variance;
  /// Dense covariance of the free unknowns.
  Matrix covariance;
  int first_free = 0;
};

/// Dense algebra for a Gaussian target: precision Lambda - D^2 log U and its
/// mean. Requires log U quadratic and M <= 256.
GaussianMoments gaussian_reference_moments(const ProblemSpec& spec, const Grid& grid,
                                           const AssemblyOptions& options = {});

/// Exact summary (zero SEs) of Gaussian moments for compare_report.
ReferenceSummary summarize_gaussian(const GaussianMoments& moments);

}  // namespace pathlangevin
