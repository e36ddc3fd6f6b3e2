#include "pathlangevin/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

namespace pathlangevin {

Vector WeightedEnsemble::weights() const {
  const auto n = paths.rows();
  if (log_weights.size() == 0) return Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector w = (log_weights.array() - log_weights.maxCoeff()).exp();
  return w / w.sum();
}

double WeightedEnsemble::n_eff() const {
  if (log_weights.size() == 0) return static_cast<double>(paths.rows());
  const Vector w = weights();
  return 1.0 / w.squaredNorm();
}

Path WeightedEnsemble::mean() const {
  const Vector w = weights();
  return Path(intervals, dim, paths.transpose() * w);
}

Path WeightedEnsemble::variance() const {
  const Vector w = weights();
  const Vector m = paths.transpose() * w;
  const Matrix centered = paths.rowwise() - m.transpose();
  return Path(intervals, dim, centered.cwiseAbs2().transpose() * w);
}

std::vector<double> WeightedEnsemble::marginal(int node, int component) const {
  const auto col = paths.col(static_cast<Eigen::Index>(node) * dim + component);
  return {col.data(), col.data() + col.size()};
}

namespace {

Estimate weighted_estimate(const std::string& name, const Eigen::Ref<const Vector>& f,
                           const Vector& w) {
  const double mean = f.dot(w);
  const double var = ((f.array() - mean).square() * w.array().square()).sum();
  return {name, mean, std::sqrt(var)};
}

Estimate batch_estimate(const std::string& name, const Eigen::Ref<const Vector>& f,
                        int batches) {
  const std::span<const double> s(f.data(), static_cast<std::size_t>(f.size()));
  const ErgodicEstimate e = ergodic_average(s, 0, batches);
  return {name, e.value, e.se};
}

}  // namespace

ReferenceSummary summarize_ensemble(const WeightedEnsemble& ensemble,
                                    const std::vector<int>& marginal_nodes, int batches) {
  if (ensemble.size() == 0) throw OracleError("empty ensemble");
  ReferenceSummary out;
  out.intervals = ensemble.intervals;
  out.dim = ensemble.dim;
  const Vector w = ensemble.weights();
  for (int m = 0; m <= ensemble.intervals; ++m) {
    for (int k = 0; k < ensemble.dim; ++k) {
      const Vector col = ensemble.paths.col(static_cast<Eigen::Index>(m) * ensemble.dim + k);
      const double mu = col.dot(w);
      const Vector sq = (col.array() - mu).square().matrix();
      if (ensemble.correlated) {
        out.estimates.push_back(batch_estimate(mean_name(m, k), col, batches));
        out.estimates.push_back(batch_estimate(variance_name(m, k), sq, batches));
      } else {
        out.estimates.push_back(weighted_estimate(mean_name(m, k), col, w));
        out.estimates.push_back(weighted_estimate(variance_name(m, k), sq, w));
      }
    }
  }
  for (int node : marginal_nodes) {
    for (int k = 0; k < ensemble.dim; ++k) {
      MarginalSample ms;
      ms.name = marginal_name(node, k);
      ms.values = ensemble.marginal(node, k);
      if (ensemble.log_weights.size() > 0) {
        ms.log_weights.assign(ensemble.log_weights.data(),
                              ensemble.log_weights.data() + ensemble.log_weights.size());
      }
      out.marginals.push_back(std::move(ms));
    }
  }
  return out;
}

namespace {

struct Dynamics {
  Matrix A;
  Matrix B;
  Matrix BBt;
  const Potential* potential = nullptr;
};

Dynamics dynamics_of(const ProblemSpec& spec) {
  Dynamics dyn;
  if (const auto* f = std::get_if<FreePathProblem>(&spec)) {
    dyn = {f->mats.A, f->mats.B, f->mats.BBt, f->potential.get()};
  } else if (const auto* b = std::get_if<BridgeProblem>(&spec)) {
    dyn = {b->mats.A, b->mats.B, b->mats.BBt, b->potential.get()};
  } else {
    const auto& s = std::get<SmoothingProblem>(spec);
    dyn = {s.signal.A, s.signal.B, s.signal.BBt, s.potential.get()};
  }
  return dyn;
}

[[noreturn]] void explode(double du) {
  std::ostringstream msg;
  msg << "Euler-Maruyama path exploded at du = " << du << "; use a finer grid or more substeps";
  throw OracleError(msg.str());
}

// Draws X(0) from the density proportional to alpha e^{-V}.
Vector initial_state(const SmoothingProblem& s, RandomStream& rng,
                     const SimulationOptions& options) {
  const int d = s.signal.dim();
  const Potential& V = *s.potential;
  const LogAlpha& la = *s.log_alpha;
  const Vector zero = Vector::Zero(d);
  if (V.is_quadratic() && la.is_quadratic()) {
    const Matrix precision = V.hessian(zero) - la.hessian(zero);
    Vector lin(d), gv(d);
    la.gradient(zero, lin);
    V.gradient(zero, gv);
    lin -= gv;
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) throw OracleError("initial law is not normalizable");
    Vector mean = llt.solve(lin);
    Vector xi(d);
    rng.fill_normal(xi);
    return mean + llt.matrixU().solve(xi);
  }
  auto log_density = [&](const Vector& x) { return la.value(x) - V.value(x); };
  Vector x = zero;
  double lx = log_density(x);
  Vector prop(d);
  const double step = 0.5;
  for (int i = 0; i < options.initial_mcmc_steps; ++i) {
    rng.fill_normal(prop);
    prop = x + step * prop;
    const double lp = log_density(prop);
    if (std::log(rng.uniform()) < lp - lx) {
      x = prop;
      lx = lp;
    }
  }
  return x;
}

}  // namespace

SimulatedPath simulate_sde(const ProblemSpec& spec, const Grid& grid, RandomStream& rng,
                           const SimulationOptions& options) {
  if (options.substeps < 1) throw OracleError("substeps must be at least 1");
  check_compatible(spec, grid);
  const Dynamics dyn = dynamics_of(spec);
  const int d = static_cast<int>(dyn.A.rows());
  const int M = grid.intervals;
  const double h = grid.du / options.substeps;
  const double sqrt_h = std::sqrt(h);
  const auto* smoothing = std::get_if<SmoothingProblem>(&spec);

  SimulatedPath out;
  out.x = Path(M, d);
  Vector x(d);
  if (const auto* f = std::get_if<FreePathProblem>(&spec)) x = f->start;
  else if (const auto* b = std::get_if<BridgeProblem>(&spec)) x = b->start;
  else x = initial_state(*smoothing, rng, options);

  Matrix dy;
  int obs_dim = 0;
  if (smoothing) {
    obs_dim = static_cast<int>(smoothing->A21.rows());
    dy = Matrix::Zero(M, obs_dim);
  }
  Vector grad(d), xi(d), eta(obs_dim), drift(d);
  out.x.node(0) = x;
  for (int m = 0; m < M; ++m) {
    for (int s = 0; s < options.substeps; ++s) {
      if (smoothing) {
        rng.fill_normal(eta);
        dy.row(m) += (smoothing->A21 * x * h + smoothing->B22 * eta * sqrt_h).transpose();
      }
      dyn.potential->gradient(x, grad);
      drift.noalias() = dyn.A * x;
      drift.noalias() -= dyn.BBt * grad;
      rng.fill_normal(xi);
      x += drift * h;
      x.noalias() += dyn.B * xi * sqrt_h;
      if (!x.allFinite() || x.cwiseAbs().maxCoeff() > options.explosion_limit) explode(grid.du);
    }
    out.x.node(m + 1) = x;
  }
  if (smoothing) out.observations = Observations::from_increments(std::move(dy));
  return out;
}

namespace {

struct ImportanceSetup {
  DiscreteOperator op;
  CholeskyFactor factor;
  Path reference_mean;
  kernels::LogUModel model;
};

ImportanceSetup importance_setup(const ProblemSpec& spec, const Grid& grid,
                                 const AssemblyOptions& options) {
  if (kind_of(spec) != ProblemKind::bridge) {
    throw OracleError("importance_bridge needs a bridge problem");
  }
  DiscreteOperator op = assemble_precision(spec, grid, options);
  CholeskyFactor factor = cholesky_banded(op.precision);
  Path mean = solve_bvp(op, factor, Vector::Zero(op.unknowns()));
  return {std::move(op), std::move(factor), std::move(mean), kernels::LogUModel(spec, grid)};
}

void importance_draw(const ImportanceSetup& setup, std::uint64_t seed, int i, Path& path,
                     double& log_weight) {
  RandomStream rng(seed, static_cast<std::uint64_t>(i));
  path = setup.reference_mean;
  setup.op.free_part(path) += sample_from_precision(setup.factor, rng);
  log_weight = kernels::serial::log_u(setup.model, path);
}

WeightedEnsemble finish_importance(WeightedEnsemble ens) {
  if (!ens.log_weights.allFinite()) throw OracleError("importance weights are not finite");
  if (ens.n_eff() < 50.0) {
    std::ostringstream msg;
    msg << "importance weights degenerate: n_eff = " << ens.n_eff();
    ens.warnings.push_back(msg.str());
  }
  return ens;
}

}  // namespace

WeightedEnsemble importance_bridge(const ProblemSpec& spec, const Grid& grid, int n,
                                   std::uint64_t seed, const AssemblyOptions& options) {
  if (n < 1) throw OracleError("ensemble size must be positive");
  const ImportanceSetup setup = importance_setup(spec, grid, options);
  WeightedEnsemble ens;
  ens.intervals = grid.intervals;
  ens.dim = setup.op.dim;
  ens.paths.resize(n, setup.reference_mean.values().size());
  ens.log_weights.resize(n);
#pragma omp parallel
  {
    Path path;
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) {
      importance_draw(setup, seed, i, path, ens.log_weights[i]);
      ens.paths.row(i) = path.values().transpose();
    }
  }
  return finish_importance(std::move(ens));
}

WeightedEnsemble importance_bridge_serial(const ProblemSpec& spec, const Grid& grid, int n,
                                          std::uint64_t seed, const AssemblyOptions& options) {
  if (n < 1) throw OracleError("ensemble size must be positive");
  const ImportanceSetup setup = importance_setup(spec, grid, options);
  WeightedEnsemble ens;
  ens.intervals = grid.intervals;
  ens.dim = setup.op.dim;
  ens.paths.resize(n, setup.reference_mean.values().size());
  ens.log_weights.resize(n);
  Path path;
  for (int i = 0; i < n; ++i) {
    importance_draw(setup, seed, i, path, ens.log_weights[i]);
    ens.paths.row(i) = path.values().transpose();
  }
  return finish_importance(std::move(ens));
}

WeightedEnsemble rejection_bridge(const ProblemSpec& spec, const Grid& grid,
                                  const RejectionOptions& options, std::uint64_t seed) {
  const auto* bridge = std::get_if<BridgeProblem>(&spec);
  if (!bridge) throw OracleError("rejection_bridge needs a bridge problem");
  if (!(options.tolerance > 0.0)) throw OracleError("tolerance must be positive");
  if (options.target_count < 1) throw OracleError("target count must be positive");
  const int d = bridge->mats.dim();
  const int M = grid.intervals;

  WeightedEnsemble ens;
  ens.intervals = M;
  ens.dim = d;
  std::vector<Vector> kept;
  kept.reserve(static_cast<std::size_t>(options.target_count));

  // Proposals are generated in rounds; proposal i uses stream i, so the
  // accepted set does not depend on the thread count.
  const int threads = omp_get_max_threads();
  const long round = std::max<long>(256, 64L * threads);
  long proposals = 0;
  long accepted = 0;
  std::vector<char> ok(static_cast<std::size_t>(round));
  std::vector<Vector> paths(static_cast<std::size_t>(round));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(round));
  while (static_cast<int>(kept.size()) < options.target_count) {
#pragma omp parallel for schedule(static)
    for (long j = 0; j < round; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      try {
        RandomStream rng(seed, static_cast<std::uint64_t>(proposals + j));
        SimulatedPath sim = simulate_sde(spec, grid, rng, options.simulation);
        const double miss = (sim.x.node(M) - bridge->end).cwiseAbs().maxCoeff();
        ok[jj] = miss <= options.tolerance;
        if (ok[jj]) paths[jj] = sim.x.values();
      } catch (...) {
        errors[jj] = std::current_exception();
        ok[jj] = 0;
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (long j = 0; j < round; ++j) {
      ++proposals;
      if (!ok[static_cast<std::size_t>(j)]) continue;
      ++accepted;
      if (static_cast<int>(kept.size()) < options.target_count) {
        kept.push_back(paths[static_cast<std::size_t>(j)]);
      }
    }
    const double rate = static_cast<double>(accepted) / static_cast<double>(proposals);
    if (proposals >= 10000 && rate < options.min_acceptance) {
      std::ostringstream msg;
      msg << "rejection acceptance rate " << rate << " below " << options.min_acceptance
          << "; widen the tolerance or use importance_bridge";
      throw OracleError(msg.str());
    }
    if (proposals >= options.max_proposals && static_cast<int>(kept.size()) < options.target_count) {
      std::ostringstream msg;
      msg << "rejection sampler reached " << proposals << " proposals with " << kept.size()
          << " accepted paths";
      throw OracleError(msg.str());
    }
  }
  ens.paths.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(M + 1) * d);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    ens.paths.row(static_cast<Eigen::Index>(i)) = kept[i].transpose();
  }
  ens.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposals);
  return ens;
}

namespace {

struct MalaChainOutput {
  Matrix paths;
  long accepted = 0;
  long steps = 0;
};

MalaChainOutput mala_chain(const TargetMeasure& target, double h, std::uint64_t seed,
                           std::uint64_t stream, const MalaOptions& options, long burn_in) {
  const DiscreteOperator& op = target.op();
  RandomStream rng(seed, stream);
  Path x = options.initial ? op.embed(op.free_part(*options.initial))
                           : mean_path(target.spec(), target.grid(), op);
  Path prop = x;
  const auto n = op.unknowns();
  Vector gx(n), gp(n), xi(n);
  double lx = target.log_density(x);
  target.gradient(x, gx);
  const double s = std::sqrt(2.0 * h);

  MalaChainOutput out;
  const long recorded = (options.steps - burn_in) / options.thin;
  out.paths.resize(recorded, x.values().size());
  long row = 0;
  for (long t = 1; t <= options.steps; ++t) {
    rng.fill_normal(xi);
    auto xf = op.free_part(x);
    auto pf = op.free_part(prop);
    pf = xf + h * gx + s * xi;
    const double lp = target.log_density(prop);
    target.gradient(prop, gp);
    // log q(x | prop) - log q(prop | x)
    const double fwd = xi.squaredNorm();
    const double back = (xf - pf - h * gp).squaredNorm() / (s * s);
    const double log_ratio = lp - lx - 0.5 * back + 0.5 * fwd;
    if (std::isfinite(lp) && std::log(rng.uniform()) < log_ratio) {
      xf = pf;
      lx = lp;
      gx.swap(gp);
      if (t > burn_in) ++out.accepted;
    } else {
      pf = xf;
    }
    if (t <= burn_in) continue;
    ++out.steps;
    if ((t - burn_in) % options.thin == 0) out.paths.row(row++) = x.values().transpose();
  }
  return out;
}

}  // namespace

WeightedEnsemble mala_oracle(std::shared_ptr<const TargetMeasure> target, double h,
                             std::uint64_t seed, const MalaOptions& options) {
  if (!(h > 0.0)) throw OracleError("MALA step must be positive");
  if (options.steps < 1 || options.thin < 1 || options.chains < 1) {
    throw OracleError("MALA needs positive steps, thinning and chain count");
  }
  const long burn_in = options.burn_in >= 0 ? options.burn_in : options.steps / 10;
  if (burn_in >= options.steps) throw OracleError("MALA burn-in must be smaller than steps");

  std::vector<MalaChainOutput> chains(static_cast<std::size_t>(options.chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(options.chains));
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < options.chains; ++c) {
    try {
      chains[static_cast<std::size_t>(c)] =
          mala_chain(*target, h, seed, static_cast<std::uint64_t>(c), options, burn_in);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  WeightedEnsemble ens;
  ens.intervals = target->grid().intervals;
  ens.dim = target->op().dim;
  ens.correlated = true;
  Eigen::Index rows = 0;
  long accepted = 0, steps = 0;
  for (const auto& c : chains) {
    rows += c.paths.rows();
    accepted += c.accepted;
    steps += c.steps;
  }
  ens.paths.resize(rows, chains.front().paths.cols());
  Eigen::Index at = 0;
  for (const auto& c : chains) {
    ens.paths.middleRows(at, c.paths.rows()) = c.paths;
    at += c.paths.rows();
  }
  ens.acceptance_rate = steps > 0 ? static_cast<double>(accepted) / static_cast<double>(steps) : 0.0;
  if (ens.acceptance_rate < 0.1 || ens.acceptance_rate > 0.9) {
    std::ostringstream msg;
    msg << "MALA acceptance rate " << ens.acceptance_rate << " outside [0.1, 0.9]; retune the step";
    ens.warnings.push_back(msg.str());
  }
  return ens;
}

SmootherResult rts_smoother(const SmoothingProblem& problem, const Grid& grid) {
  const Potential& V = *problem.potential;
  const LogAlpha& la = *problem.log_alpha;
  if (!V.is_quadratic() || !la.is_quadratic()) {
    throw OracleError("rts_smoother needs a quadratic potential and a quadratic log alpha");
  }
  if (problem.observations.intervals() != grid.intervals) {
    throw OracleError("observations do not match the grid");
  }
  const int d = problem.signal.dim();
  const int M = grid.intervals;
  const double du = grid.du;
  const Vector zero = Vector::Zero(d);
  const Matrix& Sigma = problem.signal.BBt;
  const Matrix I = Matrix::Identity(d, d);

  const Matrix HV = V.hessian(zero);
  Vector gv(d), ga(d);
  V.gradient(zero, gv);
  la.gradient(zero, ga);
  // x_{m+1} = F x_m + c + w_m,  w_m ~ N(0, Sigma du)
  const Matrix F = I - du * Sigma * HV;
  const Vector c = -du * Sigma * gv;
  const Matrix Qn = Sigma * du;
  const Matrix H = problem.A21 * du;
  const Matrix Rn = problem.B22 * problem.B22.transpose() * du;

  // dY_m = H (x_m + x_{m+1}) / 2 + v_m = Hm x_m + H c / 2 + e_m, with e_m
  // correlated to w_m. Conditioning w_m on e_m gives an equivalent model
  //   x_{m+1} = Ft x_m + c + J (dY_m - H c / 2) + wt_m,  wt_m ~ N(0, Qt)
  // whose noises are independent, so the plain filter and smoother apply.
  const Matrix Hm = 0.5 * H * (I + F);
  const Matrix Rm = Rn + 0.25 * H * Qn * H.transpose();
  const Matrix C = 0.5 * Qn * H.transpose();
  const Eigen::LLT<Matrix> rl(Rm);
  const Matrix J = rl.solve(C.transpose()).transpose();
  const Matrix Ft = F - J * Hm;
  Matrix Qt = Qn - J * C.transpose();
  Qt = 0.5 * (Qt + Qt.transpose());

  const Matrix P0inv = HV - la.hessian(zero);
  Eigen::LLT<Matrix> llt0(P0inv);
  if (llt0.info() != Eigen::Success) throw OracleError("initial law is not normalizable");

  std::vector<Vector> mf(M + 1), mp(M + 1), obs(M);
  std::vector<Matrix> Pf(M + 1), Pp(M + 1);
  for (int m = 0; m < M; ++m) {
    obs[m] = problem.observations.increments.row(m).transpose() - 0.5 * H * c;
  }
  mp[0] = llt0.solve(Vector(ga - gv));
  Pp[0] = llt0.solve(I);
  for (int m = 0; m <= M; ++m) {
    if (m > 0) {
      mp[m] = Ft * mf[m - 1] + c + J * obs[m - 1];
      Pp[m] = Ft * Pf[m - 1] * Ft.transpose() + Qt;
    }
    mf[m] = mp[m];
    Pf[m] = Pp[m];
    if (m < M) {
      const Matrix S = Hm * Pf[m] * Hm.transpose() + Rm;
      const Eigen::LLT<Matrix> gain(S);
      const Matrix K = gain.solve(Hm * Pf[m]).transpose();
      mf[m] += K * (obs[m] - Hm * mf[m]);
      Pf[m] -= K * S * K.transpose();
      Pf[m] = 0.5 * (Pf[m] + Pf[m].transpose());
    }
  }
  SmootherResult out{Path(M, d), Path(M, d)};
  Vector ms = mf[M];
  Matrix Ps = Pf[M];
  out.mean.node(M) = ms;
  out.variance.node(M) = Ps.diagonal();
  for (int m = M - 1; m >= 0; --m) {
    const Eigen::LLT<Matrix> pl(Pp[m + 1]);
    const Matrix G = pl.solve(Ft * Pf[m]).transpose();
    ms = mf[m] + G * (ms - mp[m + 1]);
    Ps = Pf[m] + G * (Ps - Pp[m + 1]) * G.transpose();
    out.mean.node(m) = ms;
    out.variance.node(m) = Ps.diagonal();
  }
  return out;
}

GaussianMoments gaussian_reference_moments(const ProblemSpec& spec, const Grid& grid,
                                           const AssemblyOptions& options) {
  if (!log_u_is_quadratic(spec)) {
    throw OracleError("gaussian_reference_moments needs an exactly quadratic log U");
  }
  if (grid.intervals > 256) throw OracleError("dense Gaussian moments are limited to M <= 256");
  const DiscreteOperator op = assemble_precision(spec, grid, options);
  const Matrix total = op.precision.to_dense() + log_u_negative_hessian(spec, grid, op).to_dense();
  Eigen::LLT<Matrix> llt(total);
  if (llt.info() != Eigen::Success) {
    throw OracleError("total precision is not positive definite; the problem is ill-posed");
  }
  const Path drift = log_u_gradient(spec, grid, op.boundary_values);
  const Vector rhs = op.free_part(drift) + op.forcing;

  GaussianMoments out;
  out.first_free = op.first_free;
  out.mean = op.embed(llt.solve(rhs));
  out.covariance = llt.solve(Matrix::Identity(total.rows(), total.cols()));
  out.variance = op.embed(out.covariance.diagonal());
  for (int m = 0; m <= grid.intervals; ++m) {
    if (m < op.first_free || m > op.last_free) out.variance.node(m).setZero();
  }
  return out;
}

ReferenceSummary summarize_gaussian(const GaussianMoments& moments) {
  ReferenceSummary out;
  out.intervals = moments.mean.intervals();
  out.dim = moments.mean.dim();
  for (int m = 0; m < moments.mean.node_count(); ++m) {
    for (int k = 0; k < out.dim; ++k) {
      out.estimates.push_back({mean_name(m, k), moments.mean.at(m, k), 0.0});
      out.estimates.push_back({variance_name(m, k), moments.variance.at(m, k), 0.0});
    }
  }
  return out;
}

}  // namespace pathlangevin
