#include "pathlangevin/sampler.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

namespace pathlangevin {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::semi_implicit ? "semi_implicit" : "preconditioned";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "semi_implicit") return Scheme::semi_implicit;
  if (name == "preconditioned") return Scheme::preconditioned;
  throw std::invalid_argument("unknown scheme '" + name +
                              "' (expected semi_implicit or preconditioned)");
}

double default_delta(Scheme scheme, const Grid& grid) {
  return scheme == Scheme::semi_implicit ? 0.1 * grid.du : 0.1;
}

void SamplerConfig::validate() const {
  if (delta < 0.0 || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
  if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("theta must lie in [0, 1]");
  if (total_steps < 0) throw std::invalid_argument("total steps must be non-negative");
  if (thin < 1) throw std::invalid_argument("thinning must be at least 1");
  if (total_steps > 0 && resolved_burn_in() >= total_steps) {
    throw std::invalid_argument("burn-in must be smaller than the total number of steps");
  }
  if (divergence_threshold < 0.0) throw std::invalid_argument("divergence threshold must be >= 0");
  if (!(robin_epsilon > 0.0)) throw std::invalid_argument("robin epsilon must be positive");
  if (batches < 1) throw std::invalid_argument("batches must be at least 1");
}

double SamplerConfig::resolved_delta(const Grid& grid) const {
  return delta > 0.0 ? delta : default_delta(scheme, grid);
}

long SamplerConfig::resolved_burn_in() const {
  return burn_in >= 0 ? burn_in : total_steps / 10;
}

void MomentAccumulator::reset(Eigen::Index size) {
  sum = Vector::Zero(size);
  sum_sq = Vector::Zero(size);
  count = 0;
}

void MomentAccumulator::add(const Vector& x) {
  sum += x;
  sum_sq += x.cwiseAbs2();
  ++count;
}

Vector MomentAccumulator::mean() const { return sum / static_cast<double>(count); }

Vector MomentAccumulator::variance() const {
  const Vector m = mean();
  return (sum_sq / static_cast<double>(count) - m.cwiseAbs2()).cwiseMax(0.0);
}

ChainState::ChainState(Path x_, std::uint64_t seed, std::uint64_t stream)
    : x(std::move(x_)), rng(seed, stream), watermark(x.sup_norm()) {
  moments.reset(x.values().size());
}

namespace {

BlockTridiagonal shifted_identity(const BlockTridiagonal& precision, double scale) {
  BlockTridiagonal out = precision;
  out *= scale;
  out.add_identity(1.0);
  return out;
}

}  // namespace

SemiImplicitStepper::SemiImplicitStepper(std::shared_ptr<const TargetMeasure> target,
                                         double delta, double theta)
    : target_(std::move(target)),
      delta_(delta),
      theta_(theta),
      factor_(shifted_identity(target_->op().precision, delta * theta)) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const auto n = target_->op().unknowns();
  drift_.resize(n);
  rhs_.resize(n);
  noise_.resize(n);
  work_.resize(n);
}

void SemiImplicitStepper::step(ChainState& state) {
  const DiscreteOperator& op = target_->op();
  auto x = op.free_part(state.x);
  target_->log_u_gradient_free(state.x, drift_);
  drift_ += op.forcing;
  op.precision.multiply(x, work_);
  state.rng.fill_normal(noise_);
  rhs_ = x;
  rhs_ -= (delta_ * (1.0 - theta_)) * work_;
  rhs_ += delta_ * drift_;
  rhs_ += std::sqrt(2.0 * delta_) * noise_;
  factor_.solve(VecRef(rhs_));
  x = rhs_;
  state.has_y = false;
  ++state.step;
  state.watermark = std::max(state.watermark, state.x.sup_norm());
}

Path solve_preconditioner(const TargetMeasure& target, const CholeskyFactor& leading_factor,
                          const Path& x) {
  const DiscreteOperator& op = target.op();
  Vector rhs(op.unknowns());
  target.log_u_gradient_free(x, rhs);
  rhs += op.forcing;
  if (!op.lower_order_zero) {
    Vector tmp(op.unknowns());
    op.lower_order.multiply(op.free_part(x), tmp);
    rhs -= tmp;
  }
  leading_factor.solve(VecRef(rhs));
  return op.embed(rhs);
}

Path solve_preconditioner(const TargetMeasure& target, const Path& x) {
  return solve_preconditioner(target, cholesky_banded(target.op().leading), x);
}

PreconditionedStepper::PreconditionedStepper(std::shared_ptr<const TargetMeasure> target,
                                             double delta)
    : target_(std::move(target)), delta_(delta), factor_(target_->op().leading) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  drift_.resize(target_->op().unknowns());
  work_.resize(target_->op().unknowns());
}

Vector PreconditionedStepper::noise(RandomStream& rng) const {
  Vector z = sample_from_precision(factor_, rng);
  z *= std::sqrt(-std::expm1(-2.0 * delta_));
  return z;
}

void PreconditionedStepper::refresh(ChainState& state) const {
  state.y = solve_preconditioner(*target_, factor_, state.x);
  state.has_y = true;
}

void PreconditionedStepper::step(ChainState& state) {
  const DiscreteOperator& op = target_->op();
  if (!state.has_y) refresh(state);
  auto x = op.free_part(state.x);
  const auto y = op.free_part(state.y);
  state.rng.fill_normal(work_);
  factor_.solve_upper(VecRef(work_));
  const double decay = std::exp(-delta_);
  const double scale = std::sqrt(-std::expm1(-2.0 * delta_));
  x = y + decay * (x - y) + scale * work_;
  ++state.step;
  state.watermark = std::max(state.watermark, state.x.sup_norm());
  if (state.x.all_finite()) refresh(state);
}

ChainState step_semi_implicit(ChainState state, const TargetMeasure& target, double delta,
                              double theta) {
  auto shared = std::shared_ptr<const TargetMeasure>(&target, [](const TargetMeasure*) {});
  SemiImplicitStepper(shared, delta, theta).step(state);
  return state;
}

ChainState step_preconditioned(ChainState state, const TargetMeasure& target, double delta) {
  auto shared = std::shared_ptr<const TargetMeasure>(&target, [](const TargetMeasure*) {});
  PreconditionedStepper(shared, delta).step(state);
  return state;
}

namespace {

ErgodicEstimate estimate_or_short(std::span<const double> series, int batches) {
  if (static_cast<long>(series.size()) >= batches && batches > 1) {
    return ergodic_average(series, 0, batches);
  }
  ErgodicEstimate est;
  est.samples = static_cast<long>(series.size());
  double sum = 0.0;
  for (double v : series) sum += v;
  est.value = series.empty() ? std::numeric_limits<double>::quiet_NaN()
                             : sum / static_cast<double>(series.size());
  est.se = std::numeric_limits<double>::quiet_NaN();
  est.batches = 0;
  return est;
}

void summarize(ChainResult& result, const std::vector<Functional>& functionals, int batches,
               const Path& initial) {
  ChainSummary& s = result.summary;
  const long n = result.samples.rows();
  s.samples = n;
  const int M = initial.intervals();
  const int d = initial.dim();
  s.mean = Path(M, d);
  s.mean_se = Path(M, d);
  s.variance = Path(M, d);
  s.variance_se = Path(M, d);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (n == 0) {
    s.mean = initial;
    s.mean_se.values().setConstant(nan);
    s.variance.values().setConstant(nan);
    s.variance_se.values().setConstant(nan);
  } else {
    std::vector<double> col(static_cast<std::size_t>(n));
    std::vector<double> sq(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < result.samples.cols(); ++j) {
      for (long i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = result.samples(i, j);
      const ErgodicEstimate m = estimate_or_short(col, batches);
      for (long i = 0; i < n; ++i) {
        const double c = col[static_cast<std::size_t>(i)] - m.value;
        sq[static_cast<std::size_t>(i)] = c * c;
      }
      const ErgodicEstimate v = estimate_or_short(sq, batches);
      s.mean.values()[j] = m.value;
      s.mean_se.values()[j] = m.se;
      s.variance.values()[j] = v.value;
      s.variance_se.values()[j] = v.se;
    }
  }
  for (std::size_t f = 0; f < functionals.size(); ++f) {
    FunctionalSummary fs;
    fs.name = functionals[f].name;
    std::vector<double> series(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      series[static_cast<std::size_t>(i)] = result.functional_series(i, static_cast<Eigen::Index>(f));
    }
    fs.estimate = estimate_or_short(series, batches);
    fs.iact = iact(series);
    s.functionals.push_back(fs);
  }
}

}  // namespace

ChainResult run_chain(std::shared_ptr<const TargetMeasure> target, const SamplerConfig& config,
                      std::uint64_t seed, const ChainOptions& options, std::uint64_t stream) {
  config.validate();
  const Grid& grid = target->grid();
  const DiscreteOperator& op = target->op();
  const double delta = config.resolved_delta(grid);
  const long burn_in = config.total_steps == 0 ? 0 : config.resolved_burn_in();

  const Path mean = mean_path(target->spec(), grid, op);
  Path start = mean;
  if (options.initial) {
    const Path& init = *options.initial;
    if (init.intervals() != grid.intervals || init.dim() != op.dim) {
      throw ModelError("initial path does not match the grid");
    }
    start = op.embed(op.free_part(init));
  }
  const double threshold = config.divergence_threshold > 0.0
                               ? config.divergence_threshold
                               : 1e3 * (1.0 + mean.sup_norm());

  ChainResult result;
  ChainSummary& s = result.summary;
  s.steps = config.total_steps;
  s.burn_in = burn_in;
  s.thin = config.thin;
  s.delta = delta;

  const long recorded = (config.total_steps - burn_in) / config.thin;
  const auto width = start.values().size();
  result.samples.resize(recorded, width);
  result.sample_steps.reserve(static_cast<std::size_t>(recorded));
  result.functional_series.resize(recorded, static_cast<Eigen::Index>(options.functionals.size()));
  const int d = op.dim;
  result.marginal_series.resize(recorded,
                                static_cast<Eigen::Index>(options.marginal_nodes.size()) * d);

  ChainState state(start, seed, stream);
  std::unique_ptr<SemiImplicitStepper> semi;
  std::unique_ptr<PreconditionedStepper> pre;
  if (config.total_steps > 0) {
    if (config.scheme == Scheme::semi_implicit) {
      semi = std::make_unique<SemiImplicitStepper>(target, delta, config.theta);
    } else {
      pre = std::make_unique<PreconditionedStepper>(target, delta);
    }
  }

  long row = 0;
  try {
    for (long t = 1; t <= config.total_steps; ++t) {
      if (semi) semi->step(state);
      else pre->step(state);
      if (!state.x.all_finite() || state.watermark > threshold) {
        std::ostringstream msg;
        msg << "chain diverged at step " << t << ": sup norm exceeded " << threshold;
        throw DivergenceError(msg.str(), t);
      }
      if (t <= burn_in) continue;
      state.moments.add(state.x.values());
      if ((t - burn_in) % config.thin != 0) continue;
      result.samples.row(row) = state.x.values().transpose();
      result.sample_steps.push_back(t);
      for (std::size_t f = 0; f < options.functionals.size(); ++f) {
        result.functional_series(row, static_cast<Eigen::Index>(f)) =
            options.functionals[f].evaluate(state.x);
      }
      for (std::size_t k = 0; k < options.marginal_nodes.size(); ++k) {
        for (int c = 0; c < d; ++c) {
          result.marginal_series(row, static_cast<Eigen::Index>(k) * d + c) =
              state.x.at(options.marginal_nodes[k], c);
        }
      }
      ++row;
    }
  } catch (const DivergenceError& e) {
    s.diverged = true;
    s.diverged_step = e.step();
    s.message = e.what();
    result.samples.conservativeResize(row, width);
    result.functional_series.conservativeResize(row, result.functional_series.cols());
    result.marginal_series.conservativeResize(row, result.marginal_series.cols());
  }

  summarize(result, options.functionals, config.batches, start);
  if (s.samples == 0 && !s.diverged) s.message = "no samples";
  result.final_state = state.x;
  result.moments = state.moments;
  if (!options.keep_samples) result.samples.resize(0, width);
  return result;
}

ChainResult run_chain(const ProblemSpec& spec, const Grid& grid, const SamplerConfig& config,
                      std::uint64_t seed, const ChainOptions& options) {
  AssemblyOptions assembly;
  assembly.robin_epsilon = config.robin_epsilon;
  auto target = std::make_shared<const TargetMeasure>(spec, grid, assembly);
  return run_chain(target, config, seed, options);
}

std::vector<ChainResult> run_chains(std::shared_ptr<const TargetMeasure> target,
                                    const SamplerConfig& config, std::uint64_t seed, int chains,
                                    const ChainOptions& options) {
  if (chains < 1) throw std::invalid_argument("need at least one chain");
  std::vector<ChainResult> results(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < chains; ++c) {
    try {
      results[static_cast<std::size_t>(c)] =
          run_chain(target, config, seed, options, static_cast<std::uint64_t>(c));
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

ReferenceSummary summarize_chain(const ChainResult& result, const ChainOptions& options) {
  const ChainSummary& s = result.summary;
  ReferenceSummary out;
  out.intervals = s.mean.intervals();
  out.dim = s.mean.dim();
  for (int m = 0; m < s.mean.node_count(); ++m) {
    for (int k = 0; k < out.dim; ++k) {
      out.estimates.push_back({mean_name(m, k), s.mean.at(m, k), s.mean_se.at(m, k)});
      out.estimates.push_back({variance_name(m, k), s.variance.at(m, k), s.variance_se.at(m, k)});
    }
  }
  for (const auto& f : s.functionals) {
    out.estimates.push_back({f.name, f.estimate.value, f.estimate.se});
  }
  for (std::size_t k = 0; k < options.marginal_nodes.size(); ++k) {
    for (int c = 0; c < out.dim; ++c) {
      MarginalSample ms;
      ms.name = marginal_name(options.marginal_nodes[k], c);
      const auto col = result.marginal_series.col(static_cast<Eigen::Index>(k) * out.dim + c);
      ms.values.assign(col.data(), col.data() + col.size());
      out.marginals.push_back(std::move(ms));
    }
  }
  return out;
}

}  // namespace pathlangevin
