#include "pathlangevin/diagnostics.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace pathlangevin {

ErgodicEstimate ergodic_average(std::span<const double> series, long burn_in, int batches) {
  if (burn_in < 0) throw DiagnosticsError("burn-in must be non-negative");
  if (batches < 1) throw DiagnosticsError("need at least one batch");
  const long total = static_cast<long>(series.size());
  const long n = total - burn_in;
  if (n < batches) {
    std::ostringstream msg;
    msg << "series too short: " << n << " values after burn-in for " << batches << " batches";
    throw DiagnosticsError(msg.str());
  }
  const auto body = series.subspan(static_cast<std::size_t>(burn_in));
  ErgodicEstimate est;
  est.burn_in = burn_in;
  est.samples = n;
  est.batches = batches;
  double sum = 0.0;
  for (double v : body) sum += v;
  est.value = sum / static_cast<double>(n);

  const long size = n / batches;
  std::vector<double> means(static_cast<std::size_t>(batches));
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (long i = 0; i < size; ++i) s += body[static_cast<std::size_t>(b * size + i)];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(size);
  }
  if (batches == 1) {
    est.se = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= batches;
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  est.se = std::sqrt(ss / (batches - 1) / batches);
  return est;
}

double iact(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) return 1.0;
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centered(n);
  bool constant = true;
  for (std::size_t i = 0; i < n; ++i) {
    centered[i] = series[i] - mean;
    if (series[i] != series[0]) constant = false;
  }
  if (constant) return 1.0;

  std::size_t padded = 1;
  while (padded < 2 * n) padded <<= 1;
  centered.resize(padded, 0.0);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, centered);
  for (auto& f : freq) f = std::complex<double>(std::norm(f), 0.0);
  std::vector<double> acov;
  fft.inv(acov, freq);
  const double c0 = acov[0];
  if (!(c0 > 0.0)) return 1.0;

  // Geyer: pair sums Gamma_k = rho_2k + rho_2k+1, stop at the first
  // non-positive pair, force monotone decrease.
  double sum = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (acov[2 * k] + acov[2 * k + 1]) / c0;
    if (pair <= 0.0) break;
    pair = std::min(pair, previous);
    previous = pair;
    sum += pair;
  }
  return std::max(1.0, 2.0 * sum - 1.0);
}

namespace {

struct WeightedPoint {
  double value;
  double weight;
  int side;
};

std::vector<double> normalized_weights(std::span<const double> log_w, std::size_t n) {
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  if (log_w.empty()) return w;
  if (log_w.size() != n) throw DiagnosticsError("log-weights and samples differ in length");
  const double top = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(top)) throw DiagnosticsError("log-weights are not finite");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(log_w[i] - top);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

}  // namespace

double ks_distance(std::span<const double> a, std::span<const double> log_wa,
                   std::span<const double> b, std::span<const double> log_wb) {
  if (a.empty() || b.empty()) throw DiagnosticsError("KS distance needs nonempty samples");
  const auto wa = normalized_weights(log_wa, a.size());
  const auto wb = normalized_weights(log_wb, b.size());
  std::vector<WeightedPoint> pts;
  pts.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) pts.push_back({a[i], wa[i], 0});
  for (std::size_t i = 0; i < b.size(); ++i) pts.push_back({b[i], wb[i], 1});
  std::sort(pts.begin(), pts.end(),
            [](const WeightedPoint& l, const WeightedPoint& r) { return l.value < r.value; });
  double fa = 0.0, fb = 0.0, best = 0.0;
  std::size_t i = 0;
  while (i < pts.size()) {
    const double v = pts[i].value;
    while (i < pts.size() && pts[i].value == v) {
      (pts[i].side == 0 ? fa : fb) += pts[i].weight;
      ++i;
    }
    best = std::max(best, std::abs(fa - fb));
  }
  return std::min(best, 1.0);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  return ks_distance(a, {}, b, {});
}

double effective_sample_size(std::span<const double> log_weights) {
  if (log_weights.empty()) return 0.0;
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double s1 = 0.0, s2 = 0.0;
  for (double lw : log_weights) {
    const double w = std::exp(lw - top);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

const Estimate* ReferenceSummary::find(const std::string& name) const {
  for (const auto& e : estimates)
    if (e.name == name) return &e;
  return nullptr;
}

const MarginalSample* ReferenceSummary::find_marginal(const std::string& name) const {
  for (const auto& m : marginals)
    if (m.name == name) return &m;
  return nullptr;
}

bool CompareReport::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  for (const auto& r : ks_rows)
    if (!r.pass) return false;
  return true;
}

double CompareReport::max_abs_z() const {
  double z = 0.0;
  for (const auto& r : rows) {
    if (std::isnan(r.z)) return std::numeric_limits<double>::infinity();
    z = std::max(z, std::abs(r.z));
  }
  return z;
}

CompareReport compare_report(const ReferenceSummary& chain, const ReferenceSummary& oracle,
                             const std::vector<std::string>& functionals,
                             const GateConfig& gates) {
  if (chain.intervals != oracle.intervals || chain.dim != oracle.dim) {
    std::ostringstream msg;
    msg << "grid mismatch: chain M=" << chain.intervals << " d=" << chain.dim
        << ", oracle M=" << oracle.intervals << " d=" << oracle.dim;
    throw DiagnosticsError(msg.str());
  }
  CompareReport report;
  report.gates = gates;

  std::vector<std::string> names = functionals;
  if (names.empty()) {
    for (const auto& e : chain.estimates)
      if (oracle.find(e.name)) names.push_back(e.name);
  }
  for (const auto& name : names) {
    const Estimate* c = chain.find(name);
    const Estimate* o = oracle.find(name);
    if (!c || !o) throw DiagnosticsError("functional '" + name + "' missing from a summary");
    CompareRow row;
    row.name = name;
    row.chain_value = c->value;
    row.chain_se = c->se;
    row.oracle_value = o->value;
    row.oracle_se = o->se;
    const double diff = c->value - o->value;
    const double se = std::sqrt(c->se * c->se + o->se * o->se);
    if (se > 0.0) {
      row.z = diff / se;
    } else {
      row.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    row.pass = std::abs(row.z) <= gates.z_max;
    report.rows.push_back(row);
  }
  for (const auto& m : chain.marginals) {
    const MarginalSample* o = oracle.find_marginal(m.name);
    if (!o || m.values.empty() || o->values.empty()) continue;
    KsRow row;
    row.name = m.name;
    row.ks = ks_distance(m.values, m.log_weights, o->values, o->log_weights);
    row.pass = row.ks <= gates.ks_max;
    report.ks_rows.push_back(row);
  }
  return report;
}

namespace {
std::string indexed(const char* prefix, int node, int component) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s[%d,%d]", prefix, node, component);
  return buf;
}
}  // namespace

std::string mean_name(int node, int component) { return indexed("mean", node, component); }
std::string variance_name(int node, int component) { return indexed("var", node, component); }
std::string marginal_name(int node, int component) { return indexed("node", node, component); }

}  // namespace pathlangevin
