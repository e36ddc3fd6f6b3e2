#include "pathlangevin/cli/config.hpp"

#include "pathlangevin/cli/observations_io.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace pathlangevin::cli {

namespace {

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

bool operator==(const Settings& x, const Settings& y) {
  const auto& p = x.problem;
  const auto& q = y.problem;
  const bool problem = p.kind == q.kind && p.dim == q.dim && same(p.A, q.A) && same(p.B, q.B) &&
                       same(p.start, q.start) && same(p.end, q.end) && same(p.A21, q.A21) &&
                       same(p.B11, q.B11) && same(p.B22, q.B22) &&
                       p.observations == q.observations && p.log_alpha == q.log_alpha &&
                       same(p.alpha_precision, q.alpha_precision);
  const auto& v = x.potential;
  const auto& w = y.potential;
  const bool potential = v.kind == w.kind && v.a == w.a && v.b == w.b && same(v.Q, w.Q);
  const auto& s = x.sampler;
  const auto& t = y.sampler;
  const bool sampler = s.scheme == t.scheme && s.delta == t.delta && s.theta == t.theta &&
                       s.burn_in == t.burn_in && s.total_steps == t.total_steps &&
                       s.thin == t.thin && s.divergence_threshold == t.divergence_threshold &&
                       s.robin_epsilon == t.robin_epsilon && s.batches == t.batches;
  const auto& o = x.oracle;
  const auto& r = y.oracle;
  const bool oracle = o.method == r.method && o.samples == r.samples &&
                      o.tolerance == r.tolerance && o.substeps == r.substeps &&
                      o.mala_step == r.mala_step && o.mala_steps == r.mala_steps &&
                      o.mala_burn_in == r.mala_burn_in && o.mala_thin == r.mala_thin &&
                      o.mala_chains == r.mala_chains;
  const bool run = x.run.seed == y.run.seed && x.run.chains == y.run.chains &&
                   x.run.strict == y.run.strict && x.run.marginal_nodes == y.run.marginal_nodes;
  const bool gates = x.gates.z_max == y.gates.z_max && x.gates.ks_max == y.gates.ks_max;
  return problem && potential && x.intervals == y.intervals && sampler && oracle && run && gates;
}

namespace {

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

const std::map<std::string, std::string>& synonyms() {
  static const std::map<std::string, std::string> table = {
      {"stepsize", "delta"},     {"step_size", "delta"},   {"dt", "delta"},
      {"h", "delta"},            {"step", "delta"},        {"iterations", "steps"},
      {"n_steps", "steps"},      {"nsteps", "steps"},      {"num_steps", "steps"},
      {"total_steps", "steps"},  {"burnin", "burn_in"},    {"warmup", "burn_in"},
      {"thinning", "thin"},      {"m", "intervals"},       {"n_intervals", "intervals"},
      {"nodes", "intervals"},    {"x_minus", "start"},     {"x0", "start"},
      {"x_plus", "end"},         {"x1", "end"},            {"type", "kind"},
      {"threads", "chains"},     {"n", "samples"},         {"tol", "tolerance"},
  };
  return table;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string suggest_key(const std::string& key, const std::vector<std::string>& allowed) {
  const std::string k = lower(key);
  const auto it = synonyms().find(k);
  if (it != synonyms().end() &&
      std::find(allowed.begin(), allowed.end(), it->second) != allowed.end()) {
    return it->second;
  }
  std::string best;
  std::size_t best_d = 3;
  for (const auto& a : allowed) {
    const std::size_t d = edit_distance(k, a);
    if (d < best_d) {
      best_d = d;
      best = a;
    }
  }
  return best;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const toml::node* node, const std::string& what) const {
    std::ostringstream msg;
    msg << source_;
    if (node) msg << ":" << node->source().begin.line;
    msg << ": " << what;
    throw ConfigError(msg.str());
  }

  void check_keys(const toml::table& table, const std::string& section,
                  const std::vector<std::string>& allowed) const {
    for (const auto& [key, node] : table) {
      const std::string k(key.str());
      if (std::find(allowed.begin(), allowed.end(), k) != allowed.end()) continue;
      std::string what = "unknown key '" + k + "'";
      if (!section.empty()) what += " in [" + section + "]";
      const std::string hint = suggest_key(k, allowed);
      if (!hint.empty()) what += "; did you mean '" + hint + "'?";
      fail(&node, what);
    }
  }

  const toml::table* section(const toml::table& root, const std::string& name) const {
    const toml::node* node = root.get(name);
    if (!node) return nullptr;
    if (!node->is_table()) fail(node, "[" + name + "] must be a table");
    return node->as_table();
  }

  double number(const toml::node& node, const std::string& key) const {
    if (auto v = node.value<double>()) return *v;
    fail(&node, "'" + key + "' must be a number");
  }

  template <class T>
  void get(const toml::table* t, const std::string& key, T& out) const {
    if (!t) return;
    const toml::node* node = t->get(key);
    if (!node) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node->value<bool>()) out = *v;
      else fail(node, "'" + key + "' must be true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node->value<std::string>()) out = *v;
      else fail(node, "'" + key + "' must be a string");
    } else if constexpr (std::is_same_v<T, double>) {
      out = number(*node, key);
    } else if constexpr (std::is_integral_v<T>) {
      if (!node->is_integer()) fail(node, "'" + key + "' must be an integer");
      const std::int64_t v = *node->value<std::int64_t>();
      if constexpr (std::is_unsigned_v<T>) {
        if (v < 0) fail(node, "'" + key + "' must be non-negative");
      }
      out = static_cast<T>(v);
    }
  }

  bool has(const toml::table* t, const std::string& key) const { return t && t->get(key); }

  Vector vector(const toml::table* t, const std::string& key) const {
    const toml::node* node = t ? t->get(key) : nullptr;
    if (!node) return {};
    if (node->is_number()) return Vector::Constant(1, number(*node, key));
    const toml::array* arr = node->as_array();
    if (!arr) fail(node, "'" + key + "' must be an array of numbers");
    Vector v(static_cast<Eigen::Index>(arr->size()));
    for (std::size_t i = 0; i < arr->size(); ++i) v[static_cast<Eigen::Index>(i)] = number((*arr)[i], key);
    return v;
  }

  Matrix matrix(const toml::table* t, const std::string& key) const {
    const toml::node* node = t ? t->get(key) : nullptr;
    if (!node) return {};
    if (node->is_number()) return Matrix::Constant(1, 1, number(*node, key));
    const toml::array* rows = node->as_array();
    if (!rows || rows->empty()) fail(node, "'" + key + "' must be an array of rows");
    Matrix m;
    for (std::size_t i = 0; i < rows->size(); ++i) {
      const toml::array* row = (*rows)[i].as_array();
      if (!row) fail(&(*rows)[i], "'" + key + "' rows must be arrays");
      if (i == 0) m.resize(static_cast<Eigen::Index>(rows->size()), static_cast<Eigen::Index>(row->size()));
      if (static_cast<Eigen::Index>(row->size()) != m.cols()) fail(&(*rows)[i], "'" + key + "' rows differ in length");
      for (std::size_t j = 0; j < row->size(); ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number((*row)[j], key);
      }
    }
    return m;
  }

  std::vector<int> int_list(const toml::table* t, const std::string& key) const {
    std::vector<int> out;
    const toml::node* node = t ? t->get(key) : nullptr;
    if (!node) return out;
    const toml::array* arr = node->as_array();
    if (!arr) fail(node, "'" + key + "' must be an array of integers");
    for (const auto& item : *arr) {
      if (!item.is_integer()) fail(&item, "'" + key + "' must contain integers");
      out.push_back(static_cast<int>(*item.value<std::int64_t>()));
    }
    return out;
  }

  const toml::node* node(const toml::table* t, const std::string& key) const {
    return t ? t->get(key) : nullptr;
  }

 private:
  std::string source_;
};

const std::vector<std::string> kSections = {"problem", "potential", "grid", "sampler",
                                            "oracle",  "run",       "compare"};
const std::vector<std::string> kProblemKeys = {
    "kind", "dim", "A", "B", "start", "end", "A21", "B11", "B22",
    "observations", "log_alpha", "alpha_precision"};
const std::vector<std::string> kPotentialKeys = {"kind", "a", "b", "Q"};
const std::vector<std::string> kGridKeys = {"intervals"};
const std::vector<std::string> kSamplerKeys = {"scheme", "delta", "theta", "burn_in", "steps",
                                               "thin", "divergence_threshold", "robin_epsilon",
                                               "batches"};
const std::vector<std::string> kOracleKeys = {"method",     "samples",      "tolerance",
                                              "substeps",   "mala_step",    "mala_steps",
                                              "mala_burn_in", "mala_thin", "mala_chains"};
const std::vector<std::string> kRunKeys = {"seed", "chains", "strict", "marginal_nodes"};
const std::vector<std::string> kCompareKeys = {"z_max", "ks_max"};

Settings read_settings(const toml::table& root, const Reader& r) {
  r.check_keys(root, "", kSections);
  Settings s;
  const auto* problem = r.section(root, "problem");
  const auto* potential = r.section(root, "potential");
  const auto* grid = r.section(root, "grid");
  const auto* sampler = r.section(root, "sampler");
  const auto* oracle = r.section(root, "oracle");
  const auto* run = r.section(root, "run");
  const auto* compare = r.section(root, "compare");
  if (!problem) r.fail(nullptr, "missing [problem] section");
  if (!potential) r.fail(nullptr, "missing [potential] section");
  r.check_keys(*problem, "problem", kProblemKeys);
  r.check_keys(*potential, "potential", kPotentialKeys);
  if (grid) r.check_keys(*grid, "grid", kGridKeys);
  if (sampler) r.check_keys(*sampler, "sampler", kSamplerKeys);
  if (oracle) r.check_keys(*oracle, "oracle", kOracleKeys);
  if (run) r.check_keys(*run, "run", kRunKeys);
  if (compare) r.check_keys(*compare, "compare", kCompareKeys);

  auto& p = s.problem;
  r.get(problem, "kind", p.kind);
  if (p.kind != "free_path" && p.kind != "bridge" && p.kind != "smoothing") {
    r.fail(r.node(problem, "kind"),
           "problem kind must be free_path, bridge or smoothing, got '" + p.kind + "'");
  }
  p.start = r.vector(problem, "start");
  p.end = r.vector(problem, "end");
  p.A = r.matrix(problem, "A");
  p.B = r.matrix(problem, "B");
  p.A21 = r.matrix(problem, "A21");
  p.B11 = r.matrix(problem, "B11");
  p.B22 = r.matrix(problem, "B22");
  r.get(problem, "observations", p.observations);
  r.get(problem, "log_alpha", p.log_alpha);
  p.alpha_precision = r.matrix(problem, "alpha_precision");

  int dim = 0;
  if (r.has(problem, "dim")) r.get(problem, "dim", dim);
  else if (p.start.size() > 0) dim = static_cast<int>(p.start.size());
  else if (p.A21.size() > 0) dim = static_cast<int>(p.A21.cols());
  else if (p.B11.size() > 0) dim = static_cast<int>(p.B11.rows());
  else dim = 1;
  if (dim < 1) r.fail(r.node(problem, "dim"), "'dim' must be positive");
  p.dim = dim;

  auto require_shape = [&](const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                           const std::string& key) {
    if (m.rows() != rows || m.cols() != cols) {
      std::ostringstream msg;
      msg << "'" << key << "' must be " << rows << " x " << cols << ", got " << m.rows() << " x "
          << m.cols();
      r.fail(r.node(problem, key), msg.str());
    }
  };
  auto require_length = [&](const Vector& v, const std::string& key) {
    if (v.size() == 0) r.fail(r.node(problem, "kind"),
                              "[problem] needs '" + key + "' for kind " + p.kind);
    if (v.size() != dim) r.fail(r.node(problem, key), "'" + key + "' must have dim entries");
  };

  if (p.kind == "smoothing") {
    if (p.observations.empty()) r.fail(r.node(problem, "kind"), "smoothing needs 'observations'");
    if (p.A21.size() == 0) r.fail(r.node(problem, "kind"), "smoothing needs 'A21'");
    if (p.A21.cols() != dim) require_shape(p.A21, p.A21.rows(), dim, "A21");
    if (p.B11.size() == 0) p.B11 = Matrix::Identity(dim, dim);
    if (p.B22.size() == 0) p.B22 = Matrix::Identity(p.A21.rows(), p.A21.rows());
    require_shape(p.B11, dim, dim, "B11");
    require_shape(p.B22, p.A21.rows(), p.A21.rows(), "B22");
    if (p.log_alpha != "stationary" && p.log_alpha != "gaussian") {
      r.fail(r.node(problem, "log_alpha"), "log_alpha must be 'stationary' or 'gaussian'");
    }
    if (p.log_alpha == "gaussian") {
      if (p.alpha_precision.size() == 0) p.alpha_precision = Matrix::Identity(dim, dim);
      require_shape(p.alpha_precision, dim, dim, "alpha_precision");
    }
    for (const char* key : {"A", "B", "start", "end"}) {
      if (r.has(problem, key)) r.fail(r.node(problem, key), std::string("'") + key + "' does not apply to smoothing");
    }
  } else {
    if (p.A.size() == 0) p.A = Matrix::Zero(dim, dim);
    if (p.B.size() == 0) p.B = Matrix::Identity(dim, dim);
    require_shape(p.A, dim, dim, "A");
    require_shape(p.B, dim, dim, "B");
    require_length(p.start, "start");
    if (p.kind == "bridge") require_length(p.end, "end");
    else if (p.end.size() > 0) r.fail(r.node(problem, "end"), "'end' does not apply to free_path");
    for (const char* key : {"A21", "B11", "B22", "observations", "log_alpha", "alpha_precision"}) {
      if (r.has(problem, key)) r.fail(r.node(problem, key), std::string("'") + key + "' applies to smoothing only");
    }
  }

  auto& v = s.potential;
  r.get(potential, "kind", v.kind);
  r.get(potential, "a", v.a);
  r.get(potential, "b", v.b);
  v.Q = r.matrix(potential, "Q");
  if (v.kind == "quadratic") {
    if (v.Q.size() == 0) v.Q = Matrix::Identity(dim, dim);
    if (v.Q.rows() != dim || v.Q.cols() != dim) r.fail(r.node(potential, "Q"), "'Q' must be dim x dim");
  } else if (v.kind == "double_well") {
    if (!(v.a > 0.0) || !(v.b > 0.0)) r.fail(r.node(potential, "kind"), "double_well needs a > 0 and b > 0");
  } else if (v.kind != "zero") {
    r.fail(r.node(potential, "kind"), "potential kind must be quadratic, double_well or zero");
  }
  if (v.kind != "quadratic" && r.has(potential, "Q")) r.fail(r.node(potential, "Q"), "'Q' applies to quadratic potentials only");
  if (v.kind != "double_well") {
    for (const char* key : {"a", "b"}) {
      if (r.has(potential, key)) r.fail(r.node(potential, key), std::string("'") + key + "' applies to double_well only");
    }
  }

  r.get(grid, "intervals", s.intervals);
  if (s.intervals < 2) r.fail(r.node(grid, "intervals"), "'intervals' must be at least 2");
  const Grid g = Grid::make(s.intervals);

  auto& c = s.sampler;
  std::string scheme = "semi_implicit";
  r.get(sampler, "scheme", scheme);
  try {
    c.scheme = scheme_from_string(scheme);
  } catch (const std::invalid_argument& e) {
    r.fail(r.node(sampler, "scheme"), e.what());
  }
  r.get(sampler, "delta", c.delta);
  r.get(sampler, "theta", c.theta);
  r.get(sampler, "steps", c.total_steps);
  r.get(sampler, "thin", c.thin);
  r.get(sampler, "divergence_threshold", c.divergence_threshold);
  r.get(sampler, "robin_epsilon", c.robin_epsilon);
  r.get(sampler, "batches", c.batches);
  if (c.delta == 0.0) c.delta = default_delta(c.scheme, g);
  if (r.has(sampler, "burn_in")) r.get(sampler, "burn_in", c.burn_in);
  else c.burn_in = c.total_steps / 10;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(r.node(sampler, "steps"), e.what());
  }

  auto& o = s.oracle;
  r.get(oracle, "method", o.method);
  r.get(oracle, "samples", o.samples);
  r.get(oracle, "tolerance", o.tolerance);
  r.get(oracle, "substeps", o.substeps);
  r.get(oracle, "mala_step", o.mala_step);
  r.get(oracle, "mala_steps", o.mala_steps);
  r.get(oracle, "mala_burn_in", o.mala_burn_in);
  r.get(oracle, "mala_thin", o.mala_thin);
  r.get(oracle, "mala_chains", o.mala_chains);
  const std::vector<std::string> methods = {"importance", "rejection", "mala", "gaussian", "rts"};
  if (std::find(methods.begin(), methods.end(), o.method) == methods.end()) {
    r.fail(r.node(oracle, "method"),
           "oracle method must be importance, rejection, mala, gaussian or rts");
  }
  if (o.mala_step == 0.0) o.mala_step = 0.1 * g.du * g.du;
  if (o.mala_burn_in < 0) o.mala_burn_in = o.mala_steps / 10;
  if (o.samples < 1 || o.substeps < 1 || o.mala_steps < 1 || o.mala_thin < 1 ||
      o.mala_chains < 1 || !(o.tolerance > 0.0) || !(o.mala_step > 0.0) ||
      o.mala_burn_in >= o.mala_steps) {
    r.fail(r.node(oracle, "method"), "invalid [oracle] settings");
  }

  r.get(run, "seed", s.run.seed);
  r.get(run, "chains", s.run.chains);
  r.get(run, "strict", s.run.strict);
  s.run.marginal_nodes = r.int_list(run, "marginal_nodes");
  if (s.run.chains < 1) r.fail(r.node(run, "chains"), "'chains' must be at least 1");
  if (s.run.marginal_nodes.empty()) s.run.marginal_nodes.push_back(s.intervals / 2);
  for (int m : s.run.marginal_nodes) {
    if (m < 0 || m > s.intervals) r.fail(r.node(run, "marginal_nodes"), "marginal node out of range");
  }

  r.get(compare, "z_max", s.gates.z_max);
  r.get(compare, "ks_max", s.gates.ks_max);
  if (!(s.gates.z_max > 0.0) || !(s.gates.ks_max > 0.0)) {
    r.fail(r.node(compare, "z_max"), "gates must be positive");
  }
  return s;
}

}  // namespace

ProblemSpec build_problem(const Settings& settings, const Grid& grid,
                          const std::string& base_dir) {
  const auto& p = settings.problem;
  const auto& v = settings.potential;
  PotentialPtr potential;
  if (v.kind == "quadratic") potential = make_quadratic_potential(v.Q);
  else if (v.kind == "double_well") potential = make_double_well_potential(p.dim, v.a, v.b);
  else potential = make_zero_potential(p.dim);

  if (p.kind == "free_path") {
    return FreePathProblem{MatrixSet::make(p.A, p.B), potential, p.start};
  }
  if (p.kind == "bridge") {
    return BridgeProblem{MatrixSet::make(p.A, p.B), potential, p.start, p.end};
  }
  std::filesystem::path obs_path(p.observations);
  if (obs_path.is_relative()) obs_path = std::filesystem::path(base_dir) / obs_path;
  Observations obs = load_observations(obs_path.string(), grid);
  LogAlphaPtr la = p.log_alpha == "gaussian" ? make_gaussian_log_alpha(p.alpha_precision)
                                             : make_stationary_log_alpha(potential);
  return SmoothingProblem::make(p.A21, p.B11, p.B22, potential, la, std::move(obs));
}

RunPlan parse_config_string(const std::string& text, const std::string& base_dir,
                            const std::string& source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source_name << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  const Reader reader(source_name);
  RunPlan plan;
  plan.settings = read_settings(root, reader);
  plan.base_dir = base_dir;
  plan.grid = Grid::make(plan.settings.intervals);
  try {
    plan.spec = build_problem(plan.settings, plan.grid, base_dir);
  } catch (const ModelError& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  return plan;
}

RunPlan parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::filesystem::path p(path);
  const std::string base = p.has_parent_path() ? p.parent_path().string() : ".";
  return parse_config_string(buf.str(), base, path);
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string vec(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out + "]";
}

std::string mat(const Matrix& m) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) out += (i ? ", " : "") + vec(m.row(i).transpose());
  return out + "]";
}

}  // namespace

std::string to_toml(const Settings& s) {
  std::ostringstream out;
  const auto& p = s.problem;
  out << "[problem]\n";
  out << "kind = " << quoted(p.kind) << "\n";
  out << "dim = " << p.dim << "\n";
  if (p.kind == "smoothing") {
    out << "A21 = " << mat(p.A21) << "\n";
    out << "B11 = " << mat(p.B11) << "\n";
    out << "B22 = " << mat(p.B22) << "\n";
    out << "observations = " << quoted(p.observations) << "\n";
    out << "log_alpha = " << quoted(p.log_alpha) << "\n";
    if (p.log_alpha == "gaussian") out << "alpha_precision = " << mat(p.alpha_precision) << "\n";
  } else {
    out << "A = " << mat(p.A) << "\n";
    out << "B = " << mat(p.B) << "\n";
    out << "start = " << vec(p.start) << "\n";
    if (p.kind == "bridge") out << "end = " << vec(p.end) << "\n";
  }
  const auto& v = s.potential;
  out << "\n[potential]\nkind = " << quoted(v.kind) << "\n";
  if (v.kind == "quadratic") out << "Q = " << mat(v.Q) << "\n";
  if (v.kind == "double_well") out << "a = " << num(v.a) << "\nb = " << num(v.b) << "\n";
  out << "\n[grid]\nintervals = " << s.intervals << "\n";
  const auto& c = s.sampler;
  out << "\n[sampler]\n";
  out << "scheme = " << quoted(to_string(c.scheme)) << "\n";
  out << "delta = " << num(c.delta) << "\n";
  out << "theta = " << num(c.theta) << "\n";
  out << "burn_in = " << c.burn_in << "\n";
  out << "steps = " << c.total_steps << "\n";
  out << "thin = " << c.thin << "\n";
  out << "divergence_threshold = " << num(c.divergence_threshold) << "\n";
  out << "robin_epsilon = " << num(c.robin_epsilon) << "\n";
  out << "batches = " << c.batches << "\n";
  const auto& o = s.oracle;
  out << "\n[oracle]\n";
  out << "method = " << quoted(o.method) << "\n";
  out << "samples = " << o.samples << "\n";
  out << "tolerance = " << num(o.tolerance) << "\n";
  out << "substeps = " << o.substeps << "\n";
  out << "mala_step = " << num(o.mala_step) << "\n";
  out << "mala_steps = " << o.mala_steps << "\n";
  out << "mala_burn_in = " << o.mala_burn_in << "\n";
  out << "mala_thin = " << o.mala_thin << "\n";
  out << "mala_chains = " << o.mala_chains << "\n";
  out << "\n[run]\n";
  out << "seed = " << s.run.seed << "\n";
  out << "chains = " << s.run.chains << "\n";
  out << "strict = " << (s.run.strict ? "true" : "false") << "\n";
  out << "marginal_nodes = [";
  for (std::size_t i = 0; i < s.run.marginal_nodes.size(); ++i) {
    out << (i ? ", " : "") << s.run.marginal_nodes[i];
  }
  out << "]\n";
  out << "\n[compare]\nz_max = " << num(s.gates.z_max) << "\nks_max = " << num(s.gates.ks_max)
      << "\n";
  return out.str();
}

}  // namespace pathlangevin::cli
