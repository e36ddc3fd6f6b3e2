#include "pathlangevin/cli/outputs.hpp"

#include "pathlangevin/cli/observations_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pathlangevin::cli {

namespace {

std::string number(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void emit(const nlohmann::json& v, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + nlohmann::json(it.key()).dump() + ": ";
        emit(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        emit(v[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += number(v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

std::string format_json(const nlohmann::json& value) {
  std::string out;
  emit(value, 0, out);
  out += "\n";
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << content;
  if (!out) throw IoError(path + ": write failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string samples_csv(const std::vector<const Matrix*>& samples, const Grid& grid, int dim) {
  std::string out = "sample_index,u";
  for (int k = 0; k < dim; ++k) out += ",component_" + std::to_string(k + 1);
  out += "\n";
  long index = 0;
  for (const Matrix* m : samples) {
    for (Eigen::Index i = 0; i < m->rows(); ++i, ++index) {
      for (int node = 0; node <= grid.intervals; ++node) {
        out += std::to_string(index) + "," + fmt(grid.nodes[node]);
        for (int k = 0; k < dim; ++k) {
          out += "," + fmt((*m)(i, static_cast<Eigen::Index>(node) * dim + k));
        }
        out += "\n";
      }
    }
  }
  return out;
}

std::string path_csv(const Path& path, const Grid& grid) {
  std::string out = "u";
  for (int k = 0; k < path.dim(); ++k) out += ",component_" + std::to_string(k + 1);
  out += "\n";
  for (int m = 0; m <= grid.intervals; ++m) {
    out += fmt(grid.nodes[m]);
    for (int k = 0; k < path.dim(); ++k) out += "," + fmt(path.at(m, k));
    out += "\n";
  }
  return out;
}

std::string marginals_csv(const ReferenceSummary& summary) {
  std::string out = "name,value,log_weight\n";
  char buf[40];
  for (const auto& m : summary.marginals) {
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", m.values[i]);
      out += "\"" + m.name + "\"," + buf + ",";
      if (!m.log_weights.empty()) {
        std::snprintf(buf, sizeof buf, "%.17g", m.log_weights[i]);
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

void read_marginals_csv(const std::string& text, ReferenceSummary& summary) {
  std::stringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line.rfind("name,value,log_weight", 0) != 0) throw IoError("marginals.csv: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto q = line.find('"', 1);
    if (line[0] != '"' || q == std::string::npos) throw IoError("marginals.csv: bad row");
    const std::string name = line.substr(1, q - 1);
    const std::string rest = line.substr(q + 2);
    const auto comma = rest.find(',');
    const double value = std::strtod(rest.substr(0, comma).c_str(), nullptr);
    const std::string lw = comma == std::string::npos ? "" : rest.substr(comma + 1);
    MarginalSample* target = nullptr;
    for (auto& m : summary.marginals)
      if (m.name == name) target = &m;
    if (!target) {
      summary.marginals.push_back({name, {}, {}});
      target = &summary.marginals.back();
    }
    target->values.push_back(value);
    if (!lw.empty() && lw != "\r") target->log_weights.push_back(std::strtod(lw.c_str(), nullptr));
  }
}

std::vector<Functional> monitored_functionals(const Grid& grid, int dim,
                                              const std::vector<int>& nodes) {
  std::vector<Functional> out;
  for (int m : nodes) {
    for (int k = 0; k < dim; ++k) {
      out.push_back({"x[" + std::to_string(m) + "," + std::to_string(k) + "]",
                     [m, k](const Path& p) { return p.at(m, k); }});
    }
  }
  const Vector w = grid.weights;
  for (int k = 0; k < dim; ++k) {
    out.push_back({"integral[" + std::to_string(k) + "]", [w, k](const Path& p) {
                     double s = 0.0;
                     for (int m = 0; m < p.node_count(); ++m) s += w[m] * p.at(m, k);
                     return s;
                   }});
  }
  out.push_back({"energy", [w](const Path& p) {
                   double s = 0.0;
                   for (int m = 0; m < p.node_count(); ++m) s += w[m] * p.node(m).squaredNorm();
                   return s;
                 }});
  return out;
}

ReferenceSummary pool_chains(const std::vector<ChainResult>& results,
                             const ChainOptions& options) {
  ReferenceSummary pooled = summarize_chain(results.front(), options);
  const double k = static_cast<double>(results.size());
  if (results.size() == 1) return pooled;
  for (auto& e : pooled.estimates) {
    e.value /= k;
    e.se = e.se * e.se;
  }
  for (std::size_t c = 1; c < results.size(); ++c) {
    const ReferenceSummary s = summarize_chain(results[c], options);
    for (std::size_t i = 0; i < s.estimates.size(); ++i) {
      pooled.estimates[i].value += s.estimates[i].value / k;
      pooled.estimates[i].se += s.estimates[i].se * s.estimates[i].se;
    }
    for (std::size_t i = 0; i < s.marginals.size(); ++i) {
      auto& dst = pooled.marginals[i].values;
      dst.insert(dst.end(), s.marginals[i].values.begin(), s.marginals[i].values.end());
    }
  }
  for (auto& e : pooled.estimates) e.se = std::sqrt(e.se) / k;
  return pooled;
}

nlohmann::json estimates_json(const ReferenceSummary& summary) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& e : summary.estimates) {
    out[e.name] = {{"value", e.value}, {"se", e.se}};
  }
  return out;
}

ReferenceSummary estimates_from_json(const nlohmann::json& summary) {
  ReferenceSummary out;
  out.intervals = summary.at("intervals").get<int>();
  out.dim = summary.at("dim").get<int>();
  for (auto it = summary.at("estimates").begin(); it != summary.at("estimates").end(); ++it) {
    const auto& v = it.value();
    auto get = [](const nlohmann::json& x) {
      return x.is_null() ? std::nan("") : x.get<double>();
    };
    out.estimates.push_back({it.key(), get(v.at("value")), get(v.at("se"))});
  }
  return out;
}

namespace {

nlohmann::json config_echo(const Settings& settings) {
  return {{"toml", to_toml(settings)}};
}

}  // namespace

nlohmann::json chain_summary_json(const Settings& settings,
                                  const std::vector<ChainResult>& results,
                                  const ReferenceSummary& pooled) {
  nlohmann::json out;
  out["kind"] = "chain";
  out["config"] = config_echo(settings);
  out["seed"] = settings.run.seed;
  out["intervals"] = pooled.intervals;
  out["dim"] = pooled.dim;
  out["estimates"] = estimates_json(pooled);
  bool diverged = false;
  long diverged_step = -1;
  long samples = 0;
  nlohmann::json chains = nlohmann::json::array();
  for (std::size_t c = 0; c < results.size(); ++c) {
    const ChainSummary& s = results[c].summary;
    samples += s.samples;
    if (s.diverged && !diverged) {
      diverged = true;
      diverged_step = s.diverged_step;
    }
    nlohmann::json chain;
    chain["chain"] = c;
    chain["samples"] = s.samples;
    chain["steps"] = s.steps;
    chain["burn_in"] = s.burn_in;
    chain["thin"] = s.thin;
    chain["delta"] = s.delta;
    chain["diverged"] = s.diverged;
    chain["diverged_step"] = s.diverged ? nlohmann::json(s.diverged_step) : nlohmann::json();
    chain["message"] = s.message;
    nlohmann::json nodes = nlohmann::json::array();
    const Grid grid = Grid::make(pooled.intervals);
    for (int m = 0; m <= pooled.intervals; ++m) {
      for (int k = 0; k < pooled.dim; ++k) {
        nodes.push_back({{"u", grid.nodes[m]},
                         {"component", k + 1},
                         {"mean", s.mean.at(m, k)},
                         {"mean_se", s.mean_se.at(m, k)},
                         {"variance", s.variance.at(m, k)},
                         {"variance_se", s.variance_se.at(m, k)}});
      }
    }
    chain["nodes"] = nodes;
    nlohmann::json functionals = nlohmann::json::object();
    for (const auto& f : s.functionals) {
      functionals[f.name] = {{"value", f.estimate.value},
                             {"se", f.estimate.se},
                             {"batches", f.estimate.batches},
                             {"iact", f.iact}};
    }
    chain["functionals"] = functionals;
    chains.push_back(chain);
  }
  out["chains"] = chains;
  out["samples"] = samples;
  out["no_samples"] = samples == 0;
  out["diverged"] = diverged;
  out["diverged_step"] = diverged ? nlohmann::json(diverged_step) : nlohmann::json();
  return out;
}

nlohmann::json oracle_summary_json(const Settings& settings, const std::string& method,
                                   const ReferenceSummary& summary, double n_eff,
                                   double acceptance_rate, long size,
                                   const std::vector<std::string>& warnings) {
  nlohmann::json out;
  out["kind"] = "oracle";
  out["method"] = method;
  out["config"] = config_echo(settings);
  out["seed"] = settings.run.seed;
  out["intervals"] = summary.intervals;
  out["dim"] = summary.dim;
  out["estimates"] = estimates_json(summary);
  out["n_eff"] = n_eff;
  out["acceptance_rate"] = acceptance_rate;
  out["size"] = size;
  out["warnings"] = warnings;
  return out;
}

nlohmann::json compare_json(const CompareReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"functional", r.name},
                    {"chain", r.chain_value},
                    {"chain_se", r.chain_se},
                    {"oracle", r.oracle_value},
                    {"oracle_se", r.oracle_se},
                    {"z", r.z},
                    {"pass", r.pass}});
  }
  nlohmann::json ks = nlohmann::json::array();
  for (const auto& r : report.ks_rows) {
    ks.push_back({{"marginal", r.name}, {"ks", r.ks}, {"pass", r.pass}});
  }
  return {{"rows", rows},
          {"ks", ks},
          {"gates", {{"z_max", report.gates.z_max}, {"ks_max", report.gates.ks_max}}},
          {"max_abs_z", report.max_abs_z()},
          {"pass", report.all_pass()}};
}

ReferenceSummary read_run(const std::string& dir) {
  const std::filesystem::path base(dir);
  const std::string summary_path = (base / "summary.json").string();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(summary_path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(summary_path + ": " + e.what());
  }
  ReferenceSummary out;
  try {
    out = estimates_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(summary_path + ": " + e.what());
  }
  const auto marginals = base / "marginals.csv";
  if (std::filesystem::exists(marginals)) read_marginals_csv(read_text(marginals.string()), out);
  return out;
}

}  // namespace pathlangevin::cli
