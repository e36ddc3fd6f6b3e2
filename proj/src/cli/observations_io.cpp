#include "pathlangevin/cli/observations_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace pathlangevin::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || !std::isfinite(v)) {
    throw IoError(where + ": '" + text + "' is not a finite number");
  }
  return v;
}

}  // namespace

Observations load_observations(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open observation file");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty observation file");
  const auto header = split(line);
  if (header.size() < 2) throw IoError(path + ":1: need a leading column and at least one value column");
  const bool nodes = header[0] == "u";
  if (!nodes && header[0] != "cell") {
    throw IoError(path + ":1: first column must be 'u' (node values) or 'cell' (increments)");
  }
  const auto width = static_cast<Eigen::Index>(header.size() - 1);
  std::vector<double> lead;
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (static_cast<Eigen::Index>(cells.size()) != width + 1) {
      throw IoError(where + ": expected " + std::to_string(width + 1) + " columns");
    }
    lead.push_back(parse_number(cells[0], where));
    std::vector<double> row;
    for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(parse_number(cells[j], where));
    rows.push_back(std::move(row));
  }
  const auto count = static_cast<int>(rows.size());
  const int expected = nodes ? grid.intervals + 1 : grid.intervals;
  if (count != expected) {
    std::ostringstream msg;
    msg << path << ": " << count << " data rows, expected " << expected << " for M = "
        << grid.intervals;
    throw IoError(msg.str());
  }
  Matrix values(count, width);
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < width; ++j) values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (!nodes) {
    for (int i = 0; i < count; ++i) {
      if (lead[static_cast<std::size_t>(i)] != i) {
        throw IoError(path + ": cell column must read 0, 1, ..., M-1");
      }
    }
    return Observations::from_increments(std::move(values));
  }
  for (int i = 0; i < count; ++i) {
    const double u = lead[static_cast<std::size_t>(i)];
    if (i > 0 && !(u > lead[static_cast<std::size_t>(i - 1)])) {
      throw IoError(path + ": u column is not increasing");
    }
    if (std::abs(u - grid.nodes[i]) > 1e-9) {
      std::ostringstream msg;
      msg << path << ": u = " << u << " does not match grid node " << grid.nodes[i];
      throw IoError(msg.str());
    }
  }
  try {
    return Observations::from_node_values(values);
  } catch (const ModelError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void save_observations(const std::string& path, const Observations& obs) {
  std::ofstream out(path);
  if (!out) throw IoError(path + ": cannot write observation file");
  out << "cell";
  for (int j = 0; j < obs.dim(); ++j) out << ",dY_" << (j + 1);
  out << "\n";
  char buf[40];
  for (int i = 0; i < obs.intervals(); ++i) {
    out << i;
    for (int j = 0; j < obs.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", obs.increments(i, j));
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace pathlangevin::cli
