#pragma once

#include "pathlangevin/model.hpp"

#include <stdexcept>
#include <string>

namespace pathlangevin::cli {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads observations from CSV with a header row. A first column named "u"
/// means node values Y(u_m), m = 0..M, which are differenced (u must match
/// the grid to 1e-9 and Y_0 must be 0). A first column named "cell" means
/// increments dY_m, m = 0..M-1, used as is. Throws IoError.
Observations load_observations(const std::string& path, const Grid& grid);

/// Writes increments as "cell,dY_1,..." with 17 significant digits, so that
/// loading returns the same doubles.
void save_observations(const std::string& path, const Observations& obs);

}  // namespace pathlangevin::cli
