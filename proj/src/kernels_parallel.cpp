#include "pathlangevin/kernels.hpp"

#include <omp.h>

#include <vector>

namespace pathlangevin::kernels::parallel {

double log_u(const LogUModel& model, const Path& path) {
  const int n = model.node_count();
  std::vector<double> terms(static_cast<std::size_t>(n));
#pragma omp parallel if (n >= kParallelNodeThreshold)
  {
    Workspace ws(model.dim());
#pragma omp for schedule(static)
    for (int m = 0; m < n; ++m) terms[m] = model.node_value(m, path.node(m), ws);
  }
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

void log_u_gradient(const LogUModel& model, const Path& path, int first, int last, VecRef out) {
  const int d = model.dim();
  const int n = last - first + 1;
#pragma omp parallel if (n >= kParallelNodeThreshold)
  {
    Workspace ws(d);
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) {
      model.node_gradient(first + i, path.node(first + i), ws,
                          out.segment(static_cast<Eigen::Index>(i) * d, d));
    }
  }
}

}  // namespace pathlangevin::kernels::parallel
