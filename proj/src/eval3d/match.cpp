#include "ocs/eval3d/match.hpp"

#include <limits>

namespace ocs::eval3d {

// Kuhn-Munkres with potentials, O(n^2 m). Rows are padded to a square problem
// implicitly by allowing unassigned columns.
std::vector<int> hungarian_assign(const std::vector<double>& cost, std::size_t n,
                                  std::size_t m) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t dim = std::max(n, m);
  auto at = [&](std::size_t i, std::size_t j) -> double {
    if (i >= n || j >= m) return 0.0;  // padding
    return cost[i * m + j];
  };

  std::vector<double> u(dim + 1, 0.0), v(dim + 1, 0.0);
  std::vector<std::size_t> p(dim + 1, 0), way(dim + 1, 0);
  for (std::size_t i = 1; i <= dim; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(dim + 1, inf);
    std::vector<char> used(dim + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= dim; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= dim; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> assign(n, -1);
  for (std::size_t j = 1; j <= dim; ++j) {
    if (p[j] == 0) continue;
    const std::size_t i = p[j] - 1;
    if (i < n && j - 1 < m) assign[i] = static_cast<int>(j - 1);
  }
  return assign;
}

}  // namespace ocs::eval3d
