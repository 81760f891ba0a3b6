#pragma once

#include <vector>

namespace ocs::eval3d {

/// Hungarian assignment minimizing total cost over an n x m matrix
/// (cost[i * m + j]). Returns, per row, the assigned column or -1.
std::vector<int> hungarian_assign(const std::vector<double>& cost, std::size_t n,
                                  std::size_t m);

}  // namespace ocs::eval3d
