#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ranklab {

/// Minimum-cost perfect matching for an n x n cost matrix (row-major).
/// Returns column[row]. Hungarian method with potentials, O(n^3).
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);

}  // namespace ranklab
