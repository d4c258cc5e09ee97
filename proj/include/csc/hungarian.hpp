#ifndef CSC_HUNGARIAN_HPP
#define CSC_HUNGARIAN_HPP

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace csc {

// Minimum-total-cost one-to-one partial matching of size min(M, N).
// Among optimal solutions, the returned pair list is the lexicographically
// lowest by (row, col) (exactly for matrices up to 64x64). Pairs are
// sorted by row. An empty matrix yields an empty matching.
std::vector<std::pair<int, int>> hungarian(const Eigen::MatrixXd& cost);

// Total cost of the optimal matching (no tie-break refinement).
double hungarian_cost(const Eigen::MatrixXd& cost);

}  // namespace csc

#endif
