#include "csc/hungarian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace csc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Classic O(n^3) assignment with potentials on a square matrix.
// Returns row assigned to each column (0-based).
std::vector<int> solve_square(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<size_t>(n) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      const int i0 = p[static_cast<size_t>(j0)];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = a(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_of_col(static_cast<size_t>(n));
  for (int j = 1; j <= n; ++j) row_of_col[static_cast<size_t>(j - 1)] = p[static_cast<size_t>(j)] - 1;
  return row_of_col;
}

Eigen::MatrixXd pad_square(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(std::max(cost.rows(), cost.cols()));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  a.topLeftCorner(cost.rows(), cost.cols()) = cost;
  return a;
}

double optimal_cost(const Eigen::MatrixXd& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) return 0.0;
  const Eigen::MatrixXd a = pad_square(cost);
  const std::vector<int> row_of_col = solve_square(a);
  double total = 0.0;
  for (int j = 0; j < static_cast<int>(a.cols()); ++j) total += a(row_of_col[static_cast<size_t>(j)], j);
  return total;
}

}  // namespace

double hungarian_cost(const Eigen::MatrixXd& cost) {
  if (!cost.allFinite()) throw std::invalid_argument("hungarian: non-finite costs");
  return optimal_cost(cost);
}

std::vector<std::pair<int, int>> hungarian(const Eigen::MatrixXd& cost) {
  const int M = static_cast<int>(cost.rows());
  const int N = static_cast<int>(cost.cols());
  if (M == 0 || N == 0) return {};
  if (!cost.allFinite()) throw std::invalid_argument("hungarian: non-finite costs");

  const Eigen::MatrixXd a = pad_square(cost);
  const int n = static_cast<int>(a.rows());
  const std::vector<int> row_of_col = solve_square(a);

  std::vector<int> col_of_row(static_cast<size_t>(n), -1);
  for (int j = 0; j < n; ++j) col_of_row[static_cast<size_t>(row_of_col[static_cast<size_t>(j)])] = j;

  if (n > 64) {
    std::vector<std::pair<int, int>> out;
    for (int r = 0; r < M; ++r)
      if (col_of_row[static_cast<size_t>(r)] < N) out.emplace_back(r, col_of_row[static_cast<size_t>(r)]);
    return out;
  }

  // Lexicographic refinement: fix each real row to the smallest column
  // that keeps the remaining problem optimal.
  double scale = std::max(1.0, cost.cwiseAbs().maxCoeff() * n);
  const double eps = 1e-9 * scale;

  std::vector<char> row_alive(static_cast<size_t>(M), 1), col_alive(static_cast<size_t>(N), 1);
  double remaining = optimal_cost(cost);
  std::vector<std::pair<int, int>> out;

  auto reduced = [&](int skip_row, int skip_col) {
    std::vector<int> rs, cs;
    for (int r = 0; r < M; ++r)
      if (row_alive[static_cast<size_t>(r)] && r != skip_row) rs.push_back(r);
    for (int c = 0; c < N; ++c)
      if (col_alive[static_cast<size_t>(c)] && c != skip_col) cs.push_back(c);
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rs.size()), static_cast<Eigen::Index>(cs.size()));
    for (size_t i = 0; i < rs.size(); ++i)
      for (size_t j = 0; j < cs.size(); ++j) sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cost(rs[i], cs[j]);
    return sub;
  };

  for (int r = 0; r < M; ++r) {
    bool fixed = false;
    for (int c = 0; c < N && !fixed; ++c) {
      if (!col_alive[static_cast<size_t>(c)]) continue;
      const double rest = optimal_cost(reduced(r, c));
      if (std::abs(cost(r, c) + rest - remaining) <= eps) {
        out.emplace_back(r, c);
        row_alive[static_cast<size_t>(r)] = 0;
        col_alive[static_cast<size_t>(c)] = 0;
        remaining -= cost(r, c);
        fixed = true;
      }
    }
    if (!fixed) {
      // Row stays unmatched only when the optimum does not use it
      // (possible when M > N).
      const double rest = optimal_cost(reduced(r, -1));
      if (std::abs(rest - remaining) <= eps) row_alive[static_cast<size_t>(r)] = 0;
      // otherwise numerical slack missed the match; fall back to the
      // unrefined solution for this row
      else {
        out.emplace_back(r, col_of_row[static_cast<size_t>(r)]);
        row_alive[static_cast<size_t>(r)] = 0;
        col_alive[static_cast<size_t>(col_of_row[static_cast<size_t>(r)])] = 0;
        remaining -= cost(r, col_of_row[static_cast<size_t>(r)]);
      }
    }
  }
  return out;
}

}  // namespace csc
