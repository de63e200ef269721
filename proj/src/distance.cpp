#include "bdmm/distance.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace bdmm {
namespace detail {

Mat d1_cost_matrix(const Configuration& small, const Configuration& big) {
  const int nx = small.size();
  const int ny = big.size();
  Mat cost = Mat::Ones(ny, ny);  // padding rows keep cost 1
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (small[i].label == big[j].label) {
        const double dist = (small[i].location - big[j].location).norm();
        cost(i, j) = std::min(dist, 1.0);
      }
    }
  }
  return cost;
}

// Hungarian method with potentials, shortest augmenting paths, O(n^3).
std::vector<int> min_cost_assignment(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
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
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> cols(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j]) cols[static_cast<size_t>(p[j] - 1)] = j - 1;
  }
  return cols;
}

std::vector<int> min_cost_assignment_bruteforce(const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = assignment_cost(cost, perm);
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double c = assignment_cost(cost, perm);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  }
  return best;
}

double assignment_cost(const Mat& cost, const std::vector<int>& cols) {
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(cols.size()); ++i)
    total += cost(i, cols[static_cast<size_t>(i)]);
  return total;
}

}  // namespace detail

namespace {

// Id-free content key; fixes the matrix orientation for equal cardinalities
// so that d1(x, y) and d1(y, x) run the identical computation.
std::vector<std::vector<double>> content_key(const Configuration& c) {
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<size_t>(c.size()));
  for (const auto& p : c) {
    std::vector<double> row{static_cast<double>(p.label)};
    for (int k = 0; k < p.location.size(); ++k) row.push_back(p.location[k]);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

double d1_distance(const Configuration& x, const Configuration& y) {
  const Configuration* small = &x;
  const Configuration* big = &y;
  if (small->size() > big->size() ||
      (small->size() == big->size() && content_key(y) < content_key(x)))
    std::swap(small, big);
  const int nx = small->size();
  const int ny = big->size();
  if (ny == 0) return 0.0;  // both empty
  if (nx == 0) return 1.0;

  const Mat cost = detail::d1_cost_matrix(*small, *big);
  const std::vector<int> cols = (ny <= 8) ? detail::min_cost_assignment_bruteforce(cost)
                                          : detail::min_cost_assignment(cost);
  // Sum only over real rows; padding rows account for the (ny - nx) term.
  double matched = 0.0;
  for (int i = 0; i < nx; ++i) matched += cost(i, cols[static_cast<size_t>(i)]);
  return (matched + static_cast<double>(ny - nx)) / static_cast<double>(ny);
}

}  // namespace bdmm
