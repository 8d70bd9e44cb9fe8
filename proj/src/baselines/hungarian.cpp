#include <algorithm>
#include <cmath>
#include <limits>

#include "ev2r/baselines.hpp"
#include "ev2r/error.hpp"
#include "ev2r/kernels.hpp"

namespace ev2r::baselines {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  CostMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw Error(ErrorKind::InvalidArgument, "cost matrix rows differ in length");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Assignment hungarian_assign(const CostMatrix& costs) {
  if (costs.empty()) throw Error(ErrorKind::InvalidArgument, "empty cost matrix");
  const std::size_t n = std::max(costs.rows(), costs.cols());
  CostMatrix a(n, n, kPaddingCost);
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    for (std::size_t c = 0; c < costs.cols(); ++c) {
      const double v = costs(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "cost entries must be finite and non-negative");
      }
      a(r, c) = v;
    }
  }

  // Shortest augmenting path with row/column potentials, 1-based.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
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
      for (std::size_t j = 0; j <= n; ++j) {
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
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_padded(n, 0);
  for (std::size_t j = 1; j <= n; ++j) row_to_padded[p[j] - 1] = j - 1;

  Assignment out;
  out.row_to_col.assign(costs.rows(), -1);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = row_to_padded[r];
    out.total_cost += a(r, c);
    if (r < costs.rows() && c < costs.cols()) out.row_to_col[r] = static_cast<int>(c);
  }
  return out;
}

double hungarian_meteor(const EvidenceSet& candidate, const EvidenceSet& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  std::vector<TokenSequence> cand;
  std::vector<TokenSequence> ref;
  for (const QAPair& qa : candidate.items) cand.push_back(tokenize(item_text(qa)));
  for (const QAPair& qa : reference.items) ref.push_back(tokenize(item_text(qa)));

  const CostMatrix scores = kernels::pairwise_meteor(cand, ref);
  CostMatrix costs(scores.rows(), scores.cols());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    for (std::size_t c = 0; c < scores.cols(); ++c) costs(r, c) = 1.0 - scores(r, c);
  }
  const Assignment assignment = hungarian_assign(costs);

  // Matched scores summed in a canonical order so permuted inputs give the
  // same floating-point result.
  std::vector<double> matched;
  for (std::size_t r = 0; r < assignment.row_to_col.size(); ++r) {
    const int c = assignment.row_to_col[r];
    if (c >= 0) matched.push_back(scores(r, static_cast<std::size_t>(c)));
  }
  std::sort(matched.begin(), matched.end());
  double sum = 0.0;
  for (double s : matched) sum += s;
  return sum / static_cast<double>(std::max(candidate.size(), reference.size()));
}

}  // namespace ev2r::baselines
