#include "mane/distance.hpp"

#include <limits>

namespace mane {

BlockedSquaredDistances::BlockedSquaredDistances(const RowMatrix& points, Index block_rows)
    : points_(points), block_rows_(block_rows), sq_norms_(points.rowwise().squaredNorm()) {
  if (sq_norms_.size() > 0) max_sq_norm_ = sq_norms_.maxCoeff();
}

double BlockedSquaredDistances::error_bound(Index i) const {
  constexpr double u = std::numeric_limits<double>::epsilon();
  const double dims = static_cast<double>(points_.cols()) + 4.0;
  return 4.0 * dims * u * (sq_norms_[i] + max_sq_norm_) + std::numeric_limits<double>::min();
}

void BlockedSquaredDistances::for_each_row(
    const std::function<void(Index, std::span<const double>)>& visit) const {
  const Index n = points_.rows();
  RowMatrix block;
  for (Index start = 0; start < n; start += block_rows_) {
    const Index rows = std::min(block_rows_, n - start);
    block.noalias() = points_.middleRows(start, rows) * points_.transpose();
    block *= -2.0;
    block.rowwise() += sq_norms_.transpose();
    block.colwise() += sq_norms_.segment(start, rows);
    for (Index r = 0; r < rows; ++r) {
      const Index i = start + r;
      block(r, i) = std::numeric_limits<double>::infinity();
      visit(i, {block.data() + r * n, static_cast<std::size_t>(n)});
    }
  }
}

}  // namespace mane
