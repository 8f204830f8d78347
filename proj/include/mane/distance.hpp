#pragma once

#include "mane/types.hpp"

#include <functional>

namespace mane {

/// Squared Euclidean distances computed one block of query rows at a time via
/// ||x||^2 + ||y||^2 - 2 x.y. `error_bound(i)` bounds the absolute rounding
/// error of any entry in row i; callers fall back to squared_distance() inside
/// that band whenever an exact comparison matters.
class BlockedSquaredDistances {
 public:
  explicit BlockedSquaredDistances(const RowMatrix& points, Index block_rows = 256);

  /// Calls visit(i, row) for every point i in order; `row` holds the
  /// approximate squared distances from i to every point (row[i] is set to +inf).
  void for_each_row(const std::function<void(Index, std::span<const double>)>& visit) const;

  double error_bound(Index i) const;

 private:
  const RowMatrix& points_;
  Index block_rows_;
  Vector sq_norms_;
  double max_sq_norm_ = 0.0;
};

}  // namespace mane
