#pragma once

#include "mane/types.hpp"

#include <vector>

namespace mane {

/// Low-dimensional coordinates for M extended datasets that share N0 anchors.
///
/// Anchor coordinates are stored exactly once. Row i < N0 of every dataset's
/// view resolves to the same memory, so the anchors of all datasets are
/// identical at every point of an optimization, not merely at its end.
class AlignedEmbedding {
 public:
  AlignedEmbedding() = default;
  AlignedEmbedding(Index n_shared, const std::vector<Index>& private_sizes, Index dim);

  Index dim() const { return dim_; }
  Index n_shared() const { return anchors_.rows(); }
  Index n_datasets() const { return static_cast<Index>(private_.size()); }
  Index private_size(Index m) const { return private_.at(static_cast<std::size_t>(m)).rows(); }
  Index view_size(Index m) const { return n_shared() + private_size(m); }
  /// Anchors counted once plus every private point.
  Index union_size() const;

  /// Row i of dataset m's view (anchors first, then private points).
  double* row_ptr(Index m, Index i);
  const double* row_ptr(Index m, Index i) const;
  std::span<double> row(Index m, Index i) { return {row_ptr(m, i), static_cast<std::size_t>(dim_)}; }
  std::span<const double> row(Index m, Index i) const { return {row_ptr(m, i), static_cast<std::size_t>(dim_)}; }

  RowMatrix& anchor_block() { return anchors_; }
  const RowMatrix& anchor_block() const { return anchors_; }
  RowMatrix& private_block(Index m) { return private_.at(static_cast<std::size_t>(m)); }
  const RowMatrix& private_block(Index m) const { return private_.at(static_cast<std::size_t>(m)); }

  /// Copy of dataset m's view.
  RowMatrix view(Index m) const;
  /// Anchors once, then private blocks in dataset order.
  RowMatrix union_coordinates() const;

  bool all_finite() const;

 private:
  Index dim_ = 0;
  RowMatrix anchors_;
  std::vector<RowMatrix> private_;
};

}  // namespace mane
