#pragma once

#include "mane/dataset.hpp"
#include "mane/embedding.hpp"
#include "mane/types.hpp"

#include <vector>

namespace mane {

/// Top principal axes of a point set.
struct Projection {
  Vector mean;                 // n
  RowMatrix axes;              // n x d, orthonormal columns
  Vector explained_variance;   // d, descending
  bool degenerate = false;     // rank < d; trailing axes are an arbitrary orthonormal completion
  int iterations = 0;

  Index input_dim() const { return axes.rows(); }
  Index output_dim() const { return axes.cols(); }
};

inline constexpr int kPcaMaxIterations = 500;
inline constexpr double kPcaTolerance = 1e-9;
inline constexpr double kDefaultSpread = 10.0;

/// Principal axes of `points` by subspace iteration on the sample covariance
/// with Rayleigh-Ritz extraction; converged leading axes are locked and
/// deflated out of the working block. The start block is drawn from a fixed
/// seed. Each axis is signed so that its largest-magnitude entry is positive.
Projection pca_axes(const RowMatrix& points, Index d);

/// PCA of the seed rows shared by `datasets`. With fewer than two seed rows
/// the union of all extended datasets is used instead.
Projection seed_projection(const std::vector<ExtendedDataset>& datasets, Index d);

/// (x - mean) * axes for every row.
RowMatrix project(const RowMatrix& points, const Projection& proj);

/// Projects every dataset and rescales all coordinates by one factor so the
/// largest absolute coordinate equals `spread`. Anchors are written once.
AlignedEmbedding project_init(const std::vector<ExtendedDataset>& datasets, const Projection& proj,
                              double spread = kDefaultSpread);

/// The linear baseline: the same projection without rescaling.
AlignedEmbedding pca_baseline(const std::vector<ExtendedDataset>& datasets, const Projection& proj);

}  // namespace mane
