#pragma once

#include "mane/dataset.hpp"
#include "mane/embedding.hpp"
#include "mane/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mane {

inline constexpr Index kTrustworthinessK = 5;

/// Sum over points of max(0, r(i, j) - k) for the k nearest embedding
/// neighbors j of i, r(i, j) being j's 1-based rank among i's neighbors in the
/// original space. Ranks and neighbors order ties by index.
std::int64_t trustworthiness_penalty(const RowMatrix& high, const RowMatrix& low, Index k);

/// 1 - 2 / (n k (2n - 3k - 1)) * penalty. Throws ParameterError when the
/// normalizer is not positive.
double trustworthiness(const RowMatrix& high, const RowMatrix& low, Index k = kTrustworthinessK);

/// Residual norm between X and the optimal similarity transform (translation,
/// uniform scale, rotation or reflection) of Y, after centering both and
/// scaling each to unit Frobenius norm. Identical inputs give exactly 0.
double procrustes_distance(const RowMatrix& x, const RowMatrix& y);

/// Largest Euclidean distance between the coordinates one anchor gets in two
/// different dataset views. `views[m]` holds dataset m's rows, anchors first.
double anchor_drift(const std::vector<RowMatrix>& views, Index n_shared);
double anchor_drift(const AlignedEmbedding& embedding);

template <class T>
struct Measured {
  std::optional<T> value;
  std::string reason;  // why value is missing
};

struct PairProcrustes {
  Index first;
  Index second;
  Measured<double> distance;
};

struct MetricReport {
  Index k_used = kTrustworthinessK;
  std::vector<Measured<double>> trustworthiness_per_dataset;
  Measured<double> trustworthiness_union;
  std::vector<PairProcrustes> procrustes_shared;
  Measured<double> anchor_drift;

  std::string to_json() const;
};

/// Per-dataset coordinates, one view per partition of `plan`, anchors first.
/// The union is scored only when every anchor has one location across views
/// (zero drift); anchors are then counted once.
MetricReport evaluate(const LabeledMatrix& data, const SplitPlan& plan, const std::vector<RowMatrix>& views,
                      Index k = kTrustworthinessK);

}  // namespace mane
