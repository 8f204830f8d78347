#pragma once

#include "mane/dataset.hpp"
#include "mane/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mane {

/// k nearest neighbors per point, self excluded, ascending by (distance, index).
struct NeighborLists {
  IndexMatrix indices;  // N x k
  RowMatrix distances;  // N x k, Euclidean

  Index n_points() const { return indices.rows(); }
  Index k() const { return indices.cols(); }
};

/// Exact brute-force Euclidean k-NN. Candidate distances come from a blocked
/// matrix product and are re-evaluated exactly inside a rounding-error band,
/// so the result equals a plain sort of all exact distances.
NeighborLists knn(const RowMatrix& points, Index k);
NeighborLists knn(const ExtendedDataset& data, Index k);

struct SmoothKnnRow {
  double rho = 0.0;
  double sigma = 1.0;
  bool clamped = false;  // target log2(k) not reachable inside the sigma bounds
};

struct SmoothKnnParams {
  Vector rho;
  Vector sigma;
  std::vector<char> clamped;

  Index n_clamped() const;
};

inline constexpr double kSigmaTolerance = 1e-5;
inline constexpr int kSigmaMaxIterations = 64;

/// rho = nearest distance; sigma solves sum_j exp(-max(0, d_j - rho) / sigma) = log2(k)
/// by bisection on log(sigma) within [1e-3, 1e3] * mean(d).
SmoothKnnRow smooth_knn_row(std::span<const double> distances, Index k);
SmoothKnnParams smooth_knn_params(const NeighborLists& neighbors);

/// One directed weight per neighbor slot, same layout as NeighborLists.
struct DirectedWeights {
  IndexMatrix indices;
  RowMatrix weights;
};

DirectedWeights directed_weights(const NeighborLists& neighbors, const SmoothKnnParams& params);

struct Edge {
  Index i;
  Index j;
  double weight;
};

/// Undirected weighted graph, one entry per unordered pair with i < j, sorted.
struct FuzzyGraph {
  Index n_vertices = 0;
  std::vector<Edge> edges;

  double max_weight() const;
};

/// Probabilistic t-conorm a + b - ab of the two directions of every edge.
FuzzyGraph symmetrize_tconorm(const DirectedWeights& directed);

inline double tconorm(double a, double b) { return a + b - a * b; }

/// knn -> smooth_knn_params -> directed_weights -> symmetrize_tconorm.
FuzzyGraph build_fuzzy_graph(const RowMatrix& points, Index k);

/// "i j weight" lines, sorted by (i, j); first line "# n_vertices N".
void write_edge_list(const FuzzyGraph& graph, std::ostream& out);
FuzzyGraph read_edge_list(std::istream& in);

}  // namespace mane
