#include "mane/graph.hpp"

#include "mane/distance.hpp"
#include "mane/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace mane {

NeighborLists knn(const RowMatrix& points, Index k) {
  const Index n = points.rows();
  if (k < 1) throw ParameterError("k must be positive");
  if (k >= n)
    throw ParameterError("k = " + std::to_string(k) + " must be smaller than the number of points " +
                         std::to_string(n));

  NeighborLists out;
  out.indices.resize(n, k);
  out.distances.resize(n, k);

  const BlockedSquaredDistances engine(points);
  std::vector<double> scratch;
  std::vector<std::pair<double, Index>> candidates;
  engine.for_each_row([&](Index i, std::span<const double> approx) {
    scratch.assign(approx.begin(), approx.end());
    std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
    const double threshold = scratch[static_cast<std::size_t>(k - 1)] + 2.0 * engine.error_bound(i);

    candidates.clear();
    const auto xi = row_span(points, i);
    for (Index j = 0; j < n; ++j)
      if (j != i && approx[static_cast<std::size_t>(j)] <= threshold)
        candidates.emplace_back(squared_distance(xi, row_span(points, j)), j);
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());
    for (Index s = 0; s < k; ++s) {
      out.indices(i, s) = candidates[static_cast<std::size_t>(s)].second;
      out.distances(i, s) = std::sqrt(candidates[static_cast<std::size_t>(s)].first);
    }
  });
  return out;
}

NeighborLists knn(const ExtendedDataset& data, Index k) { return knn(data.materialize(), k); }

Index SmoothKnnParams::n_clamped() const {
  return static_cast<Index>(std::count(clamped.begin(), clamped.end(), 1));
}

SmoothKnnRow smooth_knn_row(std::span<const double> distances, Index k) {
  if (distances.empty()) throw ParameterError("empty distance row");
  if (k < 1) throw ParameterError("k must be positive");

  SmoothKnnRow row;
  row.rho = distances.front();
  const double target = std::log2(static_cast<double>(k));
  const double mean = std::accumulate(distances.begin(), distances.end(), 0.0) / static_cast<double>(distances.size());

  auto total = [&](double sigma) {
    double s = 0.0;
    for (double d : distances) s += std::exp(-std::max(0.0, d - row.rho) / sigma);
    return s;
  };

  if (!(mean > 0.0)) {
    // All neighbors coincide with the point; every weight is 1 whatever sigma is.
    row.sigma = 1.0;
    row.clamped = std::abs(static_cast<double>(distances.size()) - target) > kSigmaTolerance;
    return row;
  }
  const double lo = 1e-3 * mean;
  const double hi = 1e3 * mean;
  const bool flat = std::all_of(distances.begin(), distances.end(), [&](double d) { return d - row.rho <= 0.0; });
  if (flat) {
    row.sigma = hi;
    row.clamped = std::abs(total(hi) - target) > kSigmaTolerance;
    return row;
  }

  const double at_lo = total(lo);
  if (at_lo >= target - kSigmaTolerance) {
    row.sigma = lo;
    row.clamped = at_lo - target > kSigmaTolerance;
    return row;
  }
  const double at_hi = total(hi);
  if (at_hi <= target + kSigmaTolerance) {
    row.sigma = hi;
    row.clamped = target - at_hi > kSigmaTolerance;
    return row;
  }

  double log_lo = std::log(lo);
  double log_hi = std::log(hi);
  double sigma = std::exp(0.5 * (log_lo + log_hi));
  for (int it = 0; it < kSigmaMaxIterations; ++it) {
    const double log_mid = 0.5 * (log_lo + log_hi);
    sigma = std::exp(log_mid);
    const double s = total(sigma);
    if (std::abs(s - target) <= kSigmaTolerance) break;
    if (s > target)
      log_hi = log_mid;
    else
      log_lo = log_mid;
  }
  row.sigma = sigma;
  return row;
}

SmoothKnnParams smooth_knn_params(const NeighborLists& neighbors) {
  const Index n = neighbors.n_points();
  const Index k = neighbors.k();
  SmoothKnnParams out;
  out.rho.resize(n);
  out.sigma.resize(n);
  out.clamped.assign(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    const auto row = smooth_knn_row(row_span(neighbors.distances, i), k);
    out.rho[i] = row.rho;
    out.sigma[i] = row.sigma;
    out.clamped[static_cast<std::size_t>(i)] = row.clamped ? 1 : 0;
  }
  return out;
}

DirectedWeights directed_weights(const NeighborLists& neighbors, const SmoothKnnParams& params) {
  const Index n = neighbors.n_points();
  if (params.rho.size() != n || params.sigma.size() != n)
    throw ShapeError("smooth-knn parameters do not match neighbor lists");
  DirectedWeights out;
  out.indices = neighbors.indices;
  out.weights.resize(n, neighbors.k());
  for (Index i = 0; i < n; ++i)
    for (Index s = 0; s < neighbors.k(); ++s)
      out.weights(i, s) = std::exp(-std::max(0.0, neighbors.distances(i, s) - params.rho[i]) / params.sigma[i]);
  return out;
}

double FuzzyGraph::max_weight() const {
  double w = 0.0;
  for (const auto& e : edges) w = std::max(w, e.weight);
  return w;
}

FuzzyGraph symmetrize_tconorm(const DirectedWeights& directed) {
  struct Half {
    Index lo, hi;
    double weight;
  };
  const Index n = directed.indices.rows();
  std::vector<Half> halves;
  halves.reserve(static_cast<std::size_t>(directed.indices.size()));
  for (Index i = 0; i < n; ++i)
    for (Index s = 0; s < directed.indices.cols(); ++s) {
      const Index j = directed.indices(i, s);
      const double w = directed.weights(i, s);
      if (j == i || w <= 0.0) continue;
      halves.push_back({std::min(i, j), std::max(i, j), w});
    }
  std::sort(halves.begin(), halves.end(),
            [](const Half& a, const Half& b) { return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi; });

  FuzzyGraph graph;
  graph.n_vertices = n;
  for (std::size_t p = 0; p < halves.size();) {
    double w = halves[p].weight;
    std::size_t q = p + 1;
    for (; q < halves.size() && halves[q].lo == halves[p].lo && halves[q].hi == halves[p].hi; ++q)
      w = tconorm(w, halves[q].weight);
    if (w > 0.0) graph.edges.push_back({halves[p].lo, halves[p].hi, std::min(w, 1.0)});
    p = q;
  }
  return graph;
}

FuzzyGraph build_fuzzy_graph(const RowMatrix& points, Index k) {
  const auto neighbors = knn(points, k);
  return symmetrize_tconorm(directed_weights(neighbors, smooth_knn_params(neighbors)));
}

void write_edge_list(const FuzzyGraph& graph, std::ostream& out) {
  out << "# n_vertices " << graph.n_vertices << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& e : graph.edges) out << e.i << ' ' << e.j << ' ' << e.weight << '\n';
  out.precision(old_precision);
}

FuzzyGraph read_edge_list(std::istream& in) {
  FuzzyGraph graph;
  Index max_vertex = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line.front() == '#') {
      std::string hash, key;
      Index n = 0;
      if (ls >> hash >> key >> n && key == "n_vertices") graph.n_vertices = n;
      continue;
    }
    Edge e{};
    if (!(ls >> e.i >> e.j >> e.weight)) throw ParseError("bad edge on line " + std::to_string(line_no));
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i < 0 || e.i == e.j) throw ParseError("bad vertex pair on line " + std::to_string(line_no));
    if (!(e.weight > 0.0 && e.weight <= 1.0)) throw ParseError("weight outside (0, 1] on line " + std::to_string(line_no));
    max_vertex = std::max(max_vertex, e.j);
    graph.edges.push_back(e);
  }
  graph.n_vertices = std::max(graph.n_vertices, max_vertex + 1);
  std::sort(graph.edges.begin(), graph.edges.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  for (std::size_t p = 1; p < graph.edges.size(); ++p)
    if (graph.edges[p].i == graph.edges[p - 1].i && graph.edges[p].j == graph.edges[p - 1].j)
      throw ParseError("duplicate edge " + std::to_string(graph.edges[p].i) + " " + std::to_string(graph.edges[p].j));
  return graph;
}

}  // namespace mane
