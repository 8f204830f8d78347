#include "doctest.h"

#include "mane/errors.hpp"
#include "mane/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

using namespace mane;

namespace {

// Sort every other point by (exact squared distance, index).
std::vector<std::vector<Index>> brute_force_knn(const RowMatrix& x, Index k) {
  std::vector<std::vector<Index>> out;
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<std::pair<double, Index>> all;
    for (Index j = 0; j < x.rows(); ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (Index c = 0; c < x.cols(); ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
      all.emplace_back(s, j);
    }
    std::sort(all.begin(), all.end());
    std::vector<Index> ids;
    for (Index s = 0; s < k; ++s) ids.push_back(all[static_cast<std::size_t>(s)].second);
    out.push_back(ids);
  }
  return out;
}

RowMatrix random_matrix(Index n, Index d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  RowMatrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < d; ++c) x(i, c) = g(rng);
  return x;
}

double row_mass(std::span<const double> d, const SmoothKnnRow& r) {
  double s = 0.0;
  for (double v : d) s += std::exp(-std::max(0.0, v - r.rho) / r.sigma);
  return s;
}

}  // namespace

TEST_CASE("knn: three collinear points") {
  RowMatrix x(3, 1);
  x << 0, 1, 3;
  const auto nn = knn(x, 1);
  CHECK(nn.indices(0, 0) == 1);
  CHECK(nn.indices(1, 0) == 0);
  CHECK(nn.indices(2, 0) == 1);
  CHECK(nn.distances(0, 0) == 1.0);
  CHECK(nn.distances(1, 0) == 1.0);
  CHECK(nn.distances(2, 0) == 2.0);
}

TEST_CASE("knn: duplicated point is a zero-distance neighbor") {
  RowMatrix x(3, 2);
  x << 0, 0, 0, 0, 5, 5;
  const auto nn = knn(x, 1);
  CHECK(nn.indices(0, 0) == 1);
  CHECK(nn.indices(1, 0) == 0);
  CHECK(nn.distances(0, 0) == 0.0);
}

TEST_CASE("knn: matches the sort-all-distances oracle") {
  for (auto [n, d, k, seed] : {std::tuple<Index, Index, Index, unsigned>{200, 5, 15, 1}, {200, 5, 30, 2},
                               {300, 50, 10, 3}, {600, 3, 7, 4}}) {
    const auto x = random_matrix(n, d, seed);
    const auto nn = knn(x, k);
    const auto oracle = brute_force_knn(x, k);
    bool same = true;
    for (Index i = 0; i < n; ++i)
      for (Index s = 0; s < k; ++s) same = same && nn.indices(i, s) == oracle[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
    CHECK(same);
  }
}

TEST_CASE("knn: ties on an integer grid break by index") {
  RowMatrix x(400, 2);
  for (Index i = 0; i < 400; ++i) x.row(i) << static_cast<double>(i % 20), static_cast<double>(i / 20);
  const auto nn = knn(x, 8);
  const auto oracle = brute_force_knn(x, 8);
  for (Index i = 0; i < 400; ++i)
    for (Index s = 0; s < 8; ++s) REQUIRE(nn.indices(i, s) == oracle[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)]);
}

TEST_CASE("knn: k outside [1, n) is rejected") {
  const auto x = random_matrix(5, 2, 9);
  CHECK_THROWS_AS(knn(x, 5), ParameterError);
  CHECK_THROWS_AS(knn(x, 0), ParameterError);
}

TEST_CASE("smooth knn: sigma for distances 1,2,3,4") {
  // Independent root: 1 + t + t^2 + t^3 = 2 with t = exp(-1/sigma), bisection on t.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double t = 0.5 * (lo + hi);
    (1 + t + t * t + t * t * t > 2.0 ? hi : lo) = t;
  }
  const double oracle_sigma = -1.0 / std::log(0.5 * (lo + hi));
  // The closed-form root is 1.64102; the commonly quoted 1.6398 agrees to 1e-3.
  CHECK(oracle_sigma == doctest::Approx(1.6398).epsilon(1e-3));

  const std::vector<double> d{1, 2, 3, 4};
  const auto row = smooth_knn_row(d, 4);
  CHECK(row.rho == 1.0);
  CHECK_FALSE(row.clamped);
  CHECK(row.sigma == doctest::Approx(oracle_sigma).epsilon(1e-4));
  CHECK(std::abs(row_mass(d, row) - 2.0) <= 1e-4);
}

TEST_CASE("smooth knn: degenerate rows clamp") {
  const std::vector<double> flat{2, 2, 2, 2};
  const auto f = smooth_knn_row(flat, 4);
  CHECK(f.sigma == doctest::Approx(1e3 * 2.0));
  CHECK(f.clamped);

  const std::vector<double> near{1, 1 + 1e-9};
  const auto n = smooth_knn_row(near, 2);
  CHECK(n.sigma == doctest::Approx(1e-3 * (1 + 0.5e-9)));
  CHECK(n.clamped);
}

TEST_CASE("smooth knn: calibration residual on random rows") {
  for (Index k : {5, 15, 30}) {
    const auto x = random_matrix(400, 6, static_cast<unsigned>(k));
    const auto nn = knn(x, k);
    const auto params = smooth_knn_params(nn);
    CHECK(params.n_clamped() == 0);
    const double target = std::log2(static_cast<double>(k));
    double worst = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
      SmoothKnnRow r{params.rho[i], params.sigma[i], false};
      worst = std::max(worst, std::abs(row_mass(row_span(nn.distances, i), r) - target));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("directed weights: nearest neighbor 1, rho + sigma gives 1/e") {
  RowMatrix x(4, 1);
  x << 0, 1, 2.5, 4.5;
  const auto nn = knn(x, 2);
  auto params = smooth_knn_params(nn);
  const auto w = directed_weights(nn, params);
  for (Index i = 0; i < 4; ++i) CHECK(w.weights(i, 0) == 1.0);

  NeighborLists custom;
  custom.indices.resize(1, 2);
  custom.indices << 1, 2;
  custom.distances.resize(1, 2);
  custom.distances << 0.5, 0.5 + 0.75;
  SmoothKnnParams p;
  p.rho = Vector::Constant(1, 0.5);
  p.sigma = Vector::Constant(1, 0.75);
  p.clamped = {0};
  const auto w2 = directed_weights(custom, p);
  CHECK(w2.weights(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("t-conorm") {
  CHECK(tconorm(0.5, 0.5) == 0.75);
  CHECK(tconorm(1.0, 0.37) == 1.0);
  CHECK(tconorm(0.3, 0.0) == 0.3);
}

TEST_CASE("symmetrize: one edge per pair, non-neighbors absent") {
  const auto x = random_matrix(120, 4, 17);
  const auto nn = knn(x, 6);
  const auto directed = directed_weights(nn, smooth_knn_params(nn));
  const auto g = symmetrize_tconorm(directed);

  std::map<std::pair<Index, Index>, double> dir;
  for (Index i = 0; i < x.rows(); ++i)
    for (Index s = 0; s < 6; ++s) dir[{i, directed.indices(i, s)}] = directed.weights(i, s);

  CHECK(g.n_vertices == 120);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    REQUIRE(edge.i < edge.j);
    if (e > 0) REQUIRE(std::pair(g.edges[e - 1].i, g.edges[e - 1].j) < std::pair(edge.i, edge.j));
    const double a = dir.count({edge.i, edge.j}) ? dir[{edge.i, edge.j}] : 0.0;
    const double b = dir.count({edge.j, edge.i}) ? dir[{edge.j, edge.i}] : 0.0;
    REQUIRE(a + b > 0.0);
    CHECK(edge.weight == doctest::Approx(a + b - a * b).epsilon(1e-15));
    CHECK(edge.weight <= 1.0);
  }
  std::size_t pairs = 0;
  std::map<std::pair<Index, Index>, int> seen;
  for (const auto& [key, w] : dir)
    if (w > 0.0) seen[{std::min(key.first, key.second), std::max(key.first, key.second)}] = 1;
  pairs = seen.size();
  CHECK(g.edges.size() == pairs);
  CHECK(g.max_weight() == 1.0);
}

TEST_CASE("edge list: round trip and malformed input") {
  const auto g = build_fuzzy_graph(random_matrix(60, 3, 5), 5);
  std::stringstream ss;
  write_edge_list(g, ss);
  const auto back = read_edge_list(ss);
  REQUIRE(back.edges.size() == g.edges.size());
  CHECK(back.n_vertices == g.n_vertices);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    CHECK(back.edges[e].i == g.edges[e].i);
    CHECK(back.edges[e].j == g.edges[e].j);
    CHECK(back.edges[e].weight == g.edges[e].weight);
  }

  std::istringstream bad_weight("0 1 1.5\n");
  CHECK_THROWS_AS(read_edge_list(bad_weight), ParseError);
  std::istringstream self_loop("2 2 0.5\n");
  CHECK_THROWS_AS(read_edge_list(self_loop), ParseError);
  std::istringstream dup("0 1 0.5\n1 0 0.5\n");
  CHECK_THROWS_AS(read_edge_list(dup), ParseError);
}
