#include "doctest.h"

#include "mane/dataset.hpp"
#include "mane/errors.hpp"
#include "mane/init.hpp"
#include "mane/optimizer.hpp"

#include <cmath>
#include <random>

using namespace mane;

namespace {

FuzzyGraph chain(Index n, const std::vector<double>& weights) {
  FuzzyGraph g;
  g.n_vertices = n;
  for (std::size_t e = 0; e < weights.size(); ++e)
    g.edges.push_back({static_cast<Index>(e), static_cast<Index>(e) + 1, weights[e]});
  return g;
}

double loss_term(const std::vector<double>& yi, const std::vector<double>& yj, double a, double b, Force kind) {
  double s = 0.0;
  for (std::size_t c = 0; c < yi.size(); ++c) s += (yi[c] - yj[c]) * (yi[c] - yj[c]);
  const double q = 1.0 / (1.0 + a * std::pow(s, b));
  return kind == Force::Attractive ? -std::log(q) : -std::log(1.0 - q);
}

struct Problem {
  LabeledMatrix data;
  SplitPlan plan;
  std::vector<ExtendedDataset> datasets;
  std::vector<FuzzyGraph> graphs;
  KernelParams kernel;

  Problem(Index n, Index n_shared, Index parts, unsigned seed) {
    data = gen_swiss_roll(n, 0.0, seed);
    plan = split_shared(data, n_shared, parts, seed);
    datasets = extend_all(data, plan);
    for (const auto& ds : datasets) graphs.push_back(build_fuzzy_graph(ds.materialize(), 10));
    kernel = fit_ab(0.1);
  }

  AlignedEmbedding init() const { return project_init(datasets, seed_projection(datasets, 2)); }
};

}  // namespace

TEST_CASE("schedule: sample counts follow weight") {
  const EdgeSchedule s({chain(4, {1.0, 0.5, 0.001})}, 200);
  REQUIRE(s.entries().size() == 3);
  CHECK(s.entries()[0].n_samples == 200);
  CHECK(s.entries()[0].epochs_per_sample == 1.0);
  CHECK(s.entries()[1].n_samples == 100);
  CHECK(s.entries()[2].n_samples == 1);

  for (const auto& e : s.entries()) {
    int hits = 0;
    for (int epoch = 0; epoch < 200; ++epoch) hits += s.due(e, epoch);
    CHECK(hits == e.n_samples);
  }
  for (int epoch = 0; epoch < 200; ++epoch) CHECK(s.due(s.entries()[0], epoch));
}

TEST_CASE("schedule: datasets interleave") {
  const EdgeSchedule s({chain(4, {1.0, 0.5, 0.25}), chain(4, {1.0, 0.5, 0.25})}, 50);
  REQUIRE(s.entries().size() == 6);
  for (std::size_t p = 0; p < 6; ++p) CHECK(s.entries()[p].dataset == static_cast<int>(p % 2));

  const EdgeSchedule uneven({chain(3, {1.0}), chain(4, {0.5, 0.5, 0.5})}, 10);
  std::vector<int> tags;
  for (const auto& e : uneven.entries()) tags.push_back(e.dataset);
  CHECK(tags == std::vector<int>{0, 1, 1, 1});
  CHECK_THROWS_AS(EdgeSchedule({FuzzyGraph{3, {}}}, 10), ScheduleError);
}

TEST_CASE("edge gradient: coincident points") {
  const KernelParams k = fit_ab(0.1);
  const std::vector<double> y{0.3, -1.2};
  const auto attract = edge_gradient(y, y, k, Force::Attractive);
  CHECK(attract == std::vector<double>{0.0, 0.0});
  const auto repel = edge_gradient(y, y, k, Force::Repulsive);
  for (double g : repel) {
    CHECK(std::isfinite(g));
    CHECK(std::abs(g) <= 4.0);
  }
  const std::vector<double> close{0.3 + 1e-2, -1.2};
  const auto pushed = edge_gradient(close, y, k, Force::Repulsive);
  CHECK(pushed[0] == 4.0);
}

TEST_CASE("edge gradient: finite differences, a = b = 1") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> yi{u(rng), u(rng)}, yj{u(rng), u(rng)};
    const double dist = std::sqrt(squared_distance(yi, yj));
    if (dist < 0.1) continue;
    for (Force kind : {Force::Attractive, Force::Repulsive}) {
      const double coeff = force_coefficient(squared_distance(yi, yj), 1.0, 1.0, kind, 0.0);
      double err = 0.0, norm = 0.0;
      for (std::size_t c = 0; c < 2; ++c) {
        const double h = 1e-6;
        auto plus = yi, minus = yi;
        plus[c] += h;
        minus[c] -= h;
        const double descent = -(loss_term(plus, yj, 1, 1, kind) - loss_term(minus, yj, 1, 1, kind)) / (2 * h);
        const double analytic = coeff * (yi[c] - yj[c]);
        err += (analytic - descent) * (analytic - descent);
        norm += descent * descent;
      }
      CHECK(std::sqrt(err) <= 1e-4 * std::sqrt(norm));
    }
  }
}

TEST_CASE("cross entropy") {
  CHECK(cross_entropy(0.3, 0.3) == doctest::Approx(0.0));
  CHECK(cross_entropy(1.0, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy(0.0, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(cross_entropy(0.5, 1.0), DomainError);
  CHECK_THROWS_AS(cross_entropy(1.5, 0.5), DomainError);
}

TEST_CASE("optimize: anchors live in one block during the run") {
  const Problem p(600, 100, 2, 3);
  auto emb = p.init();
  for (Index i = 0; i < emb.n_shared(); ++i) REQUIRE(emb.row_ptr(0, i) == emb.row_ptr(1, i));
  OptimizerConfig cfg;
  cfg.n_epochs = 30;
  optimize(emb, p.graphs, p.kernel, cfg);
  for (Index i = 0; i < emb.n_shared(); ++i)
    for (Index c = 0; c < 2; ++c) CHECK(emb.view(0)(i, c) == emb.view(1)(i, c));
  CHECK(emb.all_finite());
}

TEST_CASE("optimize: deterministic for a fixed seed") {
  const Problem p(400, 50, 2, 5);
  OptimizerConfig cfg;
  cfg.n_epochs = 40;
  auto e1 = p.init();
  auto e2 = p.init();
  const auto t1 = optimize(e1, p.graphs, p.kernel, cfg);
  const auto t2 = optimize(e2, p.graphs, p.kernel, cfg);
  CHECK(e1.union_coordinates() == e2.union_coordinates());
  CHECK(t1.to_json() == t2.to_json());

  cfg.rng_seed += 1;
  auto e3 = p.init();
  optimize(e3, p.graphs, p.kernel, cfg);
  CHECK(e3.union_coordinates() != e1.union_coordinates());
}

TEST_CASE("optimize: sampled loss falls and the rate decays linearly") {
  const Problem p(500, 100, 2, 7);
  auto emb = p.init();
  OptimizerConfig cfg;
  cfg.n_epochs = 100;
  const auto trace = optimize(emb, p.graphs, p.kernel, cfg);
  REQUIRE(trace.epochs.size() == 100);
  double early = 0.0, late = 0.0;
  for (int e = 0; e < 10; ++e) early += trace.epochs[static_cast<std::size_t>(e)].sampled_loss;
  for (int e = 90; e < 100; ++e) late += trace.epochs[static_cast<std::size_t>(e)].sampled_loss;
  CHECK(late < early);
  CHECK(trace.epochs[0].learning_rate == 1.0);
  CHECK(trace.epochs[50].learning_rate == doctest::Approx(0.5));
  CHECK(trace.epochs[0].n_positive > 0);
  CHECK(trace.epochs[0].n_negative > 0);
}

TEST_CASE("optimize: non-finite coordinates raise DivergenceError") {
  const Problem p(200, 20, 2, 9);
  auto emb = p.init();
  emb.private_block(1)(0, 0) = std::nan("");
  OptimizerConfig cfg;
  cfg.n_epochs = 5;
  try {
    optimize(emb, p.graphs, p.kernel, cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() == 0);
  }
}

TEST_CASE("optimize: lock-free threads keep anchors shared") {
  const Problem p(600, 100, 2, 13);
  auto emb = p.init();
  OptimizerConfig cfg;
  cfg.n_epochs = 20;
  cfg.n_threads = 3;
  optimize(emb, p.graphs, p.kernel, cfg);
  CHECK(emb.all_finite());
  for (Index i = 0; i < emb.n_shared(); ++i) CHECK(emb.row_ptr(0, i) == emb.row_ptr(1, i));
}

TEST_CASE("optimize: argument validation") {
  const Problem p(200, 20, 2, 9);
  auto emb = p.init();
  OptimizerConfig cfg;
  cfg.n_epochs = 0;
  CHECK_THROWS_AS(optimize(emb, p.graphs, p.kernel, cfg), ParameterError);
  cfg = OptimizerConfig{};
  CHECK_THROWS_AS(optimize(emb, {p.graphs[0]}, p.kernel, cfg), ShapeError);
}
