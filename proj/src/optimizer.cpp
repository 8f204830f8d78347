#include "mane/optimizer.hpp"

#include "mane/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace mane {

void OptimizerConfig::validate() const {
  if (n_epochs < 1) throw ParameterError("n_epochs must be positive");
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
  if (!(negative_sample_rate > 0.0)) throw ParameterError("negative_sample_rate must be positive");
  if (n_neighbors < 2) throw ParameterError("n_neighbors must be at least 2");
  if (!(min_dist >= 0.0)) throw ParameterError("min_dist must be nonnegative");
  if (!(grad_clip > 0.0)) throw ParameterError("grad_clip must be positive");
  if (!(repulsion_epsilon >= 0.0)) throw ParameterError("repulsion_epsilon must be nonnegative");
  if (n_threads < 1) throw ParameterError("n_threads must be positive");
}

EdgeSchedule::EdgeSchedule(const std::vector<FuzzyGraph>& graphs, int n_epochs) : n_epochs_(n_epochs) {
  if (graphs.empty()) throw ScheduleError("no graphs to schedule");
  if (n_epochs < 1) throw ScheduleError("n_epochs must be positive");
  double w_max = 0.0;
  std::size_t longest = 0;
  for (std::size_t m = 0; m < graphs.size(); ++m) {
    if (graphs[m].edges.empty()) throw ScheduleError("graph " + std::to_string(m) + " has no edges");
    w_max = std::max(w_max, graphs[m].max_weight());
    longest = std::max(longest, graphs[m].edges.size());
  }
  for (std::size_t k = 0; k < longest; ++k)
    for (std::size_t m = 0; m < graphs.size(); ++m) {
      if (k >= graphs[m].edges.size()) continue;
      const Edge& e = graphs[m].edges[k];
      // Guard against 200 * 0.5 landing a hair above 100.
      const double raw = n_epochs * e.weight / w_max;
      const int n_samples = std::clamp(static_cast<int>(std::ceil(raw - 1e-9)), 1, n_epochs);
      entries_.push_back({static_cast<int>(m), e.i, e.j, e.weight, n_samples,
                          static_cast<double>(n_epochs) / n_samples});
    }
}

double force_coefficient(double s, double a, double b, Force kind, double epsilon) {
  const double as_b = a * std::pow(s, b);
  if (kind == Force::Attractive) {
    if (!(s > 0.0)) return 0.0;
    return -2.0 * a * b * std::pow(s, b - 1.0) / (1.0 + as_b);
  }
  if (!(epsilon + s > 0.0)) return 0.0;
  return 2.0 * b / ((epsilon + s) * (1.0 + as_b));
}

std::vector<double> edge_gradient(std::span<const double> yi, std::span<const double> yj, const KernelParams& params,
                                  Force kind, double clip, double epsilon) {
  if (yi.size() != yj.size()) throw ShapeError("embedding vectors differ in dimension");
  const double coeff = force_coefficient(squared_distance(yi, yj), params.a, params.b, kind, epsilon);
  std::vector<double> g(yi.size());
  for (std::size_t c = 0; c < yi.size(); ++c) g[c] = std::clamp(coeff * (yi[c] - yj[c]), -clip, clip);
  return g;
}

double cross_entropy(double p, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
  double loss = 0.0;
  if (p > 0.0) loss += p * std::log(p / q);
  if (p < 1.0) loss += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return loss;
}

std::string RunTrace::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : epochs)
    j.push_back({{"epoch", e.epoch},
                 {"sampled_loss", e.sampled_loss},
                 {"learning_rate", e.learning_rate},
                 {"n_positive", e.n_positive},
                 {"n_negative", e.n_negative}});
  return j.dump(1);
}

namespace {

// Coordinate access. The parallel mode goes through relaxed atomics so that
// every coordinate write is word-atomic; the sequential mode is plain.
template <bool Atomic>
struct Coord {
  static double load(const double& x) {
    if constexpr (Atomic)
      return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
    else
      return x;
  }
  static void store(double& x, double v) {
    if constexpr (Atomic)
      std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
    else
      x = v;
  }
};

struct EpochTally {
  double loss = 0.0;
  std::int64_t n_positive = 0;
  std::int64_t n_negative = 0;
};

constexpr double kLossFloor = 1e-12;

template <bool Atomic>
class EdgeWorker {
 public:
  EdgeWorker(const AlignedEmbedding& embedding, const std::vector<std::vector<double*>>& rows,
             const KernelParams& kernel, const OptimizerConfig& config)
      : rows_(rows), kernel_(kernel), config_(config), dim_(embedding.dim()),
        n_negative_(static_cast<int>(std::ceil(config.negative_sample_rate))) {}

  void run(const EdgeSchedule& schedule, std::size_t begin, std::size_t end, int epoch, double alpha,
           std::mt19937_64& rng, EpochTally& tally) const {
    const auto& entries = schedule.entries();
    for (std::size_t p = begin; p < end; ++p) {
      const auto& e = entries[p];
      if (!schedule.due(e, epoch)) continue;
      const auto& view = rows_[static_cast<std::size_t>(e.dataset)];
      double* yi = view[static_cast<std::size_t>(e.i)];
      double* yj = view[static_cast<std::size_t>(e.j)];

      const double s = distance(yi, yj);
      tally.loss += -std::log(std::max(q_from_squared(s, kernel_.a, kernel_.b), kLossFloor));
      ++tally.n_positive;
      const double attract = force_coefficient(s, kernel_.a, kernel_.b, Force::Attractive);
      for (Index c = 0; c < dim_; ++c) {
        const double xi = Coord<Atomic>::load(yi[c]);
        const double xj = Coord<Atomic>::load(yj[c]);
        const double g = std::clamp(attract * (xi - xj), -config_.grad_clip, config_.grad_clip);
        Coord<Atomic>::store(yi[c], xi + alpha * g);
        if (config_.move_both_endpoints) Coord<Atomic>::store(yj[c], xj - alpha * g);
      }

      std::uniform_int_distribution<std::size_t> pick(0, view.size() - 1);
      for (int r = 0; r < n_negative_; ++r) {
        const std::size_t k = pick(rng);
        if (k == static_cast<std::size_t>(e.i)) continue;
        double* yk = view[k];
        const double sk = distance(yi, yk);
        tally.loss += -std::log(std::max(1.0 - q_from_squared(sk, kernel_.a, kernel_.b), kLossFloor));
        ++tally.n_negative;
        const double repel = force_coefficient(sk, kernel_.a, kernel_.b, Force::Repulsive, config_.repulsion_epsilon);
        for (Index c = 0; c < dim_; ++c) {
          const double xi = Coord<Atomic>::load(yi[c]);
          const double g = std::clamp(repel * (xi - Coord<Atomic>::load(yk[c])), -config_.grad_clip, config_.grad_clip);
          Coord<Atomic>::store(yi[c], xi + alpha * g);
        }
      }
    }
  }

 private:
  double distance(const double* a, const double* b) const {
    double s = 0.0;
    for (Index c = 0; c < dim_; ++c) {
      const double t = Coord<Atomic>::load(a[c]) - Coord<Atomic>::load(b[c]);
      s += t * t;
    }
    return s;
  }

  const std::vector<std::vector<double*>>& rows_;
  const KernelParams& kernel_;
  const OptimizerConfig& config_;
  Index dim_;
  int n_negative_;
};

}  // namespace

RunTrace optimize(AlignedEmbedding& embedding, const std::vector<FuzzyGraph>& graphs, const KernelParams& kernel,
                  const OptimizerConfig& config) {
  config.validate();
  if (static_cast<Index>(graphs.size()) != embedding.n_datasets())
    throw ShapeError("got " + std::to_string(graphs.size()) + " graphs for " + std::to_string(embedding.n_datasets()) +
                     " datasets");
  for (Index m = 0; m < embedding.n_datasets(); ++m)
    if (graphs[static_cast<std::size_t>(m)].n_vertices != embedding.view_size(m))
      throw ShapeError("graph " + std::to_string(m) + " has " +
                       std::to_string(graphs[static_cast<std::size_t>(m)].n_vertices) + " vertices, dataset view has " +
                       std::to_string(embedding.view_size(m)));

  // Every view resolves anchor rows to the single anchor block.
  std::vector<std::vector<double*>> rows(static_cast<std::size_t>(embedding.n_datasets()));
  for (Index m = 0; m < embedding.n_datasets(); ++m)
    for (Index i = 0; i < embedding.view_size(m); ++i) rows[static_cast<std::size_t>(m)].push_back(embedding.row_ptr(m, i));

  const EdgeSchedule schedule(graphs, config.n_epochs);
  const std::size_t n_entries = schedule.entries().size();
  RunTrace trace;

  const int n_threads = config.n_threads;
  std::vector<std::mt19937_64> rngs;
  for (int t = 0; t < n_threads; ++t) {
    std::seed_seq seq{static_cast<std::uint64_t>(config.rng_seed), static_cast<std::uint64_t>(t)};
    rngs.emplace_back(n_threads == 1 ? std::mt19937_64(config.rng_seed) : std::mt19937_64(seq));
  }

  const EdgeWorker<false> sequential(embedding, rows, kernel, config);
  const EdgeWorker<true> concurrent(embedding, rows, kernel, config);

  for (int epoch = 0; epoch < config.n_epochs; ++epoch) {
    const double alpha = config.learning_rate * (1.0 - static_cast<double>(epoch) / config.n_epochs);
    EpochTally total;
    if (n_threads == 1) {
      sequential.run(schedule, 0, n_entries, epoch, alpha, rngs[0], total);
    } else {
      std::vector<EpochTally> tallies(static_cast<std::size_t>(n_threads));
      {
        std::vector<std::jthread> workers;
        for (int t = 0; t < n_threads; ++t) {
          const std::size_t begin = n_entries * static_cast<std::size_t>(t) / static_cast<std::size_t>(n_threads);
          const std::size_t end = n_entries * static_cast<std::size_t>(t + 1) / static_cast<std::size_t>(n_threads);
          workers.emplace_back([&, t, begin, end] {
            concurrent.run(schedule, begin, end, epoch, alpha, rngs[static_cast<std::size_t>(t)],
                           tallies[static_cast<std::size_t>(t)]);
          });
        }
      }
      for (const auto& t : tallies) {
        total.loss += t.loss;
        total.n_positive += t.n_positive;
        total.n_negative += t.n_negative;
      }
    }
    if (!embedding.all_finite())
      throw DivergenceError("non-finite coordinate after epoch " + std::to_string(epoch), epoch);
    const auto n_terms = total.n_positive + total.n_negative;
    trace.epochs.push_back({epoch, n_terms ? total.loss / static_cast<double>(n_terms) : 0.0, alpha, total.n_positive,
                            total.n_negative});
  }
  return trace;
}

}  // namespace mane
