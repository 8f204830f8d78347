#pragma once

#include "mane/embedding.hpp"
#include "mane/graph.hpp"
#include "mane/kernel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mane {

struct OptimizerConfig {
  int n_epochs = 200;
  double learning_rate = 1.0;
  double negative_sample_rate = 1.0;
  Index n_neighbors = 30;
  double min_dist = 0.1;
  std::uint64_t rng_seed = 42;
  double grad_clip = 4.0;
  double repulsion_epsilon = 1e-3;
  // Apply the attractive step to both endpoints of a positive edge.
  bool move_both_endpoints = true;
  // 1 = sequential and deterministic. More threads process edges without
  // locks; results then vary between runs.
  int n_threads = 1;

  void validate() const;
};

/// Positive-edge sampling plan over the union of all graphs.
///
/// An edge of weight w is sampled ceil(n_epochs * w / w_max) times, w_max
/// being the largest weight over all graphs, evenly spread across the epochs.
/// Edges are interleaved across datasets: the k-th edge of every graph comes
/// before the (k+1)-th edge of any graph, lower dataset first.
class EdgeSchedule {
 public:
  struct Entry {
    int dataset;
    Index i;
    Index j;
    double weight;
    int n_samples;
    double epochs_per_sample;
  };

  EdgeSchedule(const std::vector<FuzzyGraph>& graphs, int n_epochs);

  int n_epochs() const { return n_epochs_; }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Whether `entry` is sampled during epoch `epoch` (0-based).
  bool due(const Entry& entry, int epoch) const {
    const auto n = static_cast<std::int64_t>(entry.n_samples);
    return ((epoch + 1) * n) / n_epochs_ > (epoch * n) / n_epochs_;
  }

 private:
  int n_epochs_;
  std::vector<Entry> entries_;
};

enum class Force { Attractive, Repulsive };

/// Unclipped coefficient c such that c * (y_i - y_j) is the descent direction
/// for y_i of -log q (attractive) or -log(1 - q) (repulsive), q = 1/(1 + a s^b),
/// s = ||y_i - y_j||^2. The repulsive form carries epsilon in its denominator.
double force_coefficient(double squared_distance, double a, double b, Force kind, double epsilon = 1e-3);

/// Update direction for y_i, each component clipped to [-clip, clip].
std::vector<double> edge_gradient(std::span<const double> yi, std::span<const double> yj, const KernelParams& params,
                                  Force kind, double clip = 4.0, double epsilon = 1e-3);

/// p log(p/q) + (1 - p) log((1 - p)/(1 - q)), with 0 log 0 = 0.
double cross_entropy(double p, double q);

struct EpochRecord {
  int epoch;
  double sampled_loss;  // mean of -log q over positives and -log(1 - q) over negatives
  double learning_rate;
  std::int64_t n_positive;
  std::int64_t n_negative;
};

struct RunTrace {
  std::vector<EpochRecord> epochs;
  std::string to_json() const;
};

/// Joint negative-sampling SGD over every graph. Graph m must have
/// view_size(m) vertices. Anchor updates land in the shared anchor block.
RunTrace optimize(AlignedEmbedding& embedding, const std::vector<FuzzyGraph>& graphs, const KernelParams& kernel,
                  const OptimizerConfig& config);

}  // namespace mane
