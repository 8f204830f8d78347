#pragma once

#include "mane/dataset.hpp"
#include "mane/embed.hpp"
#include "mane/errors.hpp"
#include "mane/metrics.hpp"
#include "mane/optimizer.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mane {

/// An Error re-raised with the pipeline phase it came from.
class PhaseError : public Error {
 public:
  PhaseError(const std::string& phase, const Error& cause)
      : Error(cause.kind(), phase + ": " + cause.what()), phase_(phase) {}
  const std::string& phase() const noexcept { return phase_; }

 private:
  std::string phase_;
};

struct DataSource {
  enum class Kind { Idx, Csv, SwissRoll };
  Kind kind = Kind::SwissRoll;
  std::filesystem::path images;
  std::optional<std::filesystem::path> labels;
  std::filesystem::path csv;
  std::optional<std::string> label_column;
  Index n_samples = 6000;  // swiss roll
  double noise = 0.0;      // swiss roll
  std::uint64_t generator_seed = 0;
  std::optional<Index> subsample;  // keep a seeded random subset of this many rows
};

LabeledMatrix load_source(const DataSource& source);

/// Seeded subset of `count` rows, kept in ascending row order.
LabeledMatrix subsample_rows(const LabeledMatrix& data, Index count, std::uint64_t rng_seed);

struct ExperimentConfig {
  DataSource source;
  Index n_shared = 1000;
  Index n_partitions = 2;
  Method method = Method::Mane;
  OptimizerConfig optimizer;
  std::filesystem::path output_dir = "mane_out";
  std::uint64_t rng_seed = 0;  // split seed
  Index dim = 2;
  double spread = kDefaultSpread;
  Index metric_k = kTrustworthinessK;
  bool write_plots = true;
  std::vector<std::string> label_names;  // overrides names from the source

  /// Throws ParameterError/CapacityError for settings that cannot work on n_rows points.
  void validate(Index n_rows) const;
  std::string to_json() const;
};

struct RunReport {
  std::string config_json;
  MetricReport metrics;
  std::map<std::string, double> timings_seconds;
  std::map<std::string, std::string> outputs;
  KernelParams kernel;
  double spread = kDefaultSpread;
  Index n_clamped_rows = 0;
  std::vector<double> final_sampled_loss;

  std::string to_json() const;
};

/// load -> split -> embed -> metrics -> outputs (coordinates, checkpoint,
/// trace, plots, report.json) under config.output_dir.
RunReport run_experiment(const ExperimentConfig& config);

}  // namespace mane
