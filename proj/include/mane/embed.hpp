#pragma once

#include "mane/dataset.hpp"
#include "mane/embedding.hpp"
#include "mane/graph.hpp"
#include "mane/init.hpp"
#include "mane/kernel.hpp"
#include "mane/optimizer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mane {

struct ManeRun {
  AlignedEmbedding embedding;
  RunTrace trace;
  KernelParams kernel;
  Projection projection;
  double spread = kDefaultSpread;
  Index n_clamped_rows = 0;  // smooth-knn rows whose sigma hit a bound
  std::vector<Index> n_edges;
};

/// Joint embedding of all extended datasets with the anchors stored once:
/// per-dataset fuzzy graphs, PCA initialization from the seed rows, then one
/// optimization over the merged edge schedule.
ManeRun embed_mane(const std::vector<ExtendedDataset>& datasets, const OptimizerConfig& config, Index dim = 2,
                   double spread = kDefaultSpread);

struct UmapRun {
  RowMatrix coordinates;
  RunTrace trace;
  KernelParams kernel;
  Index n_clamped_rows = 0;
};

/// Single-dataset embedding. Runs embed_mane with one dataset and no anchors.
UmapRun embed_umap(const RowMatrix& points, const OptimizerConfig& config, Index dim = 2,
                   double spread = kDefaultSpread);

enum class Method { Mane, Umap, PcaBaseline };

Method parse_method(const std::string& name);
std::string method_name(Method method);

/// Coordinates of every dataset view (anchors first) produced by any method.
struct MultiEmbedding {
  Method method = Method::Mane;
  std::vector<RowMatrix> views;
  std::vector<RunTrace> traces;
  std::optional<AlignedEmbedding> aligned;  // mane and pca-baseline
  KernelParams kernel;
  double spread = kDefaultSpread;
  Index n_clamped_rows = 0;
};

/// mane: embed_mane. umap: embed_umap on every extended dataset separately.
/// pca-baseline: seed PCA projection without optimization.
MultiEmbedding embed(Method method, const std::vector<ExtendedDataset>& datasets, const OptimizerConfig& config,
                     Index dim = 2, double spread = kDefaultSpread);

/// CSV "dataset_id,point_id,label,y0,y1,..."; point_id is the row of the source
/// dataset, so anchors repeat the same id in every dataset.
void write_coordinates_csv(const std::vector<ExtendedDataset>& datasets, const std::vector<RowMatrix>& views,
                           const std::filesystem::path& path);

struct CoordinateRow {
  Index dataset_id;
  Index point_id;
  int label;
  std::vector<double> y;
};
std::vector<CoordinateRow> read_coordinates_csv(const std::filesystem::path& path);

/// Rebuilds per-dataset views in plan order (seed rows, then partition rows).
std::vector<RowMatrix> views_from_coordinates(const std::vector<CoordinateRow>& rows, const SplitPlan& plan);

/// Little-endian float32 dump of anchors then private blocks, with a JSON
/// sidecar at `path` + ".json" holding the shape and the optimizer settings.
void write_checkpoint(const AlignedEmbedding& embedding, const OptimizerConfig& config,
                      const std::filesystem::path& path);
AlignedEmbedding read_checkpoint(const std::filesystem::path& path);

std::string config_to_json(const OptimizerConfig& config);

}  // namespace mane
