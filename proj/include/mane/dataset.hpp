#pragma once

#include "mane/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mane {

/// N points in R^n with optional integer labels.
struct LabeledMatrix {
  RowMatrix points;
  std::vector<int> labels;               // empty, or one per row
  std::vector<std::string> label_names;  // optional, indexed by label value

  Index rows() const { return points.rows(); }
  Index cols() const { return points.cols(); }
  bool has_labels() const { return !labels.empty(); }

  /// Throws ConsistencyError if any invariant is broken.
  void validate() const;
};

/// Seed (shared) indices plus M disjoint partitions of the rows of a dataset.
struct SplitPlan {
  Index n_rows = 0;
  std::vector<Index> seed_indices;
  std::vector<std::vector<Index>> partitions;
  std::uint64_t rng_seed = 0;

  Index n_shared() const { return static_cast<Index>(seed_indices.size()); }
  Index n_partitions() const { return static_cast<Index>(partitions.size()); }

  void validate() const;
};

/// Seed rows followed by the rows of one partition. Holds a pointer to the
/// source matrix, which must outlive the view.
class ExtendedDataset {
 public:
  ExtendedDataset(const LabeledMatrix& source, std::vector<Index> row_ids, Index n_shared);

  Index size() const { return static_cast<Index>(row_ids_.size()); }
  Index n_shared() const { return n_shared_; }
  Index n_local() const { return size() - n_shared_; }
  Index dim() const { return source_->cols(); }

  std::span<const double> row(Index i) const { return row_span(source_->points, row_ids_.at(i)); }
  /// Original row index in the source matrix.
  Index source_id(Index i) const { return row_ids_.at(i); }
  const std::vector<Index>& source_ids() const { return row_ids_; }
  int label(Index i) const;

  RowMatrix materialize() const;
  const LabeledMatrix& source() const { return *source_; }

 private:
  const LabeledMatrix* source_;
  std::vector<Index> row_ids_;
  Index n_shared_;
};

/// Reads an IDX image file (magic 0x00000803), optionally with its label file
/// (magic 0x00000801). Files ending in ".gz" are decompressed transparently.
LabeledMatrix load_idx(const std::filesystem::path& images,
                       const std::optional<std::filesystem::path>& labels = std::nullopt);

/// Writes pixel values round(255 * x), clamped to [0, 255].
void write_idx(const LabeledMatrix& data, const std::filesystem::path& images,
               const std::optional<std::filesystem::path>& labels, int image_rows, int image_cols);

/// Comma-separated; a header line is detected when its first cell is not numeric.
/// When `label_column` is given the header must name it.
LabeledMatrix load_csv(const std::filesystem::path& path,
                       const std::optional<std::string>& label_column = std::nullopt);
LabeledMatrix parse_csv(const std::string& text,
                        const std::optional<std::string>& label_column = std::nullopt);
/// Header f0..f{n-1}[,label]; labels written as their name when one exists,
/// otherwise as the integer code.
void write_csv(const LabeledMatrix& data, const std::filesystem::path& path);

/// Points (t cos t, h, t sin t), t ~ U[1.5 pi, 4.5 pi], h ~ U[0, 21], plus
/// Gaussian noise. Labels are t quantized into 10 equal bins.
LabeledMatrix gen_swiss_roll(Index n_samples, double noise, std::uint64_t rng_seed);

/// Random permutation of the rows: first n_shared become the seed set, the rest
/// split into n_partitions near-equal parts (earlier parts take the remainder).
SplitPlan split_shared(Index n_rows, Index n_shared, Index n_partitions, std::uint64_t rng_seed);
inline SplitPlan split_shared(const LabeledMatrix& data, Index n_shared, Index n_partitions,
                              std::uint64_t rng_seed) {
  return split_shared(data.rows(), n_shared, n_partitions, rng_seed);
}

/// Extended dataset for partition `m` (0-based).
ExtendedDataset extend(const LabeledMatrix& data, const SplitPlan& plan, Index m);
std::vector<ExtendedDataset> extend_all(const LabeledMatrix& data, const SplitPlan& plan);

/// Seed rows once, then every partition in order.
std::vector<Index> union_row_ids(const SplitPlan& plan);

std::string split_to_json(const SplitPlan& plan);
SplitPlan split_from_json(const std::string& text);

}  // namespace mane
