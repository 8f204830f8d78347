#include "mane/embedding.hpp"

#include "mane/errors.hpp"

namespace mane {

AlignedEmbedding::AlignedEmbedding(Index n_shared, const std::vector<Index>& private_sizes, Index dim)
    : dim_(dim), anchors_(RowMatrix::Zero(n_shared, dim)) {
  if (dim < 1) throw ParameterError("embedding dimension must be positive");
  if (n_shared < 0) throw ParameterError("anchor count must be nonnegative");
  for (Index size : private_sizes) {
    if (size < 0) throw ParameterError("private block size must be nonnegative");
    private_.push_back(RowMatrix::Zero(size, dim));
  }
}

Index AlignedEmbedding::union_size() const {
  Index total = n_shared();
  for (const auto& block : private_) total += block.rows();
  return total;
}

double* AlignedEmbedding::row_ptr(Index m, Index i) {
  return const_cast<double*>(static_cast<const AlignedEmbedding&>(*this).row_ptr(m, i));
}

const double* AlignedEmbedding::row_ptr(Index m, Index i) const {
  if (m < 0 || m >= n_datasets()) throw IndexError("dataset " + std::to_string(m) + " out of range");
  if (i < 0 || i >= view_size(m)) throw IndexError("row " + std::to_string(i) + " out of range");
  if (i < n_shared()) return anchors_.data() + i * dim_;
  return private_[static_cast<std::size_t>(m)].data() + (i - n_shared()) * dim_;
}

RowMatrix AlignedEmbedding::view(Index m) const {
  RowMatrix out(view_size(m), dim_);
  out.topRows(n_shared()) = anchors_;
  out.bottomRows(private_size(m)) = private_block(m);
  return out;
}

RowMatrix AlignedEmbedding::union_coordinates() const {
  RowMatrix out(union_size(), dim_);
  out.topRows(n_shared()) = anchors_;
  Index offset = n_shared();
  for (const auto& block : private_) {
    out.middleRows(offset, block.rows()) = block;
    offset += block.rows();
  }
  return out;
}

bool AlignedEmbedding::all_finite() const {
  if (!anchors_.allFinite()) return false;
  for (const auto& block : private_)
    if (!block.allFinite()) return false;
  return true;
}

}  // namespace mane
