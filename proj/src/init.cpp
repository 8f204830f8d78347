#include "mane/init.hpp"

#include "mane/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>

namespace mane {

namespace {

constexpr std::uint64_t kStartBlockSeed = 0x5eed0fca11aeULL;

RowMatrix orthonormalize(const RowMatrix& block) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(block);
  Eigen::MatrixXd thin = qr.householderQ() * Eigen::MatrixXd::Identity(block.rows(), block.cols());
  return thin;
}

void apply_sign_rule(Eigen::Ref<Vector> axis) {
  Index arg = 0;
  axis.cwiseAbs().maxCoeff(&arg);
  if (axis[arg] < 0.0) axis = -axis;
}

}  // namespace

Projection pca_axes(const RowMatrix& points, Index d) {
  const Index n_points = points.rows();
  const Index n = points.cols();
  if (n_points < 2) throw ParameterError("PCA needs at least two points");
  if (d < 1 || d > n) throw ParameterError("target dimension must be in [1, " + std::to_string(n) + "]");

  Projection proj;
  proj.mean = points.colwise().mean().transpose();
  const RowMatrix centered = points.rowwise() - proj.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n_points - 1);

  const Index block = std::min(n, std::max<Index>(2 * d, d + 8));
  std::mt19937_64 rng(kStartBlockSeed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RowMatrix start(n, block);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < block; ++c) start(r, c) = gauss(rng);
  RowMatrix active = orthonormalize(start);

  Eigen::MatrixXd locked(n, 0);
  std::vector<double> locked_values;
  const double scale = std::max(cov.diagonal().sum(), std::numeric_limits<double>::min());

  int it = 0;
  Eigen::MatrixXd ritz_vectors;
  Vector ritz_values;
  Index consumed = 0;  // leading Ritz pairs of the last sweep that were locked
  for (; it < kPcaMaxIterations && static_cast<Index>(locked_values.size()) < d; ++it) {
    Eigen::MatrixXd image = cov * active;
    const Eigen::MatrixXd small = active.transpose() * image;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (small + small.transpose()));
    // Descending order.
    const Eigen::MatrixXd rot = eig.eigenvectors().rowwise().reverse();
    ritz_values = eig.eigenvalues().reverse();
    ritz_vectors = active * rot;
    image = image * rot;

    // Lock the converged prefix.
    Index n_new = 0;
    for (Index j = 0; j < ritz_vectors.cols() && static_cast<Index>(locked_values.size()) + n_new < d; ++j) {
      const double residual = (image.col(j) - ritz_values[j] * ritz_vectors.col(j)).norm();
      if (residual > kPcaTolerance * scale) break;
      ++n_new;
    }
    consumed = n_new;
    if (n_new > 0) {
      const Index old_cols = locked.cols();
      locked.conservativeResize(n, old_cols + n_new);
      locked.rightCols(n_new) = ritz_vectors.leftCols(n_new);
      for (Index j = 0; j < n_new; ++j) locked_values.push_back(ritz_values[j]);
    }
    if (static_cast<Index>(locked_values.size()) >= d) break;

    Eigen::MatrixXd next = image.rightCols(image.cols() - n_new);
    if (locked.cols() > 0) next -= locked * (locked.transpose() * next);
    // A vanishing image means the rest of the spectrum is zero; keep the old
    // directions so QR still yields an orthonormal completion.
    for (Index c = 0; c < next.cols(); ++c)
      if (next.col(c).norm() <= 1e-14 * scale) next.col(c) = ritz_vectors.col(n_new + c);
    if (locked.cols() > 0) next -= locked * (locked.transpose() * next);
    active = orthonormalize(next);
  }

  // Iteration cap hit: take the current Ritz pairs for whatever is not locked.
  for (Index j = consumed; static_cast<Index>(locked_values.size()) < d; ++j) {
    const Index old_cols = locked.cols();
    locked.conservativeResize(n, old_cols + 1);
    locked.col(old_cols) = ritz_vectors.col(j);
    locked_values.push_back(ritz_values[j]);
  }

  std::vector<Index> order(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return locked_values[static_cast<std::size_t>(x)] > locked_values[static_cast<std::size_t>(y)];
  });

  proj.axes.resize(n, d);
  proj.explained_variance.resize(d);
  for (Index j = 0; j < d; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    Vector axis = locked.col(src).normalized();
    apply_sign_rule(axis);
    proj.axes.col(j) = axis;
    proj.explained_variance[j] = std::max(0.0, locked_values[static_cast<std::size_t>(src)]);
  }
  const double top = proj.explained_variance[0];
  proj.degenerate = !(top > 0.0) || proj.explained_variance[d - 1] <= 1e-12 * top;
  proj.iterations = it + 1;
  return proj;
}

Projection seed_projection(const std::vector<ExtendedDataset>& datasets, Index d) {
  if (datasets.empty()) throw ParameterError("no datasets");
  const Index n_shared = datasets.front().n_shared();
  if (n_shared >= 2) {
    RowMatrix seed(n_shared, datasets.front().dim());
    for (Index i = 0; i < n_shared; ++i)
      seed.row(i) = Eigen::Map<const Eigen::RowVectorXd>(datasets.front().row(i).data(), seed.cols());
    return pca_axes(seed, d);
  }
  Index total = n_shared;
  for (const auto& ds : datasets) total += ds.n_local();
  RowMatrix all(total, datasets.front().dim());
  Index r = 0;
  for (Index i = 0; i < n_shared; ++i, ++r)
    all.row(r) = Eigen::Map<const Eigen::RowVectorXd>(datasets.front().row(i).data(), all.cols());
  for (const auto& ds : datasets)
    for (Index i = n_shared; i < ds.size(); ++i, ++r)
      all.row(r) = Eigen::Map<const Eigen::RowVectorXd>(ds.row(i).data(), all.cols());
  return pca_axes(all, d);
}

RowMatrix project(const RowMatrix& points, const Projection& proj) {
  if (points.cols() != proj.input_dim())
    throw ShapeError("points have " + std::to_string(points.cols()) + " features, projection expects " +
                     std::to_string(proj.input_dim()));
  return (points.rowwise() - proj.mean.transpose()) * proj.axes;
}

AlignedEmbedding pca_baseline(const std::vector<ExtendedDataset>& datasets, const Projection& proj) {
  if (datasets.empty()) throw ParameterError("no datasets");
  const Index n_shared = datasets.front().n_shared();
  std::vector<Index> sizes;
  for (const auto& ds : datasets) {
    if (ds.dim() != proj.input_dim())
      throw ShapeError("dataset has " + std::to_string(ds.dim()) + " features, projection expects " +
                       std::to_string(proj.input_dim()));
    if (ds.n_shared() != n_shared) throw ShapeError("datasets disagree on the number of shared points");
    sizes.push_back(ds.n_local());
  }
  AlignedEmbedding emb(n_shared, sizes, proj.output_dim());

  auto project_row = [&](std::span<const double> x, std::span<double> y) {
    const Eigen::Map<const Eigen::RowVectorXd> xr(x.data(), proj.input_dim());
    Eigen::Map<Eigen::RowVectorXd> yr(y.data(), proj.output_dim());
    yr = (xr - proj.mean.transpose()) * proj.axes;
  };
  for (Index i = 0; i < n_shared; ++i) project_row(datasets.front().row(i), emb.row(0, i));
  for (Index m = 0; m < static_cast<Index>(datasets.size()); ++m)
    for (Index i = n_shared; i < datasets[static_cast<std::size_t>(m)].size(); ++i)
      project_row(datasets[static_cast<std::size_t>(m)].row(i), emb.row(m, i));
  return emb;
}

AlignedEmbedding project_init(const std::vector<ExtendedDataset>& datasets, const Projection& proj, double spread) {
  if (!(spread > 0.0)) throw ParameterError("spread must be positive");
  AlignedEmbedding emb = pca_baseline(datasets, proj);
  double max_abs = emb.anchor_block().size() ? emb.anchor_block().cwiseAbs().maxCoeff() : 0.0;
  for (Index m = 0; m < emb.n_datasets(); ++m)
    if (emb.private_block(m).size()) max_abs = std::max(max_abs, emb.private_block(m).cwiseAbs().maxCoeff());
  if (!(max_abs > 0.0)) return emb;
  // Divide first so the extreme coordinate maps to exactly +-spread.
  auto rescale = [&](RowMatrix& block) { block = (block.array() / max_abs * spread).matrix(); };
  rescale(emb.anchor_block());
  for (Index m = 0; m < emb.n_datasets(); ++m) rescale(emb.private_block(m));
  return emb;
}

}  // namespace mane
