#include "mane/metrics.hpp"

#include "mane/distance.hpp"
#include "mane/errors.hpp"
#include "mane/graph.hpp"

#include "json.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace mane {

std::int64_t trustworthiness_penalty(const RowMatrix& high, const RowMatrix& low, Index k) {
  const Index n = high.rows();
  if (low.rows() != n) throw ShapeError("high and low dimensional point counts differ");
  const auto low_neighbors = knn(low, k);

  const BlockedSquaredDistances engine(high);
  std::int64_t penalty = 0;
  engine.for_each_row([&](Index i, std::span<const double> approx) {
    const double band = engine.error_bound(i);
    const auto xi = row_span(high, i);
    for (Index s = 0; s < k; ++s) {
      const Index j = low_neighbors.indices(i, s);
      const double dij = squared_distance(xi, row_span(high, j));
      // rank - 1 = number of points ordered strictly before j around i.
      std::int64_t before = 0;
      for (Index l = 0; l < n; ++l) {
        if (l == i || l == j) continue;
        const double a = approx[static_cast<std::size_t>(l)];
        if (a < dij - band) {
          ++before;
        } else if (a <= dij + band) {
          const double dil = squared_distance(xi, row_span(high, l));
          if (dil < dij || (dil == dij && l < j)) ++before;
        }
      }
      const std::int64_t rank = before + 1;
      if (rank > k) penalty += rank - k;
    }
  });
  return penalty;
}

double trustworthiness(const RowMatrix& high, const RowMatrix& low, Index k) {
  const Index n = high.rows();
  if (k < 1) throw ParameterError("k must be positive");
  const double norm = static_cast<double>(n) * static_cast<double>(k) * static_cast<double>(2 * n - 3 * k - 1);
  if (!(norm > 0.0) || k >= n)
    throw ParameterError("trustworthiness needs 2n - 3k - 1 > 0 (n = " + std::to_string(n) +
                         ", k = " + std::to_string(k) + ")");
  const auto penalty = trustworthiness_penalty(high, low, k);
  return 1.0 - 2.0 / norm * static_cast<double>(penalty);
}

double procrustes_distance(const RowMatrix& x, const RowMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw ShapeError("Procrustes inputs must have the same shape");
  if (x.rows() < 2) throw ShapeError("Procrustes distance needs at least two points");
  if (x == y) return 0.0;

  const RowMatrix xc = x.rowwise() - x.colwise().mean();
  const RowMatrix yc = y.rowwise() - y.colwise().mean();
  const double nx = xc.norm();
  const double ny = yc.norm();
  if (!(nx > 0.0) || !(ny > 0.0)) throw DegenerateInputError("Procrustes input has all points equal");
  const Eigen::MatrixXd xn = xc / nx;
  const Eigen::MatrixXd yn = yc / ny;

  // Minimize ||xn - c yn R|| over orthogonal R and scale c.
  const Eigen::MatrixXd cross = yn.transpose() * xn;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd rotation = svd.matrixU() * svd.matrixV().transpose();
  const double scale = svd.singularValues().sum();
  return (xn - scale * yn * rotation).norm();
}

double anchor_drift(const std::vector<RowMatrix>& views, Index n_shared) {
  double drift = 0.0;
  for (std::size_t a = 0; a < views.size(); ++a)
    for (std::size_t b = a + 1; b < views.size(); ++b) {
      if (views[a].rows() < n_shared || views[b].rows() < n_shared || views[a].cols() != views[b].cols())
        throw ShapeError("views do not share the anchor block shape");
      if (n_shared > 0)
        drift = std::max(drift, (views[a].topRows(n_shared) - views[b].topRows(n_shared)).rowwise().norm().maxCoeff());
    }
  return drift;
}

double anchor_drift(const AlignedEmbedding& embedding) {
  std::vector<RowMatrix> views;
  for (Index m = 0; m < embedding.n_datasets(); ++m) views.push_back(embedding.view(m));
  return anchor_drift(views, embedding.n_shared());
}

namespace {

template <class F>
Measured<double> measure(F&& f) {
  try {
    return {f(), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

nlohmann::json to_json(const Measured<double>& m) {
  if (m.value) return *m.value;
  return {{"value", nullptr}, {"reason", m.reason}};
}

}  // namespace

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["k_used"] = k_used;
  j["trustworthiness_per_dataset"] = nlohmann::json::array();
  for (const auto& t : trustworthiness_per_dataset) j["trustworthiness_per_dataset"].push_back(mane::to_json(t));
  j["trustworthiness_union"] = mane::to_json(trustworthiness_union);
  j["procrustes_shared"] = nlohmann::json::array();
  for (const auto& p : procrustes_shared)
    j["procrustes_shared"].push_back({{"datasets", {p.first, p.second}}, {"distance", mane::to_json(p.distance)}});
  j["anchor_drift"] = mane::to_json(anchor_drift);
  return j.dump(2);
}

MetricReport evaluate(const LabeledMatrix& data, const SplitPlan& plan, const std::vector<RowMatrix>& views, Index k) {
  if (static_cast<Index>(views.size()) != plan.n_partitions())
    throw ShapeError("got " + std::to_string(views.size()) + " views for " + std::to_string(plan.n_partitions()) +
                     " partitions");
  const Index n_shared = plan.n_shared();
  MetricReport report;
  report.k_used = k;

  const auto datasets = extend_all(data, plan);
  for (std::size_t m = 0; m < views.size(); ++m) {
    if (views[m].rows() != datasets[m].size()) throw ShapeError("view " + std::to_string(m) + " has the wrong size");
    report.trustworthiness_per_dataset.push_back(
        measure([&] { return trustworthiness(datasets[m].materialize(), views[m], k); }));
  }

  if (views.size() < 2) {
    report.anchor_drift = {std::nullopt, "needs at least two datasets"};
  } else {
    report.anchor_drift = measure([&] { return anchor_drift(views, n_shared); });
  }

  for (std::size_t a = 0; a < views.size(); ++a)
    for (std::size_t b = a + 1; b < views.size(); ++b) {
      PairProcrustes pair{static_cast<Index>(a), static_cast<Index>(b), {}};
      if (n_shared < 2)
        pair.distance = {std::nullopt, "fewer than two shared points"};
      else
        pair.distance = measure(
            [&] { return procrustes_distance(views[a].topRows(n_shared), views[b].topRows(n_shared)); });
      report.procrustes_shared.push_back(pair);
    }

  const bool single_location = views.size() == 1 || (report.anchor_drift.value && *report.anchor_drift.value == 0.0);
  if (!single_location) {
    report.trustworthiness_union = {std::nullopt, "shared points have different coordinates in different datasets"};
  } else {
    const auto ids = union_row_ids(plan);
    RowMatrix high(static_cast<Index>(ids.size()), data.cols());
    for (std::size_t r = 0; r < ids.size(); ++r) high.row(static_cast<Index>(r)) = data.points.row(ids[r]);
    RowMatrix low(high.rows(), views.front().cols());
    low.topRows(n_shared) = views.front().topRows(n_shared);
    Index offset = n_shared;
    for (const auto& v : views) {
      low.middleRows(offset, v.rows() - n_shared) = v.bottomRows(v.rows() - n_shared);
      offset += v.rows() - n_shared;
    }
    report.trustworthiness_union = measure([&] { return trustworthiness(high, low, k); });
  }
  return report;
}

}  // namespace mane
