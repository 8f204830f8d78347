#include "mane/dataset.hpp"
#include "mane/embed.hpp"
#include "mane/errors.hpp"
#include "mane/experiment.hpp"
#include "mane/graph.hpp"
#include "mane/init.hpp"
#include "mane/kernel.hpp"
#include "mane/metrics.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;

namespace {

mane::LabeledMatrix make_data(const mane::RowMatrix& points, std::vector<int> labels) {
  mane::LabeledMatrix data{points, std::move(labels), {}};
  data.validate();
  return data;
}

py::dict split_to_dict(const mane::SplitPlan& plan) {
  py::dict d;
  d["n_rows"] = plan.n_rows;
  d["seed_indices"] = plan.seed_indices;
  d["partitions"] = plan.partitions;
  d["rng_seed"] = plan.rng_seed;
  return d;
}

mane::SplitPlan split_from_dict(const py::dict& d) {
  mane::SplitPlan plan;
  plan.n_rows = d["n_rows"].cast<mane::Index>();
  plan.seed_indices = d["seed_indices"].cast<std::vector<mane::Index>>();
  plan.partitions = d["partitions"].cast<std::vector<std::vector<mane::Index>>>();
  if (d.contains("rng_seed")) plan.rng_seed = d["rng_seed"].cast<std::uint64_t>();
  plan.validate();
  return plan;
}

}  // namespace

PYBIND11_MODULE(_mane, m) {
  m.doc() = "Manifold-aligned neighbor embedding";

  auto base = py::register_exception<mane::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<mane::DivergenceError>(m, "DivergenceError", base.ptr());

  py::class_<mane::OptimizerConfig>(m, "OptimizerConfig")
      .def(py::init<>())
      .def_readwrite("n_epochs", &mane::OptimizerConfig::n_epochs)
      .def_readwrite("learning_rate", &mane::OptimizerConfig::learning_rate)
      .def_readwrite("negative_sample_rate", &mane::OptimizerConfig::negative_sample_rate)
      .def_readwrite("n_neighbors", &mane::OptimizerConfig::n_neighbors)
      .def_readwrite("min_dist", &mane::OptimizerConfig::min_dist)
      .def_readwrite("rng_seed", &mane::OptimizerConfig::rng_seed)
      .def_readwrite("grad_clip", &mane::OptimizerConfig::grad_clip)
      .def_readwrite("repulsion_epsilon", &mane::OptimizerConfig::repulsion_epsilon)
      .def_readwrite("move_both_endpoints", &mane::OptimizerConfig::move_both_endpoints)
      .def_readwrite("n_threads", &mane::OptimizerConfig::n_threads)
      .def("validate", &mane::OptimizerConfig::validate);

  m.def(
      "load_idx",
      [](const std::filesystem::path& images, std::optional<std::filesystem::path> labels) {
        auto data = mane::load_idx(images, labels);
        return py::make_tuple(data.points, data.labels, data.label_names);
      },
      py::arg("images"), py::arg("labels") = py::none(), "Returns (points in [0, 1], labels, label_names).");

  m.def(
      "load_csv",
      [](const std::filesystem::path& path, std::optional<std::string> label_column) {
        auto data = mane::load_csv(path, label_column);
        return py::make_tuple(data.points, data.labels, data.label_names);
      },
      py::arg("path"), py::arg("label_column") = py::none());

  m.def(
      "gen_swiss_roll",
      [](mane::Index n, double noise, std::uint64_t seed) {
        auto data = mane::gen_swiss_roll(n, noise, seed);
        return py::make_tuple(data.points, data.labels);
      },
      py::arg("n_samples"), py::arg("noise") = 0.0, py::arg("seed") = 0);

  m.def(
      "split_shared",
      [](mane::Index n_rows, mane::Index n_shared, mane::Index n_partitions, std::uint64_t seed) {
        return split_to_dict(mane::split_shared(n_rows, n_shared, n_partitions, seed));
      },
      py::arg("n_rows"), py::arg("n_shared"), py::arg("n_partitions"), py::arg("seed") = 0);

  m.def(
      "knn",
      [](const mane::RowMatrix& points, mane::Index k) {
        auto nn = mane::knn(points, k);
        return py::make_tuple(nn.indices, nn.distances);
      },
      py::arg("points"), py::arg("k"), "Exact k nearest neighbors: (indices, distances).");

  m.def(
      "fuzzy_graph",
      [](const mane::RowMatrix& points, mane::Index k) {
        const auto g = mane::build_fuzzy_graph(points, k);
        std::vector<mane::Index> i, j;
        std::vector<double> w;
        for (const auto& e : g.edges) {
          i.push_back(e.i);
          j.push_back(e.j);
          w.push_back(e.weight);
        }
        return py::make_tuple(i, j, w);
      },
      py::arg("points"), py::arg("k"), "Symmetric edge list (i, j, weight) with i < j.");

  m.def(
      "fit_ab",
      [](double min_dist) {
        const auto p = mane::fit_ab(min_dist);
        return py::make_tuple(p.a, p.b);
      },
      py::arg("min_dist") = 0.1);

  m.def(
      "pca_axes",
      [](const mane::RowMatrix& points, mane::Index d) {
        const auto p = mane::pca_axes(points, d);
        return py::make_tuple(p.mean, p.axes, p.explained_variance);
      },
      py::arg("points"), py::arg("d") = 2, "(mean, axes n x d, explained variance).");

  m.def(
      "embed_umap",
      [](const mane::RowMatrix& points, const mane::OptimizerConfig& config, mane::Index dim) {
        py::gil_scoped_release release;
        return mane::embed_umap(points, config, dim).coordinates;
      },
      py::arg("points"), py::arg("config") = mane::OptimizerConfig{}, py::arg("dim") = 2);

  m.def(
      "embed_mane",
      [](const mane::RowMatrix& points, const py::dict& split, const mane::OptimizerConfig& config,
         mane::Index dim, const std::string& method) {
        const auto data = make_data(points, {});
        const auto plan = split_from_dict(split);
        if (plan.n_rows != data.rows()) throw mane::ConsistencyError("split does not match the number of points");
        const auto datasets = mane::extend_all(data, plan);
        py::gil_scoped_release release;
        return mane::embed(mane::parse_method(method), datasets, config, dim).views;
      },
      py::arg("points"), py::arg("split"), py::arg("config") = mane::OptimizerConfig{}, py::arg("dim") = 2,
      py::arg("method") = "mane", "One coordinate array per extended dataset, anchors first.");

  m.def("trustworthiness", &mane::trustworthiness, py::arg("high"), py::arg("low"), py::arg("k") = mane::kTrustworthinessK);
  m.def("procrustes_distance", &mane::procrustes_distance, py::arg("x"), py::arg("y"));
  m.def(
      "anchor_drift", [](const std::vector<mane::RowMatrix>& views, mane::Index n_shared) {
        return mane::anchor_drift(views, n_shared);
      },
      py::arg("views"), py::arg("n_shared"));

  m.def(
      "evaluate",
      [](const mane::RowMatrix& points, const py::dict& split, const std::vector<mane::RowMatrix>& views, mane::Index k) {
        return mane::evaluate(make_data(points, {}), split_from_dict(split), views, k).to_json();
      },
      py::arg("points"), py::arg("split"), py::arg("views"), py::arg("k") = mane::kTrustworthinessK,
      "Metric report as a JSON string.");

  m.def(
      "run_swiss_roll_experiment",
      [](mane::Index n_samples, double noise, mane::Index n_shared, mane::Index n_partitions,
         const mane::OptimizerConfig& config, const std::filesystem::path& output_dir, std::uint64_t seed,
         const std::string& method) {
        mane::ExperimentConfig exp;
        exp.source.kind = mane::DataSource::Kind::SwissRoll;
        exp.source.n_samples = n_samples;
        exp.source.noise = noise;
        exp.source.generator_seed = seed;
        exp.n_shared = n_shared;
        exp.n_partitions = n_partitions;
        exp.optimizer = config;
        exp.output_dir = output_dir;
        exp.rng_seed = seed;
        exp.method = mane::parse_method(method);
        py::gil_scoped_release release;
        return mane::run_experiment(exp).to_json();
      },
      py::arg("n_samples"), py::arg("noise"), py::arg("n_shared"), py::arg("n_partitions"),
      py::arg("config") = mane::OptimizerConfig{}, py::arg("output_dir") = "mane_out", py::arg("seed") = 0,
      py::arg("method") = "mane", "Full pipeline on a generated Swiss roll; returns report.json contents.");
}
