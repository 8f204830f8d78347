#include "mane/embed.hpp"

#include "mane/errors.hpp"

#include "json.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace mane {

namespace {

FuzzyGraph graph_for(const ExtendedDataset& ds, Index k, Index& n_clamped) {
  const auto neighbors = knn(ds, k);
  const auto params = smooth_knn_params(neighbors);
  n_clamped += params.n_clamped();
  return symmetrize_tconorm(directed_weights(neighbors, params));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ManeRun embed_mane(const std::vector<ExtendedDataset>& datasets, const OptimizerConfig& config, Index dim,
                   double spread) {
  config.validate();
  if (datasets.empty()) throw ParameterError("no datasets to embed");
  for (const auto& ds : datasets)
    if (ds.n_shared() != datasets.front().n_shared()) throw ShapeError("datasets disagree on the number of shared points");

  ManeRun run;
  run.kernel = fit_ab(config.min_dist);
  run.spread = spread;
  std::vector<FuzzyGraph> graphs;
  for (const auto& ds : datasets) {
    graphs.push_back(graph_for(ds, config.n_neighbors, run.n_clamped_rows));
    run.n_edges.push_back(static_cast<Index>(graphs.back().edges.size()));
  }
  run.projection = seed_projection(datasets, dim);
  run.embedding = project_init(datasets, run.projection, spread);
  run.trace = optimize(run.embedding, graphs, run.kernel, config);
  return run;
}

UmapRun embed_umap(const RowMatrix& points, const OptimizerConfig& config, Index dim, double spread) {
  LabeledMatrix single;
  single.points = points;
  SplitPlan plan;
  plan.n_rows = points.rows();
  plan.partitions.emplace_back(static_cast<std::size_t>(points.rows()));
  std::iota(plan.partitions.front().begin(), plan.partitions.front().end(), Index{0});
  auto run = embed_mane({extend(single, plan, 0)}, config, dim, spread);
  return {run.embedding.view(0), std::move(run.trace), run.kernel, run.n_clamped_rows};
}

Method parse_method(const std::string& name) {
  if (name == "mane") return Method::Mane;
  if (name == "umap") return Method::Umap;
  if (name == "pca-baseline") return Method::PcaBaseline;
  throw ParameterError("unknown method '" + name + "' (expected mane, umap or pca-baseline)");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::Mane: return "mane";
    case Method::Umap: return "umap";
    case Method::PcaBaseline: return "pca-baseline";
  }
  return "?";
}

MultiEmbedding embed(Method method, const std::vector<ExtendedDataset>& datasets, const OptimizerConfig& config,
                     Index dim, double spread) {
  MultiEmbedding out;
  out.method = method;
  out.spread = spread;
  switch (method) {
    case Method::Mane: {
      auto run = embed_mane(datasets, config, dim, spread);
      for (Index m = 0; m < run.embedding.n_datasets(); ++m) out.views.push_back(run.embedding.view(m));
      out.traces.push_back(std::move(run.trace));
      out.kernel = run.kernel;
      out.n_clamped_rows = run.n_clamped_rows;
      out.aligned = std::move(run.embedding);
      break;
    }
    case Method::Umap: {
      for (const auto& ds : datasets) {
        auto run = embed_umap(ds.materialize(), config, dim, spread);
        out.views.push_back(std::move(run.coordinates));
        out.traces.push_back(std::move(run.trace));
        out.kernel = run.kernel;
        out.n_clamped_rows += run.n_clamped_rows;
      }
      break;
    }
    case Method::PcaBaseline: {
      auto baseline = pca_baseline(datasets, seed_projection(datasets, dim));
      for (Index m = 0; m < baseline.n_datasets(); ++m) out.views.push_back(baseline.view(m));
      out.aligned = std::move(baseline);
      break;
    }
  }
  return out;
}

void write_coordinates_csv(const std::vector<ExtendedDataset>& datasets, const std::vector<RowMatrix>& views,
                           const std::filesystem::path& path) {
  if (datasets.size() != views.size()) throw ShapeError("one view per dataset expected");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const Index dim = views.empty() ? 0 : views.front().cols();
  out << "dataset_id,point_id,label";
  for (Index c = 0; c < dim; ++c) out << ",y" << c;
  out << '\n';
  out.precision(17);
  for (std::size_t m = 0; m < views.size(); ++m) {
    if (views[m].rows() != datasets[m].size()) throw ShapeError("view size does not match dataset size");
    for (Index i = 0; i < views[m].rows(); ++i) {
      out << m << ',' << datasets[m].source_id(i) << ',' << datasets[m].label(i);
      for (Index c = 0; c < dim; ++c) out << ',' << views[m](i, c);
      out << '\n';
    }
  }
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<CoordinateRow> read_coordinates_csv(const std::filesystem::path& path) {
  const auto table = load_csv(path);
  if (table.cols() < 4) throw ParseError("coordinate CSV needs dataset_id, point_id, label and coordinates");
  std::vector<CoordinateRow> rows;
  for (Index r = 0; r < table.rows(); ++r) {
    CoordinateRow row;
    row.dataset_id = static_cast<Index>(table.points(r, 0));
    row.point_id = static_cast<Index>(table.points(r, 1));
    row.label = static_cast<int>(table.points(r, 2));
    for (Index c = 3; c < table.cols(); ++c) row.y.push_back(table.points(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RowMatrix> views_from_coordinates(const std::vector<CoordinateRow>& rows, const SplitPlan& plan) {
  if (rows.empty()) throw ParseError("no coordinates");
  const Index dim = static_cast<Index>(rows.front().y.size());
  std::vector<std::map<Index, const CoordinateRow*>> by_dataset(static_cast<std::size_t>(plan.n_partitions()));
  for (const auto& row : rows) {
    if (row.dataset_id < 0 || row.dataset_id >= plan.n_partitions())
      throw ConsistencyError("dataset_id " + std::to_string(row.dataset_id) + " not in split plan");
    by_dataset[static_cast<std::size_t>(row.dataset_id)][row.point_id] = &row;
  }
  std::vector<RowMatrix> views;
  for (Index m = 0; m < plan.n_partitions(); ++m) {
    std::vector<Index> ids = plan.seed_indices;
    const auto& part = plan.partitions[static_cast<std::size_t>(m)];
    ids.insert(ids.end(), part.begin(), part.end());
    RowMatrix view(static_cast<Index>(ids.size()), dim);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      const auto& lookup = by_dataset[static_cast<std::size_t>(m)];
      const auto it = lookup.find(ids[r]);
      if (it == lookup.end())
        throw ConsistencyError("point " + std::to_string(ids[r]) + " missing from dataset " + std::to_string(m));
      for (Index c = 0; c < dim; ++c) view(static_cast<Index>(r), c) = it->second->y[static_cast<std::size_t>(c)];
    }
    views.push_back(std::move(view));
  }
  return views;
}

std::string config_to_json(const OptimizerConfig& config) {
  nlohmann::json j{{"n_epochs", config.n_epochs},
                   {"learning_rate", config.learning_rate},
                   {"negative_sample_rate", config.negative_sample_rate},
                   {"n_neighbors", config.n_neighbors},
                   {"min_dist", config.min_dist},
                   {"rng_seed", config.rng_seed},
                   {"grad_clip", config.grad_clip},
                   {"repulsion_epsilon", config.repulsion_epsilon},
                   {"move_both_endpoints", config.move_both_endpoints},
                   {"n_threads", config.n_threads}};
  return j.dump();
}

void write_checkpoint(const AlignedEmbedding& embedding, const OptimizerConfig& config,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  auto dump = [&](const RowMatrix& block) {
    for (Index p = 0; p < block.size(); ++p) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(block.data()[p]));
      const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                             static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
      out.write(bytes, 4);
    }
  };
  dump(embedding.anchor_block());
  std::vector<Index> sizes;
  for (Index m = 0; m < embedding.n_datasets(); ++m) {
    dump(embedding.private_block(m));
    sizes.push_back(embedding.private_size(m));
  }
  if (!out) throw IoError("short write to " + path.string());

  nlohmann::json meta{{"n_shared", embedding.n_shared()},
                      {"n_datasets", embedding.n_datasets()},
                      {"private_sizes", sizes},
                      {"dim", embedding.dim()},
                      {"dtype", "float32-le"},
                      {"config", nlohmann::json::parse(config_to_json(config))}};
  std::ofstream side(path.string() + ".json");
  side << meta.dump(2) << '\n';
  if (!side) throw IoError("cannot write checkpoint sidecar for " + path.string());
}

AlignedEmbedding read_checkpoint(const std::filesystem::path& path) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text(path.string() + ".json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint sidecar: ") + e.what());
  }
  AlignedEmbedding emb(meta.at("n_shared").get<Index>(), meta.at("private_sizes").get<std::vector<Index>>(),
                       meta.at("dim").get<Index>());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  auto load = [&](RowMatrix& block) {
    for (Index p = 0; p < block.size(); ++p) {
      unsigned char b[4];
      in.read(reinterpret_cast<char*>(b), 4);
      if (!in) throw IoError("truncated checkpoint " + path.string());
      const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
      block.data()[p] = std::bit_cast<float>(bits);
    }
  };
  load(emb.anchor_block());
  for (Index m = 0; m < emb.n_datasets(); ++m) load(emb.private_block(m));
  return emb;
}

}  // namespace mane
