// mane: split, embed, evaluate and plot aligned neighbor embeddings.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric divergence.

#include "mane/dataset.hpp"
#include "mane/embed.hpp"
#include "mane/errors.hpp"
#include "mane/experiment.hpp"
#include "mane/graph.hpp"
#include "mane/metrics.hpp"
#include "mane/plot.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct SourceFlags {
  std::string idx_images;
  std::string idx_labels;
  std::string csv;
  std::string label_column;
  bool swiss_roll = false;
  mane::Index n = 6000;
  double noise = 0.0;
  std::uint64_t seed = 0;
  mane::Index subsample = 0;

  void attach(CLI::App& app) {
    app.add_option("--idx-images", idx_images, "IDX image file (optionally .gz)");
    app.add_option("--idx-labels", idx_labels, "IDX label file (optionally .gz)");
    app.add_option("--csv", csv, "CSV feature file");
    app.add_option("--label-column", label_column, "CSV column holding labels");
    app.add_flag("--swiss-roll", swiss_roll, "Generate a Swiss roll");
    app.add_option("--n", n, "Swiss roll sample count")->capture_default_str();
    app.add_option("--noise", noise, "Swiss roll noise standard deviation")->capture_default_str();
    app.add_option("--data-seed", seed, "Generator / subsample seed")->capture_default_str();
    app.add_option("--subsample", subsample, "Keep a seeded random subset of this many rows");
  }

  mane::DataSource source() const {
    mane::DataSource src;
    const int chosen = (!idx_images.empty()) + (!csv.empty()) + swiss_roll;
    if (chosen != 1) throw mane::ParameterError("choose exactly one of --idx-images, --csv, --swiss-roll");
    if (!idx_images.empty()) {
      src.kind = mane::DataSource::Kind::Idx;
      src.images = idx_images;
      if (!idx_labels.empty()) src.labels = idx_labels;
    } else if (!csv.empty()) {
      src.kind = mane::DataSource::Kind::Csv;
      src.csv = csv;
      if (!label_column.empty()) src.label_column = label_column;
    } else {
      src.kind = mane::DataSource::Kind::SwissRoll;
      src.n_samples = n;
      src.noise = noise;
    }
    src.generator_seed = seed;
    if (subsample > 0) src.subsample = subsample;
    return src;
  }
};

struct OptimizerFlags {
  mane::OptimizerConfig config;

  void attach(CLI::App& app) {
    app.add_option("--n-neighbors", config.n_neighbors, "Neighbors per point in the fuzzy graph")->capture_default_str();
    app.add_option("--min-dist", config.min_dist, "Minimum embedding distance")->capture_default_str();
    app.add_option("--neg-rate", config.negative_sample_rate, "Negative samples per positive edge")->capture_default_str();
    app.add_option("--epochs", config.n_epochs, "Optimization epochs")->capture_default_str();
    app.add_option("--learning-rate", config.learning_rate, "Initial learning rate")->capture_default_str();
    app.add_option("--seed", config.rng_seed, "Optimizer seed")->capture_default_str();
    app.add_option("--threads", config.n_threads, "Threads (>1 is non-deterministic)")->capture_default_str();
  }
};

std::vector<std::string> split_names(const std::string& csv) {
  std::vector<std::string> names;
  if (csv.empty()) return names;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) names.push_back(item);
  return names;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mane::IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw mane::IoError("cannot write " + path);
  out << text << '\n';
}

mane::LabeledMatrix load_table(const std::string& path, const std::string& label_column) {
  return mane::load_csv(path, label_column.empty() ? std::nullopt : std::optional<std::string>(label_column));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold-aligned neighbor embedding"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load or generate a dataset and write it as CSV");
  SourceFlags ingest_src;
  ingest_src.attach(*ingest);
  std::string ingest_out;
  ingest->add_option("--out", ingest_out, "Output CSV")->required();

  // split
  auto* split = app.add_subcommand("split", "Draw a seed set and partitions");
  std::string split_data, split_label, split_out;
  mane::Index split_shared = 1000, split_parts = 2;
  std::uint64_t split_seed = 0;
  split->add_option("--data", split_data, "Dataset CSV")->required();
  split->add_option("--label-column", split_label, "Label column");
  split->add_option("--n-shared", split_shared, "Shared points")->capture_default_str();
  split->add_option("--partitions", split_parts, "Number of partitions")->capture_default_str();
  split->add_option("--split-seed", split_seed, "Split seed")->capture_default_str();
  split->add_option("--out", split_out, "Output split JSON")->required();

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "Embed the extended datasets of a split");
  std::string embed_data, embed_label, embed_split, embed_out, embed_method = "mane";
  bool export_graphs = false;
  OptimizerFlags embed_opt;
  embed_cmd->add_option("--data", embed_data, "Dataset CSV")->required();
  embed_cmd->add_option("--label-column", embed_label, "Label column");
  embed_cmd->add_option("--split", embed_split, "Split JSON")->required();
  embed_cmd->add_option("--method", embed_method, "mane | umap | pca-baseline")->capture_default_str();
  embed_cmd->add_option("--out", embed_out, "Output directory")->required();
  embed_cmd->add_flag("--export-graphs", export_graphs, "Also write each fuzzy graph as an edge list");
  embed_opt.attach(*embed_cmd);

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Score exported coordinates");
  std::string met_data, met_label, met_split, met_coords, met_out;
  mane::Index met_k = mane::kTrustworthinessK;
  metrics_cmd->add_option("--data", met_data, "Dataset CSV")->required();
  metrics_cmd->add_option("--label-column", met_label, "Label column");
  metrics_cmd->add_option("--split", met_split, "Split JSON")->required();
  metrics_cmd->add_option("--coords", met_coords, "Coordinate CSV")->required();
  metrics_cmd->add_option("--k", met_k, "Trustworthiness neighborhood")->capture_default_str();
  metrics_cmd->add_option("--out", met_out, "Report JSON (default stdout)");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Render exported coordinates as SVG");
  std::string plot_coords, plot_out, plot_names, plot_title;
  mane::Index plot_dataset = 0;
  bool plot_union = false;
  plot_cmd->add_option("--coords", plot_coords, "Coordinate CSV")->required();
  plot_cmd->add_option("--dataset", plot_dataset, "Dataset to draw")->capture_default_str();
  plot_cmd->add_flag("--union", plot_union, "Draw all datasets, each point id once");
  plot_cmd->add_option("--label-names", plot_names, "Comma-separated legend names");
  plot_cmd->add_option("--title", plot_title, "Plot title");
  plot_cmd->add_option("--out", plot_out, "Output SVG")->required();

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Full pipeline: split, embed, evaluate, plot");
  SourceFlags exp_src;
  exp_src.attach(*exp_cmd);
  OptimizerFlags exp_opt;
  exp_opt.attach(*exp_cmd);
  mane::ExperimentConfig exp;
  std::string exp_method = "mane", exp_out = "mane_out", exp_names;
  exp_cmd->add_option("--n-shared", exp.n_shared, "Shared points")->capture_default_str();
  exp_cmd->add_option("--partitions", exp.n_partitions, "Number of partitions")->capture_default_str();
  exp_cmd->add_option("--split-seed", exp.rng_seed, "Split seed")->capture_default_str();
  exp_cmd->add_option("--method", exp_method, "mane | umap | pca-baseline")->capture_default_str();
  exp_cmd->add_option("--spread", exp.spread, "Largest absolute initial coordinate")->capture_default_str();
  exp_cmd->add_option("--metric-k", exp.metric_k, "Trustworthiness neighborhood")->capture_default_str();
  exp_cmd->add_option("--label-names", exp_names, "Comma-separated legend names");
  exp_cmd->add_option("--out", exp_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*ingest) {
      const auto data = mane::load_source(ingest_src.source());
      mane::write_csv(data, ingest_out);
      std::cerr << "wrote " << data.rows() << " x " << data.cols() << " to " << ingest_out << '\n';
    } else if (*split) {
      const auto data = load_table(split_data, split_label);
      const auto plan = mane::split_shared(data, split_shared, split_parts, split_seed);
      write_text(split_out, mane::split_to_json(plan));
    } else if (*embed_cmd) {
      const auto method = mane::parse_method(embed_method);
      embed_opt.config.validate();
      const auto data = load_table(embed_data, embed_label);
      const auto plan = mane::split_from_json(read_text(embed_split));
      const auto datasets = mane::extend_all(data, plan);
      const auto result = mane::embed(method, datasets, embed_opt.config);
      const std::filesystem::path dir(embed_out);
      std::filesystem::create_directories(dir);
      mane::write_coordinates_csv(datasets, result.views, dir / "coordinates.csv");
      if (result.aligned) mane::write_checkpoint(*result.aligned, embed_opt.config, dir / "checkpoint.f32");
      for (std::size_t t = 0; t < result.traces.size(); ++t)
        write_text((dir / ("trace_" + std::to_string(t) + ".json")).string(), result.traces[t].to_json());
      if (export_graphs)
        for (std::size_t m = 0; m < datasets.size(); ++m) {
          std::ofstream out(dir / ("graph_" + std::to_string(m) + ".txt"));
          mane::write_edge_list(mane::build_fuzzy_graph(datasets[m].materialize(), embed_opt.config.n_neighbors), out);
        }
    } else if (*metrics_cmd) {
      const auto data = load_table(met_data, met_label);
      const auto plan = mane::split_from_json(read_text(met_split));
      const auto views = mane::views_from_coordinates(mane::read_coordinates_csv(met_coords), plan);
      write_text(met_out, mane::evaluate(data, plan, views, met_k).to_json());
    } else if (*plot_cmd) {
      const auto rows = mane::read_coordinates_csv(plot_coords);
      std::vector<const mane::CoordinateRow*> chosen;
      std::set<mane::Index> seen;
      for (const auto& r : rows) {
        if (plot_union ? seen.insert(r.point_id).second : r.dataset_id == plot_dataset) chosen.push_back(&r);
      }
      if (chosen.empty()) throw mane::ConsistencyError("no coordinates selected for plotting");
      mane::RowMatrix coords(static_cast<mane::Index>(chosen.size()), static_cast<mane::Index>(chosen.front()->y.size()));
      std::vector<int> labels;
      for (std::size_t r = 0; r < chosen.size(); ++r) {
        for (std::size_t c = 0; c < chosen[r]->y.size(); ++c)
          coords(static_cast<mane::Index>(r), static_cast<mane::Index>(c)) = chosen[r]->y[c];
        labels.push_back(chosen[r]->label);
      }
      mane::emit_plot(coords, labels, split_names(plot_names), plot_out, plot_title);
    } else if (*exp_cmd) {
      exp.source = exp_src.source();
      exp.optimizer = exp_opt.config;
      exp.method = mane::parse_method(exp_method);
      exp.output_dir = exp_out;
      exp.label_names = split_names(exp_names);
      const auto report = mane::run_experiment(exp);
      std::cout << report.to_json() << '\n';
    }
  } catch (const mane::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case mane::ErrorKind::Config: return kExitConfig;
      case mane::ErrorKind::Data: return kExitData;
      case mane::ErrorKind::Numeric: return kExitNumeric;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
