#include "mane/experiment.hpp"

#include "mane/plot.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <random>

namespace mane {

namespace {

template <class F>
auto in_phase(const std::string& phase, std::map<std::string, double>& timings, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      timings[phase] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    } else {
      auto result = f();
      timings[phase] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return result;
    }
  } catch (const PhaseError&) {
    throw;
  } catch (const Error& e) {
    throw PhaseError(phase, e);
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<int> view_labels(const ExtendedDataset& ds) {
  std::vector<int> labels;
  if (!ds.source().has_labels()) return labels;
  for (Index i = 0; i < ds.size(); ++i) labels.push_back(ds.label(i));
  return labels;
}

}  // namespace

LabeledMatrix load_source(const DataSource& source) {
  LabeledMatrix data;
  switch (source.kind) {
    case DataSource::Kind::Idx: data = load_idx(source.images, source.labels); break;
    case DataSource::Kind::Csv: data = load_csv(source.csv, source.label_column); break;
    case DataSource::Kind::SwissRoll: data = gen_swiss_roll(source.n_samples, source.noise, source.generator_seed); break;
  }
  data.validate();
  if (source.subsample) data = subsample_rows(data, *source.subsample, source.generator_seed);
  return data;
}

LabeledMatrix subsample_rows(const LabeledMatrix& data, Index count, std::uint64_t rng_seed) {
  if (count < 1 || count > data.rows())
    throw CapacityError("cannot take " + std::to_string(count) + " rows from " + std::to_string(data.rows()));
  std::vector<Index> perm(static_cast<std::size_t>(data.rows()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(rng_seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  perm.resize(static_cast<std::size_t>(count));
  std::sort(perm.begin(), perm.end());

  LabeledMatrix out;
  out.points.resize(count, data.cols());
  for (Index r = 0; r < count; ++r) out.points.row(r) = data.points.row(perm[static_cast<std::size_t>(r)]);
  if (data.has_labels())
    for (Index id : perm) out.labels.push_back(data.labels[static_cast<std::size_t>(id)]);
  out.label_names = data.label_names;
  return out;
}

void ExperimentConfig::validate(Index n_rows) const {
  optimizer.validate();
  if (dim < 1) throw ParameterError("dim must be positive");
  if (n_partitions < 1) throw ParameterError("n_partitions must be at least 1");
  if (n_shared < 0) throw ParameterError("n_shared must be nonnegative");
  if (n_shared + n_partitions > n_rows)
    throw CapacityError("n_shared + n_partitions exceeds the " + std::to_string(n_rows) + " available rows");
  const Index smallest = n_shared + (n_rows - n_shared) / n_partitions;
  if (method != Method::PcaBaseline && optimizer.n_neighbors >= smallest)
    throw ParameterError("n_neighbors = " + std::to_string(optimizer.n_neighbors) +
                         " needs extended datasets larger than " + std::to_string(smallest) + " points");
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json src;
  switch (source.kind) {
    case DataSource::Kind::Idx:
      src = {{"kind", "idx"}, {"images", source.images.string()}};
      if (source.labels) src["labels"] = source.labels->string();
      break;
    case DataSource::Kind::Csv:
      src = {{"kind", "csv"}, {"path", source.csv.string()}};
      if (source.label_column) src["label_column"] = *source.label_column;
      break;
    case DataSource::Kind::SwissRoll:
      src = {{"kind", "swiss-roll"}, {"n_samples", source.n_samples}, {"noise", source.noise}};
      break;
  }
  src["generator_seed"] = source.generator_seed;
  if (source.subsample) src["subsample"] = *source.subsample;
  nlohmann::json j{{"source", src},
                   {"n_shared", n_shared},
                   {"n_partitions", n_partitions},
                   {"method", method_name(method)},
                   {"optimizer", nlohmann::json::parse(config_to_json(optimizer))},
                   {"output_dir", output_dir.string()},
                   {"rng_seed", rng_seed},
                   {"dim", dim},
                   {"spread", spread},
                   {"metric_k", metric_k}};
  return j.dump();
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config_json);
  j["metrics"] = nlohmann::json::parse(metrics.to_json());
  j["timings_seconds"] = timings_seconds;
  j["outputs"] = outputs;
  j["kernel"] = {{"a", kernel.a}, {"b", kernel.b}, {"min_dist", kernel.min_dist}, {"fit_mse", kernel.fit_mse}};
  j["init_spread"] = spread;
  j["n_clamped_rows"] = n_clamped_rows;
  j["final_sampled_loss"] = final_sampled_loss;
  return j.dump(2);
}

RunReport run_experiment(const ExperimentConfig& config) {
  RunReport report;
  report.config_json = config.to_json();
  report.spread = config.spread;
  auto& timings = report.timings_seconds;

  LabeledMatrix data = in_phase("load", timings, [&] { return load_source(config.source); });
  if (!config.label_names.empty()) data.label_names = config.label_names;

  const SplitPlan plan = in_phase("split", timings, [&] {
    config.validate(data.rows());
    return split_shared(data, config.n_shared, config.n_partitions, config.rng_seed);
  });
  const auto datasets = extend_all(data, plan);

  const MultiEmbedding result =
      in_phase("embed", timings, [&] { return embed(config.method, datasets, config.optimizer, config.dim, config.spread); });
  report.kernel = result.kernel;
  report.n_clamped_rows = result.n_clamped_rows;
  for (const auto& trace : result.traces)
    if (!trace.epochs.empty()) report.final_sampled_loss.push_back(trace.epochs.back().sampled_loss);

  report.metrics = in_phase("metrics", timings, [&] { return evaluate(data, plan, result.views, config.metric_k); });

  in_phase("outputs", timings, [&] {
    const auto& dir = config.output_dir;
    std::filesystem::create_directories(dir);
    write_text(dir / "split.json", split_to_json(plan));
    report.outputs["split"] = (dir / "split.json").string();
    write_coordinates_csv(datasets, result.views, dir / "coordinates.csv");
    report.outputs["coordinates"] = (dir / "coordinates.csv").string();
    if (result.aligned) {
      write_checkpoint(*result.aligned, config.optimizer, dir / "checkpoint.f32");
      report.outputs["checkpoint"] = (dir / "checkpoint.f32").string();
    }
    if (!result.traces.empty()) {
      nlohmann::json traces = nlohmann::json::array();
      for (const auto& t : result.traces) traces.push_back(nlohmann::json::parse(t.to_json()));
      write_text(dir / "trace.json", traces.dump(1));
      report.outputs["trace"] = (dir / "trace.json").string();
    }
    if (config.write_plots && config.dim == 2) {
      for (std::size_t m = 0; m < datasets.size(); ++m) {
        const auto path = dir / ("dataset_" + std::to_string(m) + ".svg");
        emit_plot(result.views[m], view_labels(datasets[m]), data.label_names, path,
                  method_name(config.method) + " dataset " + std::to_string(m));
        report.outputs["plot_dataset_" + std::to_string(m)] = path.string();
      }
      if (result.aligned) {
        std::vector<int> labels;
        if (data.has_labels())
          for (Index id : union_row_ids(plan)) labels.push_back(data.labels[static_cast<std::size_t>(id)]);
        const auto path = dir / "union.svg";
        emit_plot(result.aligned->union_coordinates(), labels, data.label_names, path,
                  method_name(config.method) + " union");
        report.outputs["plot_union"] = path.string();
      }
    }
    report.outputs["report"] = (dir / "report.json").string();
    write_text(dir / "report.json", report.to_json());
  });
  return report;
}

}  // namespace mane
