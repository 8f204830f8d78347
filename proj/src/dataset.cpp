#include "mane/dataset.hpp"

#include "mane/errors.hpp"

#include "json.hpp"
#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mane {

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

std::string read_file_bytes(const std::filesystem::path& path) {
  if (path.extension() == ".gz") {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (f == nullptr) throw IoError("cannot open " + path.string());
    std::string out;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
    const bool failed = n < 0;
    gzclose(f);
    if (failed) throw IoError("gzip stream error in " + path.string());
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  if (path.extension() == ".gz") {
    gzFile f = gzopen(path.string().c_str(), "wb9");
    if (f == nullptr) throw IoError("cannot write " + path.string());
    const int n = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(f);
    if (n != static_cast<int>(bytes.size())) throw IoError("short write to " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

  std::uint32_t be_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v = (v << 8) | static_cast<unsigned char>(bytes_[pos_++]);
    return v;
  }

  const unsigned char* take(std::size_t n) {
    need(n);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += n;
    return p;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("truncated IDX file " + name_);
  }

  const std::string& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

void put_be_u32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

}  // namespace

void LabeledMatrix::validate() const {
  if (points.rows() < 1 || points.cols() < 1) throw ConsistencyError("dataset must have at least one row and column");
  if (!labels.empty() && static_cast<Index>(labels.size()) != points.rows())
    throw ConsistencyError("label count " + std::to_string(labels.size()) + " does not match row count " +
                           std::to_string(points.rows()));
  if (!points.allFinite()) throw ConsistencyError("dataset contains non-finite values");
}

void SplitPlan::validate() const {
  if (partitions.empty()) throw ParameterError("split plan has no partitions");
  std::vector<char> seen(static_cast<std::size_t>(n_rows), 0);
  auto mark = [&](Index id) {
    if (id < 0 || id >= n_rows) throw IndexError("split index " + std::to_string(id) + " out of range");
    if (seen[static_cast<std::size_t>(id)]) throw ConsistencyError("split index " + std::to_string(id) + " repeated");
    seen[static_cast<std::size_t>(id)] = 1;
  };
  for (Index id : seed_indices) mark(id);
  for (const auto& part : partitions)
    for (Index id : part) mark(id);
}

ExtendedDataset::ExtendedDataset(const LabeledMatrix& source, std::vector<Index> row_ids, Index n_shared)
    : source_(&source), row_ids_(std::move(row_ids)), n_shared_(n_shared) {}

int ExtendedDataset::label(Index i) const {
  return source_->has_labels() ? source_->labels.at(static_cast<std::size_t>(row_ids_.at(i))) : 0;
}

RowMatrix ExtendedDataset::materialize() const {
  RowMatrix out(size(), dim());
  for (Index i = 0; i < size(); ++i) out.row(i) = source_->points.row(row_ids_[i]);
  return out;
}

LabeledMatrix load_idx(const std::filesystem::path& images, const std::optional<std::filesystem::path>& labels) {
  const std::string image_bytes = read_file_bytes(images);
  ByteReader img(image_bytes, images.string());
  const std::uint32_t magic = img.be_u32();
  if (magic != kIdxImageMagic) {
    std::ostringstream msg;
    msg << "bad IDX image magic 0x" << std::hex << magic << " in " << images.string();
    throw FormatError(msg.str());
  }
  const std::uint32_t count = img.be_u32();
  const std::uint32_t rows = img.be_u32();
  const std::uint32_t cols = img.be_u32();
  if (count == 0 || rows == 0 || cols == 0) throw ConsistencyError("IDX image file has a zero dimension");
  const std::size_t n_features = static_cast<std::size_t>(rows) * cols;

  LabeledMatrix out;
  out.points.resize(count, static_cast<Index>(n_features));
  const unsigned char* pixels = img.take(static_cast<std::size_t>(count) * n_features);
  double* dst = out.points.data();
  for (std::size_t p = 0; p < static_cast<std::size_t>(count) * n_features; ++p) dst[p] = pixels[p] / 255.0;

  if (labels) {
    const std::string label_bytes = read_file_bytes(*labels);
    ByteReader lab(label_bytes, labels->string());
    const std::uint32_t lmagic = lab.be_u32();
    if (lmagic != kIdxLabelMagic) {
      std::ostringstream msg;
      msg << "bad IDX label magic 0x" << std::hex << lmagic << " in " << labels->string();
      throw FormatError(msg.str());
    }
    const std::uint32_t lcount = lab.be_u32();
    if (lcount != count)
      throw ConsistencyError("label count " + std::to_string(lcount) + " does not match image count " +
                             std::to_string(count));
    const unsigned char* values = lab.take(lcount);
    out.labels.assign(values, values + lcount);
    const int max_label = *std::max_element(out.labels.begin(), out.labels.end());
    for (int c = 0; c <= max_label; ++c) out.label_names.push_back(std::to_string(c));
  }
  return out;
}

void write_idx(const LabeledMatrix& data, const std::filesystem::path& images,
               const std::optional<std::filesystem::path>& labels, int image_rows, int image_cols) {
  if (static_cast<Index>(image_rows) * image_cols != data.cols())
    throw ShapeError("image shape does not match feature count");
  std::string out;
  out.reserve(16 + static_cast<std::size_t>(data.points.size()));
  put_be_u32(out, kIdxImageMagic);
  put_be_u32(out, static_cast<std::uint32_t>(data.rows()));
  put_be_u32(out, static_cast<std::uint32_t>(image_rows));
  put_be_u32(out, static_cast<std::uint32_t>(image_cols));
  const double* src = data.points.data();
  for (Index p = 0; p < data.points.size(); ++p) {
    const double v = std::clamp(std::round(src[p] * 255.0), 0.0, 255.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(v)));
  }
  write_file_bytes(images, out);

  if (labels) {
    if (!data.has_labels()) throw ConsistencyError("no labels to write");
    std::string lab;
    put_be_u32(lab, kIdxLabelMagic);
    put_be_u32(lab, static_cast<std::uint32_t>(data.labels.size()));
    for (int l : data.labels) {
      if (l < 0 || l > 255) throw ConsistencyError("label outside byte range");
      lab.push_back(static_cast<char>(static_cast<unsigned char>(l)));
    }
    write_file_bytes(*labels, lab);
  }
}

LabeledMatrix parse_csv(const std::string& text, const std::optional<std::string>& label_column) {
  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      if (!trim(line).empty()) lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  if (lines.empty()) throw ParseError("empty CSV input");

  std::size_t first_data = 0;
  std::optional<std::size_t> label_col;
  const auto head = split_cells(lines[0]);
  const bool has_header = !parse_number(head[0]).has_value() ||
                          (label_column && std::find(head.begin(), head.end(), *label_column) != head.end());
  if (has_header) {
    first_data = 1;
    if (label_column) {
      const auto it = std::find(head.begin(), head.end(), *label_column);
      if (it == head.end()) throw ParseError("label column '" + *label_column + "' not found in header");
      label_col = static_cast<std::size_t>(it - head.begin());
    }
  } else if (label_column) {
    throw ParseError("label column '" + *label_column + "' requested but the CSV has no header");
  }

  const std::size_t width = split_cells(lines[first_data < lines.size() ? first_data : 0]).size();
  if (has_header && head.size() != width && first_data < lines.size())
    throw ParseError("ragged rows: header has " + std::to_string(head.size()) + " cells, data has " +
                     std::to_string(width));
  const std::size_t n_features = width - (label_col ? 1 : 0);
  const std::size_t n_rows = lines.size() - first_data;
  if (n_rows == 0 || n_features == 0) throw ParseError("CSV has no data");

  LabeledMatrix out;
  out.points.resize(static_cast<Index>(n_rows), static_cast<Index>(n_features));
  std::unordered_map<std::string, int> codes;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto cells = split_cells(lines[first_data + r]);
    if (cells.size() != width)
      throw ParseError("ragged rows: line " + std::to_string(first_data + r + 1) + " has " +
                       std::to_string(cells.size()) + " cells, expected " + std::to_string(width));
    Index c_out = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_col && c == *label_col) {
        const std::string key(cells[c]);
        auto [it, inserted] = codes.emplace(key, static_cast<int>(codes.size()));
        if (inserted) out.label_names.push_back(key);
        out.labels.push_back(it->second);
        continue;
      }
      const auto v = parse_number(cells[c]);
      if (!v) throw ParseError("non-numeric cell '" + std::string(cells[c]) + "' on line " +
                               std::to_string(first_data + r + 1));
      out.points(static_cast<Index>(r), c_out++) = *v;
    }
  }
  out.validate();
  return out;
}

LabeledMatrix load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
  return parse_csv(read_file_bytes(path), label_column);
}

void write_csv(const LabeledMatrix& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (Index c = 0; c < data.cols(); ++c) out << (c ? "," : "") << 'f' << c;
  if (data.has_labels()) out << ",label";
  out << '\n';
  out.precision(17);
  for (Index r = 0; r < data.rows(); ++r) {
    for (Index c = 0; c < data.cols(); ++c) out << (c ? "," : "") << data.points(r, c);
    if (data.has_labels()) {
      const int l = data.labels[static_cast<std::size_t>(r)];
      if (static_cast<std::size_t>(l) < data.label_names.size())
        out << ',' << data.label_names[static_cast<std::size_t>(l)];
      else
        out << ',' << l;
    }
    out << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

LabeledMatrix gen_swiss_roll(Index n_samples, double noise, std::uint64_t rng_seed) {
  if (n_samples < 1) throw ParameterError("n_samples must be at least 1");
  if (!(noise >= 0.0)) throw ParameterError("noise must be nonnegative");
  constexpr double pi = std::numbers::pi;
  constexpr int bins = 10;
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  LabeledMatrix out;
  out.points.resize(n_samples, 3);
  out.labels.resize(static_cast<std::size_t>(n_samples));
  for (Index i = 0; i < n_samples; ++i) {
    const double u = unit(rng);
    const double t = 1.5 * pi * (1.0 + 2.0 * u);
    const double h = 21.0 * unit(rng);
    out.points(i, 0) = t * std::cos(t);
    out.points(i, 1) = h;
    out.points(i, 2) = t * std::sin(t);
    out.labels[static_cast<std::size_t>(i)] = std::min(bins - 1, static_cast<int>(u * bins));
  }
  if (noise > 0.0)
    for (Index i = 0; i < n_samples; ++i)
      for (Index c = 0; c < 3; ++c) out.points(i, c) += noise * gauss(rng);
  for (int b = 0; b < bins; ++b) out.label_names.push_back("t" + std::to_string(b));
  return out;
}

SplitPlan split_shared(Index n_rows, Index n_shared, Index n_partitions, std::uint64_t rng_seed) {
  if (n_partitions < 1) throw ParameterError("n_partitions must be at least 1");
  if (n_shared < 0) throw ParameterError("n_shared must be nonnegative");
  if (n_shared + n_partitions > n_rows)
    throw CapacityError("n_shared + n_partitions = " + std::to_string(n_shared + n_partitions) +
                        " exceeds dataset size " + std::to_string(n_rows));
  std::vector<Index> perm(static_cast<std::size_t>(n_rows));
  for (Index i = 0; i < n_rows; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(rng_seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  SplitPlan plan;
  plan.n_rows = n_rows;
  plan.rng_seed = rng_seed;
  plan.seed_indices.assign(perm.begin(), perm.begin() + n_shared);
  const Index rest = n_rows - n_shared;
  const Index base = rest / n_partitions;
  const Index extra = rest % n_partitions;
  auto it = perm.begin() + n_shared;
  for (Index m = 0; m < n_partitions; ++m) {
    const Index size = base + (m < extra ? 1 : 0);
    plan.partitions.emplace_back(it, it + size);
    it += size;
  }
  return plan;
}

ExtendedDataset extend(const LabeledMatrix& data, const SplitPlan& plan, Index m) {
  if (m < 0 || m >= plan.n_partitions())
    throw IndexError("partition " + std::to_string(m) + " out of range [0, " + std::to_string(plan.n_partitions()) +
                     ")");
  if (plan.n_rows != data.rows()) throw ConsistencyError("split plan was made for a different dataset size");
  std::vector<Index> ids = plan.seed_indices;
  const auto& part = plan.partitions[static_cast<std::size_t>(m)];
  ids.insert(ids.end(), part.begin(), part.end());
  return ExtendedDataset(data, std::move(ids), plan.n_shared());
}

std::vector<ExtendedDataset> extend_all(const LabeledMatrix& data, const SplitPlan& plan) {
  std::vector<ExtendedDataset> out;
  for (Index m = 0; m < plan.n_partitions(); ++m) out.push_back(extend(data, plan, m));
  return out;
}

std::vector<Index> union_row_ids(const SplitPlan& plan) {
  std::vector<Index> ids = plan.seed_indices;
  for (const auto& part : plan.partitions) ids.insert(ids.end(), part.begin(), part.end());
  return ids;
}

std::string split_to_json(const SplitPlan& plan) {
  nlohmann::json j;
  j["n_rows"] = plan.n_rows;
  j["rng_seed"] = plan.rng_seed;
  j["seed_indices"] = plan.seed_indices;
  j["partitions"] = plan.partitions;
  return j.dump();
}

SplitPlan split_from_json(const std::string& text) {
  SplitPlan plan;
  try {
    const auto j = nlohmann::json::parse(text);
    plan.n_rows = j.at("n_rows").get<Index>();
    plan.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    plan.seed_indices = j.at("seed_indices").get<std::vector<Index>>();
    plan.partitions = j.at("partitions").get<std::vector<std::vector<Index>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid split plan JSON: ") + e.what());
  }
  plan.validate();
  return plan;
}

}  // namespace mane
