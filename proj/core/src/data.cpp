#include "sgais/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <string>

#include "sgais/errors.hpp"

namespace sgais::data {

static_assert(std::endian::native == std::endian::little,
              "dataset files are little-endian; add byte swapping for this platform");

std::vector<ObsView> chunk_views(const ObsView& data, std::size_t chunk_size) {
  if (chunk_size == 0) throw UsageError("chunk_views: chunk size must be positive");
  std::vector<ObsView> chunks;
  for (std::size_t first = 0; first < data.size(); first += chunk_size) {
    chunks.push_back(data.rows(first, std::min(chunk_size, data.size() - first)));
  }
  return chunks;
}

// ---------------------------------------------------------------------------
// Binary format helpers

namespace {

constexpr char kMagic[8] = {'S', 'G', 'A', 'I', 'S', 'D', 'S', '\0'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("dataset: truncated header");
  return value;
}

std::string get_string(std::istream& in) {
  const auto size = get<std::uint32_t>(in);
  if (size > (1u << 28)) throw FormatError("dataset: implausible string length");
  std::string s(size, '\0');
  in.read(s.data(), size);
  if (!in) throw FormatError("dataset: truncated header");
  return s;
}

std::pair<DatasetHeader, std::uint64_t> read_header(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw FormatError("dataset: bad magic (not a dataset file)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kDatasetVersion) {
    throw FormatError("dataset: unsupported version " + std::to_string(version));
  }
  DatasetHeader header;
  header.model = get_string(in);
  header.arity = get<std::uint32_t>(in);
  const auto rows = get<std::uint64_t>(in);
  header.seed = get<std::uint64_t>(in);
  const auto n_true = get<std::uint32_t>(in);
  header.true_params.resize(n_true);
  for (auto& v : header.true_params) v = get<double>(in);
  const auto n_phase = get<std::uint32_t>(in);
  header.phase_boundaries.resize(n_phase);
  for (auto& v : header.phase_boundaries) v = get<std::uint64_t>(in);
  header.metadata = get_string(in);
  if (header.arity == 0) throw FormatError("dataset: zero arity");
  return {header, rows};
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const auto& h = dataset.header();
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kDatasetVersion);
  put_string(out, h.model);
  put<std::uint32_t>(out, h.arity);
  put<std::uint64_t>(out, dataset.size());
  put<std::uint64_t>(out, h.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.true_params.size()));
  for (double v : h.true_params) put<double>(out, v);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.phase_boundaries.size()));
  for (std::uint64_t v : h.phase_boundaries) put<std::uint64_t>(out, v);
  put_string(out, h.metadata);
  out.write(reinterpret_cast<const char*>(dataset.values().data()),
            static_cast<std::streamsize>(dataset.values().size() * sizeof(double)));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::pair<DatasetHeader, std::uint64_t> read_dataset_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_header(in);
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  auto [header, rows] = read_header(in);
  std::vector<double> values(rows * header.arity);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw FormatError("dataset: truncated body in '" + path.string() + "'");
  return Dataset(std::move(header), std::move(values));
}

namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_dataset_text(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const auto& h = dataset.header();
  out << "# model=" << h.model << "\n# arity=" << h.arity << "\n# n=" << dataset.size()
      << "\n# seed=" << h.seed << "\n# true_params=";
  for (std::size_t i = 0; i < h.true_params.size(); ++i) {
    out << (i ? "," : "") << format_real(h.true_params[i]);
  }
  out << "\n# phase_boundaries=";
  for (std::size_t i = 0; i < h.phase_boundaries.size(); ++i) {
    out << (i ? "," : "") << h.phase_boundaries[i];
  }
  out << "\n";
  std::istringstream meta(h.metadata);
  for (std::string line; std::getline(meta, line);) out << "# meta " << line << "\n";
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const auto row = dataset.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_real(row[j]);
    out << "\n";
  }
}

Dataset read_dataset_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  DatasetHeader h;
  std::vector<double> values;
  std::uint64_t expected_rows = 0;
  std::string metadata;
  const auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
    return parts;
  };
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    if (line.starts_with("# meta ")) {
      metadata += line.substr(7) + "\n";
    } else if (line.starts_with("# ")) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError("dataset text: bad header line '" + line + "'");
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "model") h.model = value;
      else if (key == "arity") h.arity = static_cast<std::uint32_t>(std::stoul(value));
      else if (key == "n") expected_rows = std::stoull(value);
      else if (key == "seed") h.seed = std::stoull(value);
      else if (key == "true_params") for (const auto& p : split(value)) h.true_params.push_back(std::stod(p));
      else if (key == "phase_boundaries") for (const auto& p : split(value)) h.phase_boundaries.push_back(std::stoull(p));
    } else {
      const auto parts = split(line);
      if (parts.size() != h.arity) throw FormatError("dataset text: row arity mismatch");
      for (const auto& p : parts) values.push_back(std::stod(p));
    }
  }
  h.metadata = metadata;
  if (h.arity == 0 || values.size() != expected_rows * h.arity) {
    throw FormatError("dataset text: row count does not match header");
  }
  return Dataset(std::move(h), std::move(values));
}

// ---------------------------------------------------------------------------
// Streams

struct DataStream::FileSource {
  std::ifstream in;
  DatasetHeader header;
  std::vector<double> buffer;
};

DataStream::DataStream(DataStream&&) noexcept = default;
DataStream& DataStream::operator=(DataStream&&) noexcept = default;
DataStream::~DataStream() = default;

DataStream DataStream::from_dataset(const Dataset& dataset, std::size_t chunk_size) {
  if (chunk_size == 0) throw UsageError("DataStream: chunk size must be positive");
  DataStream s;
  s.dataset_ = &dataset;
  s.chunk_size_ = chunk_size;
  s.total_ = dataset.size();
  return s;
}

DataStream DataStream::from_file(const std::filesystem::path& path, std::size_t chunk_size) {
  if (chunk_size == 0) throw UsageError("DataStream: chunk size must be positive");
  DataStream s;
  s.file_ = std::make_unique<FileSource>();
  s.file_->in.open(path, std::ios::binary);
  if (!s.file_->in) throw Error("cannot open '" + path.string() + "'");
  auto [header, rows] = read_header(s.file_->in);
  s.file_->header = std::move(header);
  s.chunk_size_ = chunk_size;
  s.total_ = rows;
  return s;
}

const DatasetHeader& DataStream::header() const noexcept {
  return dataset_ != nullptr ? dataset_->header() : file_->header;
}

std::optional<ObsView> DataStream::next_chunk() {
  if (consumed_ >= total_) return std::nullopt;
  const std::size_t count = std::min(chunk_size_, total_ - consumed_);
  ObsView view;
  if (dataset_ != nullptr) {
    view = dataset_->view().rows(consumed_, count);
  } else {
    auto& buf = file_->buffer;
    buf.resize(count * arity());
    file_->in.read(reinterpret_cast<char*>(buf.data()),
                   static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!file_->in) throw FormatError("dataset: truncated body while streaming");
    view = ObsView(buf, arity());
  }
  consumed_ += count;
  ++cursor_;
  return view;
}

ObsView DataStream::consumed_prefix() const {
  if (dataset_ == nullptr) throw UsageError("DataStream: history prefix needs a memory-resident stream");
  return dataset_->prefix(consumed_);
}

// ---------------------------------------------------------------------------
// Reservoir

Reservoir::Reservoir(std::size_t capacity, std::size_t arity) : capacity_(capacity), arity_(arity) {
  if (capacity == 0) throw UsageError("Reservoir: capacity must be positive");
  if (arity == 0) throw UsageError("Reservoir: arity must be positive");
}

void Reservoir::offer(Observation obs, RngStream& rng) {
  if (obs.size() != arity_) throw UsageError("Reservoir: arity mismatch");
  ++seen_;
  if (size() < capacity_) {
    items_.insert(items_.end(), obs.begin(), obs.end());
    return;
  }
  const std::uint64_t slot = rng.index(static_cast<std::size_t>(seen_));
  if (slot < capacity_) std::copy(obs.begin(), obs.end(), items_.begin() + static_cast<std::ptrdiff_t>(slot * arity_));
}

// ---------------------------------------------------------------------------
// Shift dataset

ShiftLayout ShiftLayout::scaled_down(std::size_t factor) const {
  if (factor == 0) throw UsageError("ShiftLayout: factor must be positive");
  ShiftLayout s = *this;
  for (auto& n : s.phase_sizes) {
    if (n % factor != 0) throw UsageError("ShiftLayout: factor does not divide phase sizes");
    n /= factor;
  }
  return s;
}

std::size_t ShiftLayout::total() const {
  return std::accumulate(phase_sizes.begin(), phase_sizes.end(), std::size_t{0});
}

std::string ShiftLayout::describe() const {
  std::ostringstream out;
  out << "generator=shift\n";
  out << "phase_sizes=" << phase_sizes[0] << "," << phase_sizes[1] << "," << phase_sizes[2] << "\n";
  out << "components_per_phase=" << components_per_phase[0] << "," << components_per_phase[1] << ","
      << components_per_phase[2] << "\n";
  out << "variance=" << format_real(variance) << "\n";
  out << "centers=";
  for (std::size_t i = 0; i < centers.size(); ++i) {
    out << (i ? ";" : "") << format_real(centers[i][0]) << " " << format_real(centers[i][1]);
  }
  out << "\n";
  return out.str();
}

Dataset generate_shift_dataset(std::uint64_t seed, const ShiftLayout& layout) {
  for (std::size_t k : layout.components_per_phase) {
    if (k == 0 || k > layout.centers.size()) throw UsageError("ShiftLayout: not enough centers");
  }
  if (!(layout.variance > 0.0)) throw UsageError("ShiftLayout: variance must be positive");
  DatasetHeader header;
  header.model = "gmm";
  header.arity = 2;
  header.seed = seed;
  header.metadata = layout.describe();
  std::uint64_t boundary = 0;
  for (std::size_t p = 0; p + 1 < layout.phase_sizes.size(); ++p) {
    boundary += layout.phase_sizes[p];
    header.phase_boundaries.push_back(boundary);
  }
  Dataset dataset(std::move(header));
  dataset.reserve(layout.total());
  RngStream rng(seed, streams::kData);
  const double sd = std::sqrt(layout.variance);
  for (std::size_t p = 0; p < layout.phase_sizes.size(); ++p) {
    for (std::size_t i = 0; i < layout.phase_sizes[p]; ++i) {
      const auto& c = layout.centers[rng.index(layout.components_per_phase[p])];
      const std::array<double, 2> y{c[0] + sd * rng.normal(), c[1] + sd * rng.normal()};
      dataset.append(y);
    }
  }
  return dataset;
}

Dataset shuffle_dataset(const Dataset& dataset, RngStream& rng) {
  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with our own stream so the permutation is reproducible.
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  DatasetHeader header = dataset.header();
  header.phase_boundaries.clear();
  header.metadata += "shuffled=1\n";
  Dataset out(std::move(header));
  out.reserve(n);
  for (std::size_t i : order) out.append(dataset.row(i));
  return out;
}

}  // namespace sgais::data
