#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgais/observations.hpp"
#include "sgais/rng.hpp"

namespace sgais::data {

/// Splits `data` into ordered, non-overlapping chunks of `chunk_size` rows; the last
/// chunk may be short.
std::vector<ObsView> chunk_views(const ObsView& data, std::size_t chunk_size);

/// Chunked, single-consumer observation source backed by memory or a dataset file.
class DataStream {
 public:
  /// Streams `dataset` (which must outlive the stream).
  static DataStream from_dataset(const Dataset& dataset, std::size_t chunk_size);
  /// Streams a dataset file written by write_dataset(), reading one chunk at a time.
  static DataStream from_file(const std::filesystem::path& path, std::size_t chunk_size);

  DataStream(DataStream&&) noexcept;
  DataStream& operator=(DataStream&&) noexcept;
  ~DataStream();

  /// Next chunk, or nullopt when exhausted. File-backed views stay valid only until
  /// the next call.
  std::optional<ObsView> next_chunk();

  const DatasetHeader& header() const noexcept;
  std::size_t arity() const noexcept { return header().arity; }
  std::size_t total_size() const noexcept { return total_; }
  std::size_t chunk_size() const noexcept { return chunk_size_; }
  std::size_t cursor() const noexcept { return cursor_; }
  std::size_t consumed() const noexcept { return consumed_; }
  bool memory_resident() const noexcept { return dataset_ != nullptr; }
  /// Rows consumed so far. Only available for memory-resident streams.
  ObsView consumed_prefix() const;

 private:
  struct FileSource;
  DataStream() = default;

  const Dataset* dataset_ = nullptr;
  std::unique_ptr<FileSource> file_;
  std::size_t chunk_size_ = 0;
  std::size_t total_ = 0;
  std::size_t cursor_ = 0;
  std::size_t consumed_ = 0;
};

/// Uniform fixed-capacity sample of a stream (single-pass, Algorithm R).
class Reservoir {
 public:
  Reservoir(std::size_t capacity, std::size_t arity);

  void offer(Observation obs, RngStream& rng);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return arity_ == 0 ? 0 : items_.size() / arity_; }
  std::uint64_t seen() const noexcept { return seen_; }
  ObsView view() const { return ObsView(items_, arity_); }

 private:
  std::size_t capacity_;
  std::size_t arity_;
  std::uint64_t seen_ = 0;
  std::vector<double> items_;
};

/// Geometry of the non-stationary 2-D mixture stream. Phase p draws from the first
/// components_per_phase[p] centers with equal weights and variance `variance`.
struct ShiftLayout {
  std::array<std::size_t, 3> phase_sizes{1000, 9000, 90000};
  std::array<std::size_t, 3> components_per_phase{3, 5, 7};
  std::vector<std::array<double, 2>> centers{
      {0.0, 0.0}, {3.0, 0.0}, {0.0, 3.0},   // phase 1
      {3.0, 3.0}, {-1.5, 0.0},              // phase 2; (-1.5, 0) overlaps (0, 0)
      {0.0, -3.0}, {4.5, 0.0},              // phase 3; (4.5, 0) overlaps (3, 0)
  };
  double variance = 1.0;

  /// Same geometry with phase sizes divided by `factor` (ratios kept at 1:9:90).
  ShiftLayout scaled_down(std::size_t factor) const;
  std::size_t total() const;
  /// Rendered as key=value lines for the dataset header.
  std::string describe() const;
};

/// Generates the three-phase shift dataset. Phase boundaries are recorded in the header.
Dataset generate_shift_dataset(std::uint64_t seed, const ShiftLayout& layout = {});

/// Uniform random permutation of the rows. Header phase boundaries are dropped
/// (they no longer describe the order) and "shuffled=1" is appended to the metadata.
Dataset shuffle_dataset(const Dataset& dataset, RngStream& rng);

/// Binary dataset file: header then little-endian float64 observation records.
///
///   magic "SGAISDS\0" | u32 version | str model | u32 arity | u64 N | u64 seed |
///   u32 n_true, f64[n_true] | u32 n_phase, u64[n_phase] | str metadata | f64[N*arity]
///
/// where str = u32 length followed by that many bytes.
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);
/// Reads only the header and row count.
std::pair<DatasetHeader, std::uint64_t> read_dataset_header(const std::filesystem::path& path);

/// Line-oriented text export: '#'-prefixed header lines then one comma-separated row
/// per observation (17 significant digits, so the text form round-trips too).
void write_dataset_text(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset_text(const std::filesystem::path& path);

inline constexpr std::uint32_t kDatasetVersion = 1;

}  // namespace sgais::data
