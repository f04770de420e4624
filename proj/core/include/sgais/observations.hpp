#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sgais {

/// A single observation: a packed row of reals whose layout is model specific.
using Observation = std::span<const double>;

/// Non-owning view of a set of observations.
///
/// Rows are stored contiguously with a fixed arity. An optional index list
/// selects (possibly repeated) rows, which is how mini-batches drawn with
/// replacement are represented without copying.
class ObsView {
 public:
  ObsView() = default;
  ObsView(std::span<const double> rows, std::size_t arity)
      : rows_(rows), arity_(arity), count_(arity == 0 ? 0 : rows.size() / arity) {
    assert(arity == 0 || rows.size() % arity == 0);
  }
  ObsView(std::span<const double> rows, std::size_t arity, std::span<const std::size_t> index)
      : rows_(rows), arity_(arity), count_(index.size()), index_(index), indexed_(true) {}

  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  std::size_t arity() const noexcept { return arity_; }
  bool contiguous() const noexcept { return !indexed_; }

  Observation operator[](std::size_t i) const {
    const std::size_t row = indexed_ ? index_[i] : i;
    return rows_.subspan(row * arity_, arity_);
  }

  /// Contiguous sub-range [first, first + count). Only valid on contiguous views.
  ObsView rows(std::size_t first, std::size_t count) const {
    assert(contiguous() && first + count <= count_);
    return ObsView(rows_.subspan(first * arity_, count * arity_), arity_);
  }

  /// Same storage, rows selected by `index` (indices refer to this view's rows).
  ObsView select(std::span<const std::size_t> index) const {
    assert(contiguous());
    return ObsView(rows_, arity_, index);
  }

  std::span<const double> raw() const noexcept { return rows_; }

 private:
  std::span<const double> rows_;
  std::size_t arity_ = 0;
  std::size_t count_ = 0;
  std::span<const std::size_t> index_;
  bool indexed_ = false;
};

/// Descriptive header stored with every dataset file.
struct DatasetHeader {
  std::string model;                          // canonical model id, e.g. "linreg"
  std::uint32_t arity = 0;                    // reals per observation
  std::uint64_t seed = 0;                     // generator seed
  std::vector<double> true_params;            // parameters used to generate (may be empty)
  std::vector<std::uint64_t> phase_boundaries;  // indices where the generator changed
  std::string metadata;                       // free-form key=value lines (geometry etc.)

  bool operator==(const DatasetHeader&) const = default;
};

/// An in-memory, row-major dataset.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(DatasetHeader header) : header_(std::move(header)) {}
  Dataset(DatasetHeader header, std::vector<double> values)
      : header_(std::move(header)), values_(std::move(values)) {}

  const DatasetHeader& header() const noexcept { return header_; }
  DatasetHeader& header() noexcept { return header_; }
  std::size_t arity() const noexcept { return header_.arity; }
  std::size_t size() const noexcept { return header_.arity == 0 ? 0 : values_.size() / header_.arity; }
  bool empty() const noexcept { return size() == 0; }

  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  ObsView view() const { return ObsView(values_, header_.arity); }
  /// First `n` rows (clamped to size()).
  ObsView prefix(std::size_t n) const;
  Observation row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * header_.arity, header_.arity);
  }
  void append(Observation obs);
  void reserve(std::size_t rows) { values_.reserve(rows * header_.arity); }

  bool operator==(const Dataset&) const = default;

 private:
  DatasetHeader header_;
  std::vector<double> values_;
};

}  // namespace sgais
