#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "sgais/data.hpp"
#include "sgais/errors.hpp"
#include "sgais/models.hpp"

using namespace sgais;
using namespace sgais::data;

namespace fs = std::filesystem;

namespace {

Dataset counting_dataset(std::size_t n, std::size_t arity = 2) {
  Dataset d(DatasetHeader{.model = "test", .arity = static_cast<std::uint32_t>(arity)});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(arity);
    for (std::size_t j = 0; j < arity; ++j) row[j] = static_cast<double>(i) + 0.125 * static_cast<double>(j);
    d.append(row);
  }
  return d;
}

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::path(::testing::TempDir()) / "sgais_data" / (std::string(info->test_suite_name()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::size_t> chunk_sizes(std::size_t n, std::size_t chunk) {
  const Dataset d = counting_dataset(n);
  std::vector<std::size_t> sizes;
  for (const auto& v : chunk_views(d.view(), chunk)) sizes.push_back(v.size());
  return sizes;
}

}  // namespace

TEST(Chunks, Sizes) {
  EXPECT_EQ(chunk_sizes(1000, 500), (std::vector<std::size_t>{500, 500}));
  EXPECT_EQ(chunk_sizes(1001, 500), (std::vector<std::size_t>{500, 500, 1}));
  EXPECT_EQ(chunk_sizes(3, 500), (std::vector<std::size_t>{3}));
  EXPECT_THROW(chunk_sizes(3, 0), UsageError);
}

TEST(Chunks, ConcatenationEqualsSource) {
  const Dataset d = counting_dataset(1234, 3);
  std::vector<double> joined;
  auto stream = DataStream::from_dataset(d, 100);
  std::size_t chunks = 0;
  while (auto c = stream.next_chunk()) {
    joined.insert(joined.end(), c->raw().begin(), c->raw().end());
    ++chunks;
    EXPECT_EQ(stream.consumed(), std::min<std::size_t>(1234, chunks * 100));
  }
  EXPECT_EQ(chunks, 13u);
  EXPECT_EQ(joined, d.values());
  EXPECT_FALSE(stream.next_chunk().has_value());
}

TEST(Reservoir, LargeCapacityKeepsEverything) {
  const Dataset d = counting_dataset(50);
  Reservoir r(100, 2);
  RngStream rng(1, 1);
  for (std::size_t i = 0; i < d.size(); ++i) {
    r.offer(d.row(i), rng);
    EXPECT_EQ(r.seen(), i + 1);
    EXPECT_EQ(r.size(), i + 1);
  }
  EXPECT_EQ(std::vector<double>(r.view().raw().begin(), r.view().raw().end()), d.values());
}

TEST(Reservoir, SizeIsMinOfCapacityAndSeen) {
  const Dataset d = counting_dataset(30, 1);
  Reservoir r(7, 1);
  RngStream rng(2, 1);
  for (std::size_t i = 0; i < d.size(); ++i) {
    r.offer(d.row(i), rng);
    EXPECT_EQ(r.size(), std::min<std::size_t>(7, i + 1));
  }
}

TEST(Reservoir, SingleSlotIsUniform) {
  const std::size_t n = 10;
  const int trials = 100000;
  const Dataset d = counting_dataset(n, 1);
  std::vector<double> counts(n, 0.0);
  RngStream rng(3, 1);
  for (int t = 0; t < trials; ++t) {
    Reservoir r(1, 1);
    for (std::size_t i = 0; i < n; ++i) r.offer(d.row(i), rng);
    counts[static_cast<std::size_t>(r.view()[0][0])] += 1.0;
  }
  const double p = 1.0 / n;
  const double sd = std::sqrt(trials * p * (1 - p));
  for (double c : counts) EXPECT_LT(std::abs(c - trials * p), 3.0 * sd);
}

TEST(Reservoir, InclusionProbabilityChiSquare) {
  const std::size_t n = 10;
  const std::size_t capacity = 3;
  const int trials = 100000;
  const Dataset d = counting_dataset(n, 1);
  std::vector<double> counts(n, 0.0);
  RngStream rng(4, 1);
  for (int t = 0; t < trials; ++t) {
    Reservoir r(capacity, 1);
    for (std::size_t i = 0; i < n; ++i) r.offer(d.row(i), rng);
    for (std::size_t k = 0; k < r.size(); ++k) counts[static_cast<std::size_t>(r.view()[k][0])] += 1.0;
  }
  const double p = static_cast<double>(capacity) / n;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - trials * p) * (c - trials * p) / (trials * p * (1 - p));
  // 0.999 quantile of chi-square with 10 degrees of freedom.
  EXPECT_LT(chi2, 29.588);
}

TEST(Reservoir, ZeroCapacityIsUsageError) { EXPECT_THROW(Reservoir(0, 1), UsageError); }

TEST(ShiftDataset, PhaseBoundaries) {
  const Dataset d = generate_shift_dataset(0);
  EXPECT_EQ(d.size(), 100000u);
  EXPECT_EQ(d.arity(), 2u);
  EXPECT_EQ(d.header().phase_boundaries, (std::vector<std::uint64_t>{1000, 10000}));
  EXPECT_NE(d.header().metadata.find("components"), std::string::npos);
}

TEST(ShiftDataset, FirstPhaseMean) {
  const Dataset d = generate_shift_dataset(1);
  const ShiftLayout layout;
  // Centers (0,0), (3,0), (0,3): mean (1,1), per-coordinate variance 1 + 2.
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) {
    mx += d.row(i)[0];
    my += d.row(i)[1];
  }
  mx /= 1000.0;
  my /= 1000.0;
  const double sd = std::sqrt(3.0 / 1000.0);
  EXPECT_LT(std::abs(mx - 1.0), 3.0 * sd);
  EXPECT_LT(std::abs(my - 1.0), 3.0 * sd);
  EXPECT_EQ(layout.components_per_phase, (std::array<std::size_t, 3>{3, 5, 7}));
}

TEST(ShiftDataset, LaterPhasesReachNewComponents) {
  const Dataset d = generate_shift_dataset(2);
  // The (0, -3) center only appears from the third phase on.
  std::size_t early = 0, late = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool near = std::hypot(d.row(i)[0], d.row(i)[1] + 3.0) < 0.5;
    (i < 10000 ? early : late) += near;
  }
  EXPECT_LT(early, 10u);
  EXPECT_GT(late, 1000u);
}

TEST(ShiftDataset, ScaledDownKeepsRatios) {
  const ShiftLayout small = ShiftLayout{}.scaled_down(10);
  EXPECT_EQ(small.phase_sizes, (std::array<std::size_t, 3>{100, 900, 9000}));
  const Dataset d = generate_shift_dataset(0, small);
  EXPECT_EQ(d.size(), 10000u);
  EXPECT_EQ(d.header().phase_boundaries, (std::vector<std::uint64_t>{100, 1000}));
  EXPECT_THROW(ShiftLayout{}.scaled_down(3), UsageError);
}

TEST(Shuffle, PreservesMultiset) {
  const Dataset d = generate_shift_dataset(3, ShiftLayout{}.scaled_down(100));
  RngStream rng(1, streams::kShuffle);
  const Dataset s = shuffle_dataset(d, rng);
  ASSERT_EQ(s.size(), d.size());
  EXPECT_NE(s.values(), d.values());
  auto rows = [](const Dataset& x) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(x.row(i).begin(), x.row(i).end());
    std::sort(out.begin(), out.end());
    return out;
  };
  EXPECT_EQ(rows(s), rows(d));
  EXPECT_TRUE(s.header().phase_boundaries.empty());
}

TEST(Shuffle, FixedSeedFixedPermutation) {
  const Dataset d = counting_dataset(100);
  RngStream a(9, streams::kShuffle);
  RngStream b(9, streams::kShuffle);
  RngStream c(10, streams::kShuffle);
  EXPECT_EQ(shuffle_dataset(d, a).values(), shuffle_dataset(d, b).values());
  RngStream a2(9, streams::kShuffle);
  EXPECT_NE(shuffle_dataset(d, a2).values(), shuffle_dataset(d, c).values());
}

TEST(Shuffle, AllOrdersEquallyLikely) {
  const Dataset d = counting_dataset(4, 1);
  RngStream rng(5, streams::kShuffle);
  std::map<std::vector<double>, int> counts;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) ++counts[shuffle_dataset(d, rng).values()];
  ASSERT_EQ(counts.size(), 24u);
  const double p = 1.0 / 24.0;
  const double sd = std::sqrt(trials * p * (1 - p));
  for (const auto& [order, c] : counts) EXPECT_LT(std::abs(c - trials * p), 3.0 * sd);
}

TEST(DatasetFile, BinaryRoundTripIsBitExact) {
  const fs::path dir = scratch_dir();
  const auto model = models::make_model("logreg");
  RngStream rng(7, 1);
  Dataset d = models::generate_observations(*model, model->sample_prior(rng), 777, rng);
  d.header().phase_boundaries = {10, 20};
  d.header().metadata = "note=round trip\n";
  write_dataset(dir / "a.sgds", d);
  const Dataset back = read_dataset(dir / "a.sgds");
  EXPECT_EQ(back, d);
  EXPECT_EQ(std::memcmp(back.values().data(), d.values().data(), d.values().size() * sizeof(double)), 0);
  const auto [header, rows] = read_dataset_header(dir / "a.sgds");
  EXPECT_EQ(header, d.header());
  EXPECT_EQ(rows, 777u);
}

TEST(DatasetFile, TextRoundTrip) {
  const fs::path dir = scratch_dir();
  Dataset d = generate_shift_dataset(4, ShiftLayout{}.scaled_down(100));
  write_dataset_text(dir / "a.txt", d);
  EXPECT_EQ(read_dataset_text(dir / "a.txt"), d);
}

TEST(DatasetFile, BadMagicIsFormatError) {
  const fs::path dir = scratch_dir();
  std::ofstream(dir / "bad.sgds", std::ios::binary) << "NOTADATASETFILE_________________";
  EXPECT_THROW(read_dataset(dir / "bad.sgds"), FormatError);
  EXPECT_THROW(read_dataset(dir / "missing.sgds"), Error);
}

TEST(DatasetFile, TruncatedFileIsFormatError) {
  const fs::path dir = scratch_dir();
  write_dataset(dir / "a.sgds", counting_dataset(100));
  fs::resize_file(dir / "a.sgds", fs::file_size(dir / "a.sgds") - 12);
  EXPECT_THROW(read_dataset(dir / "a.sgds"), FormatError);
}

TEST(DataStream, FileStreamMatchesMemoryStream) {
  const fs::path dir = scratch_dir();
  const Dataset d = counting_dataset(1234, 3);
  write_dataset(dir / "a.sgds", d);
  auto mem = DataStream::from_dataset(d, 500);
  auto file = DataStream::from_file(dir / "a.sgds", 500);
  EXPECT_EQ(file.total_size(), 1234u);
  EXPECT_FALSE(file.memory_resident());
  while (true) {
    auto a = mem.next_chunk();
    auto b = file.next_chunk();
    ASSERT_EQ(a.has_value(), b.has_value());
    if (!a) break;
    EXPECT_TRUE(std::equal(a->raw().begin(), a->raw().end(), b->raw().begin(), b->raw().end()));
  }
}
