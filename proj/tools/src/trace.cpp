#include "sgais_cli/trace.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "sgais/errors.hpp"

namespace sgais::cli {

namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

template <typename T>
T parse_field(std::string_view field, std::string_view origin, std::size_t line) {
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    // strtod: traces may carry "nan" diagnostic rows.
    std::string copy(field);
    char* end = nullptr;
    v = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size()) {
      throw FormatError(std::string(origin) + ":" + std::to_string(line) + ": bad number '" + copy + "'");
    }
  } else {
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      throw FormatError(std::string(origin) + ":" + std::to_string(line) + ": bad integer '" +
                        std::string(field) + "'");
    }
  }
  return v;
}

}  // namespace

TraceRow make_row(std::uint64_t n, double log_z, std::uint64_t anneal_steps, double cum_wall_time_s,
                  std::string estimator, std::uint64_t seed) {
  TraceRow r;
  r.n = n;
  r.log_z = log_z;
  r.log_z_per_n = n == 0 ? 0.0 : log_z / static_cast<double>(n);
  r.anneal_steps = anneal_steps;
  r.cum_wall_time_s = cum_wall_time_s;
  r.estimator = std::move(estimator);
  r.seed = seed;
  return r;
}

std::vector<TraceRow> sgais_trace_rows(std::span<const AnnealRecord> records, std::uint64_t seed) {
  std::vector<TraceRow> rows;
  rows.reserve(records.size());
  double cum = 0.0;
  for (const auto& r : records) {
    cum += r.wall_time;
    rows.push_back(make_row(r.n_consumed, r.log_z_after, r.steps, cum, "sgais", seed));
  }
  return rows;
}

std::string format_trace(std::span<const TraceRow> rows, bool wall_time) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + real(r.log_z) + ',' + real(r.log_z_per_n) + ',' +
           std::to_string(r.anneal_steps) + ',' + (wall_time ? real(r.cum_wall_time_s) : std::string()) +
           ',' + r.estimator + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

void write_trace(const std::filesystem::path& path, std::span<const TraceRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << format_trace(rows);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::vector<TraceRow> parse_trace(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw FormatError(std::string(origin) + ": not a trace file (expected header '" +
                      std::string(kTraceHeader) + "')");
  }
  std::vector<TraceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() != 7) {
      throw FormatError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 7 fields");
    }
    TraceRow r;
    r.n = parse_field<std::uint64_t>(f[0], origin, line_no);
    r.log_z = parse_field<double>(f[1], origin, line_no);
    r.log_z_per_n = parse_field<double>(f[2], origin, line_no);
    r.anneal_steps = parse_field<std::uint64_t>(f[3], origin, line_no);
    r.cum_wall_time_s = f[4].empty() ? 0.0 : parse_field<double>(f[4], origin, line_no);
    r.estimator = std::string(f[5]);
    r.seed = parse_field<std::uint64_t>(f[6], origin, line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TraceRow> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_trace(text.str(), path.string());
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string dataset_id(const Dataset& dataset) {
  const auto& values = dataset.values();
  const std::uint64_t h =
      fnv1a(std::string_view(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double)));
  return dataset.header().model + ":n=" + std::to_string(dataset.size()) +
         ":seed=" + std::to_string(dataset.header().seed) + ":" + hex64(h);
}

std::string RunManifest::content_hash() const {
  auto sorted = config;
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = fnv1a("");
  for (const auto& [k, v] : sorted) {
    h = fnv1a(k, h);
    h = fnv1a("=", h);
    h = fnv1a(v, h);
    h = fnv1a("\n", h);
  }
  return hex64(h);
}

std::string RunManifest::render() const {
  std::ostringstream out;
  out << "hash=" << content_hash() << '\n';
  out << "started=" << started << '\n';
  out << "finished=" << finished << '\n';
  for (const auto& o : outputs) out << "output=" << o << '\n';
  auto sorted = config;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [k, v] : sorted) out << "config." << k << '=' << v << '\n';
  return out.str();
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << render();
}

RunManifest RunManifest::parse(std::string_view text) {
  RunManifest m;
  std::istringstream in{std::string(text)};
  std::string stored_hash;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("manifest: line without '='");
    const std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "hash") {
      stored_hash = value;
    } else if (key == "started") {
      m.started = value;
    } else if (key == "finished") {
      m.finished = value;
    } else if (key == "output") {
      m.outputs.push_back(value);
    } else if (key.starts_with("config.")) {
      m.add(key.substr(7), std::move(value));
    } else {
      throw FormatError("manifest: unknown key '" + key + "'");
    }
  }
  if (!stored_hash.empty() && stored_hash != m.content_hash()) {
    throw FormatError("manifest: content hash mismatch");
  }
  return m;
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& trace_path) {
  auto p = trace_path;
  p.replace_extension(".manifest");
  return p;
}

}  // namespace sgais::cli
