#include "sgais_cli/settings.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sgais/errors.hpp"

namespace sgais::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

constexpr std::string_view kKnownKeys[] = {
    "run.seed",           "run.threads",          "run.timeout_s",     "run.stream",
    "sgais.chunk_size",   "sgais.batch_size",     "sgais.particles",   "sgais.ess_target",
    "sgais.burn_in",      "sgais.lr",             "sgais.eta",         "sgais.eta_scaling",
    "sgais.alpha",        "sgais.beta_hat",       "sgais.resample",    "sgais.resample_threshold",
    "sgais.history",      "sgais.reservoir_capacity", "sgais.max_anneal_steps",
    "ais.steps",          "ais.shape",            "ais.particles",     "ais.burn_in",
    "ais.lr",             "ais.alpha",            "ais.beta_hat",      "ais.step_scaling",
    "ns.live_points",     "ns.steps",             "ns.eta",            "ns.alpha",
    "ns.beta_hat",        "ns.stop_frac",         "ns.max_iterations",
};

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw UsageError("setting " + key + ": cannot parse '" + text + "'");
  }
  return value;
}

}  // namespace

Settings Settings::parse(std::string_view text, std::string_view origin) {
  Settings s;
  std::string section;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw UsageError(std::string(origin) + ":" + std::to_string(line_no) + ": bad section header");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw UsageError(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    s.values_[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return s;
}

Settings Settings::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

void Settings::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Settings::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw UsageError("override '" + std::string(assignment) + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Settings::merge(const Settings& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::optional<std::string> Settings::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Settings::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double Settings::get_double(const std::string& key, double fallback) const {
  const auto v = find(key);
  return v ? parse_number<double>(key, *v) : fallback;
}

std::size_t Settings::get_size(const std::string& key, std::size_t fallback) const {
  const auto v = find(key);
  return v ? parse_number<std::size_t>(key, *v) : fallback;
}

std::uint64_t Settings::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto v = find(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

bool Settings::get_bool(const std::string& key, bool fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
  if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
  throw UsageError("setting " + key + ": expected a boolean, got '" + *v + "'");
}

void Settings::check_known() const {
  for (const auto& [key, value] : values_) {
    if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) == std::end(kKnownKeys)) {
      throw UsageError("unknown setting '" + key + "'");
    }
  }
}

EstimatorConfig estimator_config(const Settings& s) {
  EstimatorConfig c;
  c.chunk_size = s.get_size("sgais.chunk_size", c.chunk_size);
  c.batch_size = s.get_size("sgais.batch_size", c.batch_size);
  c.particles = s.get_size("sgais.particles", c.particles);
  c.ess_target = s.get_double("sgais.ess_target", c.ess_target);
  c.burn_in_steps = s.get_size("sgais.burn_in", c.burn_in_steps);
  c.learning_rate = s.get_double("sgais.lr", c.learning_rate);
  if (s.contains("sgais.eta")) c.eta = s.get_double("sgais.eta", 0.0);
  const std::string scaling = s.get_string("sgais.eta_scaling", "running");
  if (scaling == "running") {
    c.eta_scaling = EtaScaling::kRunning;
  } else if (scaling == "total") {
    c.eta_scaling = EtaScaling::kTotal;
  } else {
    throw UsageError("sgais.eta_scaling must be 'running' or 'total'");
  }
  c.alpha = s.get_double("sgais.alpha", c.alpha);
  c.beta_hat = s.get_double("sgais.beta_hat", c.beta_hat);
  c.resampling.enabled = s.get_bool("sgais.resample", c.resampling.enabled);
  c.resampling.threshold = s.get_double("sgais.resample_threshold", c.resampling.threshold);
  const std::string history = s.get_string("sgais.history", "full");
  if (history == "full") {
    c.history = HistoryMode::kFull;
  } else if (history == "reservoir") {
    c.history = HistoryMode::kReservoir;
  } else {
    throw UsageError("sgais.history must be 'full' or 'reservoir'");
  }
  c.reservoir_capacity = s.get_size("sgais.reservoir_capacity", c.reservoir_capacity);
  c.max_anneal_steps = s.get_size("sgais.max_anneal_steps", c.max_anneal_steps);
  c.seed = s.get_u64("run.seed", c.seed);
  c.threads = s.get_size("run.threads", c.threads);
  c.validate();
  return c;
}

AisSettings ais_settings(const Settings& s, std::size_t observations) {
  AisSettings a;
  a.steps = s.get_size("ais.steps", a.steps);
  a.shape = s.get_double("ais.shape", a.shape);
  a.options.particles = s.get_size("ais.particles", a.options.particles);
  a.options.burn_in_steps = s.get_size("ais.burn_in", a.options.burn_in_steps);
  const double lr = s.get_double("ais.lr", kAisLearningRate);
  a.options.sghmc.eta = lr / static_cast<double>(std::max<std::size_t>(1, observations));
  a.options.sghmc.alpha = s.get_double("ais.alpha", 0.2);
  a.options.sghmc.beta_hat = s.get_double("ais.beta_hat", 0.0);
  const std::string scaling = s.get_string("ais.step_scaling", "tempered");
  if (scaling == "tempered") {
    a.options.step_scaling = baselines::AisStepScaling::kTempered;
  } else if (scaling == "fixed") {
    a.options.step_scaling = baselines::AisStepScaling::kFixed;
  } else {
    throw UsageError("ais.step_scaling must be 'tempered' or 'fixed'");
  }
  a.options.seed = s.get_u64("run.seed", 0);
  a.options.threads = s.get_size("run.threads", 1);
  a.options.sghmc.validate();
  return a;
}

baselines::NsOptions ns_options(const Settings& s) {
  baselines::NsOptions o;
  o.live_points = s.get_size("ns.live_points", o.live_points);
  o.steps_per_replace = s.get_size("ns.steps", o.steps_per_replace);
  o.sghmc.eta = s.get_double("ns.eta", o.sghmc.eta);
  o.sghmc.alpha = s.get_double("ns.alpha", o.sghmc.alpha);
  o.sghmc.beta_hat = s.get_double("ns.beta_hat", o.sghmc.beta_hat);
  o.stop_frac = s.get_double("ns.stop_frac", o.stop_frac);
  o.max_iterations = s.get_size("ns.max_iterations", o.max_iterations);
  o.seed = s.get_u64("run.seed", 0);
  o.sghmc.validate();
  return o;
}

double run_timeout_seconds(const Settings& s) {
  const double t = s.get_double("run.timeout_s", 600.0);
  if (t < 0.0) throw UsageError("run.timeout_s must be nonnegative");
  return t;
}

}  // namespace sgais::cli
