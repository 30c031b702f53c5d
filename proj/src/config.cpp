#include "reptrack/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace reptrack {
namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || end != v.data() + v.size() || v.empty())
    throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  std::string s(v);
  char* end = nullptr;
  double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError("invalid value '" + s + "' for " + std::string(key));
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key) + " (expected true or false)");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Setting {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename F>
Setting size_setting(std::string key, F field) {
  return {key,
          [key, field](RunConfig& c, std::string_view v) { field(c) = parse_number<std::size_t>(key, v); },
          [field](const RunConfig& c) { return std::to_string(field(c)); }};
}

template <typename F>
Setting int_setting(std::string key, F field) {
  return {key, [key, field](RunConfig& c, std::string_view v) { field(c) = parse_number<int>(key, v); },
          [field](const RunConfig& c) { return std::to_string(field(c)); }};
}

template <typename F>
Setting double_setting(std::string key, F field) {
  return {key, [key, field](RunConfig& c, std::string_view v) { field(c) = parse_double(key, v); },
          [field](const RunConfig& c) { return fmt(field(c)); }};
}

template <typename F>
Setting bool_setting(std::string key, F field) {
  return {key, [key, field](RunConfig& c, std::string_view v) { field(c) = parse_bool(key, v); },
          [field](const RunConfig& c) { return std::string(field(c) ? "true" : "false"); }};
}

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = [] {
    std::vector<Setting> t;
    t.push_back(int_setting("features.ngram_min", [](auto& c) -> auto& { return c.pipeline.features.ngram_min; }));
    t.push_back(int_setting("features.ngram_max", [](auto& c) -> auto& { return c.pipeline.features.ngram_max; }));
    t.push_back(size_setting("features.min_df",
                             [](auto& c) -> auto& { return c.pipeline.features.min_df_abs; }));
    t.push_back(double_setting("features.max_df",
                               [](auto& c) -> auto& { return c.pipeline.features.max_df_ratio; }));
    t.push_back(size_setting("features.max_features",
                             [](auto& c) -> auto& { return c.pipeline.features.max_features; }));
    t.push_back({"features.weighting",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "tfidf") c.pipeline.features.weighting = Weighting::kTfidf;
                   else if (v == "bow") c.pipeline.features.weighting = Weighting::kBow;
                   else throw ConfigError("invalid value '" + std::string(v) + "' for features.weighting");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.pipeline.features.weighting == Weighting::kTfidf ? "tfidf" : "bow");
                 }});
    t.push_back(bool_setting("features.sublinear_tf",
                             [](auto& c) -> auto& { return c.pipeline.features.sublinear_tf; }));
    t.push_back(double_setting("linear.l2", [](auto& c) -> auto& { return c.pipeline.voting.linear.l2; }));
    t.push_back(int_setting("linear.epochs", [](auto& c) -> auto& { return c.pipeline.voting.linear.epochs; }));
    t.push_back(int_setting("linear.calibration_folds",
                            [](auto& c) -> auto& { return c.pipeline.voting.linear.calibration_folds; }));
    t.push_back(size_setting("forest.n_trees",
                             [](auto& c) -> auto& { return c.pipeline.voting.forest.n_trees; }));
    t.push_back(size_setting("forest.max_features",
                             [](auto& c) -> auto& { return c.pipeline.voting.forest.max_features; }));
    t.push_back(size_setting("forest.min_leaf",
                             [](auto& c) -> auto& { return c.pipeline.voting.forest.min_leaf; }));
    t.push_back(size_setting("boost.rounds",
                             [](auto& c) -> auto& { return c.pipeline.voting.boost.rounds; }));
    t.push_back(size_setting("boost.depth", [](auto& c) -> auto& { return c.pipeline.voting.boost.depth; }));
    t.push_back(double_setting("boost.learning_rate",
                               [](auto& c) -> auto& { return c.pipeline.voting.boost.learning_rate; }));
    t.push_back(double_setting("crf.sigma", [](auto& c) -> auto& { return c.pipeline.crf.sigma; }));
    t.push_back(size_setting("crf.max_iter", [](auto& c) -> auto& { return c.pipeline.crf.max_iter; }));
    t.push_back(double_setting("crf.gradient_tolerance",
                               [](auto& c) -> auto& { return c.pipeline.crf.gradient_tolerance; }));
    t.push_back(double_setting("threshold", [](auto& c) -> auto& { return c.pipeline.threshold; }));
    t.push_back({"seed",
                 [](RunConfig& c, std::string_view v) { c.pipeline.seed = parse_number<std::uint64_t>("seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.pipeline.seed); }});
    t.push_back(size_setting("threads", [](auto& c) -> auto& { return c.pipeline.threads; }));
    t.push_back(size_setting("folds", [](auto& c) -> auto& { return c.folds; }));
    t.push_back(bool_setting("stratified", [](auto& c) -> auto& { return c.stratified; }));
    return t;
  }();
  return table;
}

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& s : settings())
    if (s.key == key) {
      s.set(cfg, value);
      return;
    }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : settings()) k.push_back(s.key);
    return k;
  }();
  return keys;
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string format_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& s : settings()) out += s.key + " = " + s.get(cfg) + "\n";
  return out;
}

}  // namespace reptrack
