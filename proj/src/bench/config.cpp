#include "prw/bench/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "prw/common/binary_io.hpp"
#include "prw/common/error.hpp"

namespace prw::bench {

namespace {

// --- parsing ---------------------------------------------------------------

bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())) != 0) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) != 0) s.remove_suffix(1);
  return s;
}

class LineParser {
 public:
  LineParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(fmt::format("config line {}: {}", line_, what));
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  std::string key() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && is_key_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(fmt::format("expected '{}'", c));
    ++pos_;
  }

  TomlScalar scalar() {
    skip_ws();
    const char c = peek();
    if (c == '"') return string();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' &&
           s_[pos_] != ' ' && s_[pos_] != '\t') {
      ++pos_;
    }
    const std::string_view tok = s_.substr(start, pos_ - start);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    return number(tok);
  }

  TomlValue value() {
    skip_ws();
    if (peek() != '[') return std::visit([](auto v) -> TomlValue { return v; }, scalar());
    ++pos_;
    TomlArray arr;
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      return arr;
    }
    while (true) {
      arr.push_back(scalar());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
        if (peek() == ']') {
          ++pos_;
          break;
        }
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        break;
      }
      fail("expected ',' or ']' in array");
    }
    return arr;
  }

 private:
  std::string string() {
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= s_.size()) fail("unterminated escape");
      switch (s_[pos_++]) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail("unsupported escape sequence");
      }
    }
    return out;
  }

  TomlScalar number(std::string_view tok) {
    std::string_view digits = tok;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    const bool is_float = tok.find_first_of(".eE") != std::string_view::npos;
    const char* first = digits.data();
    const char* last = digits.data() + digits.size();
    if (!is_float) {
      std::int64_t v = 0;
      const auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || p != last) fail("bad integer '" + std::string(tok) + "'");
      return v;
    }
    // Require a digit on both sides of the point, as TOML does.
    const std::size_t dot = digits.find('.');
    if (dot != std::string_view::npos &&
        (dot == 0 || dot + 1 >= digits.size() ||
         std::isdigit(static_cast<unsigned char>(digits[dot - 1])) == 0 ||
         std::isdigit(static_cast<unsigned char>(digits[dot + 1])) == 0)) {
      fail("bad float '" + std::string(tok) + "'");
    }
    double v = 0.0;
    const auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) fail("bad float '" + std::string(tok) + "'");
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

// --- typed access ----------------------------------------------------------

class Reader {
 public:
  explicit Reader(const TomlDocument& doc) : doc_(doc) {}

  template <typename F>
  void with(const std::string& section, const std::string& key, F&& f) {
    const auto s = doc_.find(section);
    if (s == doc_.end()) return;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return;
    used_.insert(section + "." + key);
    where_ = section + "." + key;
    f(k->second);
  }

  void get(const std::string& sec, const std::string& key, bool& out) {
    with(sec, key, [&](const TomlValue& v) { out = as<bool>(v, "a boolean"); });
  }
  void get(const std::string& sec, const std::string& key, double& out) {
    with(sec, key, [&](const TomlValue& v) { out = as_double(v); });
  }
  void get(const std::string& sec, const std::string& key, std::string& out) {
    with(sec, key, [&](const TomlValue& v) { out = as<std::string>(v, "a string"); });
  }
  template <typename Int>
    requires std::is_integral_v<Int>
  void get(const std::string& sec, const std::string& key, Int& out) {
    with(sec, key, [&](const TomlValue& v) { out = as_int<Int>(v); });
  }

  void check_all_used() const {
    for (const auto& [sec, table] : doc_) {
      for (const auto& [key, _] : table) {
        if (used_.count(sec + "." + key) == 0) {
          throw ConfigError("unknown config key '" + (sec.empty() ? key : sec + "." + key) + "'");
        }
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config key '" + where_ + "': " + what);
  }

  template <typename T, typename V>
  T as(const V& v, const char* what) const {
    if (const T* p = std::get_if<T>(&v)) return *p;
    fail(std::string("expected ") + what);
  }

  template <typename V>
  double as_double(const V& v) const {
    if (const double* p = std::get_if<double>(&v)) return *p;
    if (const std::int64_t* p = std::get_if<std::int64_t>(&v)) return static_cast<double>(*p);
    fail("expected a number");
  }

  template <typename Int, typename V>
  Int as_int(const V& v) const {
    const std::int64_t x = as<std::int64_t>(v, "an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (x < 0) fail("expected a non-negative integer");
    }
    return static_cast<Int>(x);
  }

 private:
  const TomlDocument& doc_;
  std::set<std::string> used_;
  std::string where_;
};

// --- writing ---------------------------------------------------------------

std::string fmt_double(double v) {
  std::string s = fmt::format("{}", v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

}  // namespace

TomlDocument parse_toml(std::string_view text) {
  TomlDocument doc;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    LineParser p(trim(raw), line_no);
    if (p.at_end()) continue;
    if (p.peek() == '[') {
      p.expect('[');
      section = p.key();
      p.expect(']');
      if (!p.at_end()) p.fail("trailing characters after section header");
      if (doc.count(section) != 0) p.fail("duplicate section [" + section + "]");
      doc[section];
      continue;
    }
    const std::string key = p.key();
    p.expect('=');
    TomlValue v = p.value();
    if (!p.at_end()) p.fail("trailing characters after value");
    if (!doc[section].emplace(key, std::move(v)).second) p.fail("duplicate key '" + key + "'");
  }
  return doc;
}

void ExperimentConfig::validate() const {
  constexpr std::uint64_t kMaxSeed = static_cast<std::uint64_t>(INT64_MAX);
  if (global_seed > kMaxSeed || demo_seed > kMaxSeed ||
      std::any_of(rl_seeds.begin(), rl_seeds.end(), [](auto s) { return s > kMaxSeed; })) {
    throw ConfigError("seeds must fit in a signed 64-bit integer");
  }
  if (demo_horizon == 0) throw ConfigError("experiment.demo_horizon must be positive");
  if (workers == 0) throw ConfigError("experiment.workers must be >= 1");
  sampling_config().validate();
  schedule(static_cast<std::int64_t>(demo_horizon)).validate();
  repr_config().validate();
  train_config().validate();
  if (reward.goal_frames == 0) throw ConfigError("reward.goal_frames must be >= 1");
  sac.validate();
  if (sources.empty()) throw ConfigError("rl.sources must not be empty");
  if (std::set(sources.begin(), sources.end()).size() != sources.size()) {
    throw ConfigError("rl.sources has duplicates");
  }
  if (rl_seeds.empty()) throw ConfigError("rl.seeds must not be empty");
  if (std::set(rl_seeds.begin(), rl_seeds.end()).size() != rl_seeds.size()) {
    throw ConfigError("rl.seeds has duplicates");
  }
  if (episodes == 0) throw ConfigError("rl.episodes must be positive");
  if (horizon == 0) throw ConfigError("rl.horizon must be positive");
  if (smoothing_window == 0) throw ConfigError("rl.smoothing_window must be positive");
}

replearn::ReprConfig ExperimentConfig::repr_config() const {
  if (model == "default") return replearn::ReprConfig{};
  if (model == "small") {
    // Narrow variant on full-size grids for smoke tests.
    replearn::ReprConfig c;
    c.conv_channels = {4, 4, 8, 8};
    c.branch_width = 8;
    c.fusion_hidden = 16;
    c.embed_dim = 8;
    c.decoder_channels = {8, 8, 4, 4, 2};
    c.tcn_channels = {4, 4, 8, 8};
    c.dynamic_hidden = 16;
    return c;
  }
  throw ConfigError("representation.model must be \"default\" or \"small\"");
}

tvfs::SamplingConfig ExperimentConfig::sampling_config() const {
  tvfs::SamplingConfig c = sampling;
  c.seed = derive_seed(global_seed, 0x5A);
  return c;
}

tvfs::VarianceSchedule ExperimentConfig::schedule(std::int64_t h) const {
  tvfs::VarianceSchedule s;
  s.theta_min = theta_min;
  s.theta_max = theta_max;
  s.horizon = h;
  return s;
}

replearn::TrainConfig ExperimentConfig::train_config() const {
  replearn::TrainConfig c = train;
  c.shuffle_seed = derive_seed(global_seed, 0x5F);
  return c;
}

std::uint64_t ExperimentConfig::repr_init_seed() const { return derive_seed(global_seed, 0x1E); }

std::uint64_t ExperimentConfig::rl_run_seed(std::uint64_t seed) const {
  return derive_seed(derive_seed(global_seed, 0x71), seed);
}

ExperimentConfig config_from_toml(std::string_view text) {
  const TomlDocument doc = parse_toml(text);
  for (const auto& [sec, _] : doc) {
    static const std::set<std::string> known{"experiment", "sampling", "representation",
                                             "reward", "rl"};
    if (known.count(sec) == 0) {
      throw ConfigError(sec.empty() ? "config keys must sit inside a [section]"
                                    : "unknown config section [" + sec + "]");
    }
  }
  ExperimentConfig c;
  Reader r(doc);
  std::string s;

  s = std::string(physim::to_string(c.env));
  r.get("experiment", "env", s);
  c.env = physim::parse_env_kind(s);
  r.get("experiment", "global_seed", c.global_seed);
  r.get("experiment", "demo_seed", c.demo_seed);
  r.get("experiment", "demo_horizon", c.demo_horizon);
  s = c.output_dir.string();
  r.get("experiment", "output_dir", s);
  c.output_dir = s;
  r.get("experiment", "workers", c.workers);

  r.get("sampling", "interval", c.sampling.interval);
  r.get("sampling", "branches", c.sampling.branches);
  r.get("sampling", "steps", c.sampling.steps);
  r.get("sampling", "scale_lo", c.sampling.sample.scale_lo);
  r.get("sampling", "scale_hi", c.sampling.sample.scale_hi);
  r.get("sampling", "fallback_radius", c.sampling.sample.fallback_radius);
  r.get("sampling", "theta_min", c.theta_min);
  r.get("sampling", "theta_max", c.theta_max);

  r.get("representation", "model", c.model);
  r.get("representation", "iterations", c.train.iterations);
  r.get("representation", "batch_size", c.train.batch_size);
  r.get("representation", "lr", c.train.lr);
  r.get("representation", "lambda", c.train.lambda);
  r.get("representation", "checkpoint_every", c.train.checkpoint_every);
  r.get("representation", "stop_gradient_target", c.train.stop_gradient_target);

  r.get("reward", "difference", c.reward.difference);
  r.get("reward", "goal_frames", c.reward.goal_frames);

  r.with("rl", "sources", [&](const TomlValue& v) {
    const auto& arr = r.as<TomlArray>(v, "an array of strings");
    c.sources.clear();
    for (const TomlScalar& e : arr) {
      c.sources.push_back(sacrl::parse_reward_source(r.as<std::string>(e, "a string")));
    }
  });
  r.with("rl", "seeds", [&](const TomlValue& v) {
    const auto& arr = r.as<TomlArray>(v, "an array of integers");
    c.rl_seeds.clear();
    for (const TomlScalar& e : arr) c.rl_seeds.push_back(r.as_int<std::uint64_t>(e));
  });
  r.get("rl", "episodes", c.episodes);
  r.get("rl", "horizon", c.horizon);
  r.get("rl", "terminate_on_success", c.terminate_on_success);
  r.get("rl", "smoothing_window", c.smoothing_window);
  r.get("rl", "gamma", c.sac.gamma);
  r.get("rl", "tau", c.sac.tau);
  r.get("rl", "alpha", c.sac.alpha);
  r.get("rl", "lr", c.sac.lr);
  r.get("rl", "batch_size", c.sac.batch_size);
  r.get("rl", "warmup_steps", c.sac.warmup_steps);
  r.get("rl", "updates_per_step", c.sac.updates_per_step);
  r.get("rl", "hidden", c.sac.hidden);
  r.get("rl", "buffer_capacity", c.sac.buffer_capacity);

  r.check_all_used();
  c.validate();
  return c;
}

std::string config_to_toml(const ExperimentConfig& c) {
  std::string o;
  auto kv = [&](std::string_view k, const std::string& v) { o += fmt::format("{} = {}\n", k, v); };
  auto num = [](auto v) { return fmt::format("{}", v); };

  o += "[experiment]\n";
  kv("env", quote(std::string(physim::to_string(c.env))));
  kv("global_seed", num(c.global_seed));
  kv("demo_seed", num(c.demo_seed));
  kv("demo_horizon", num(c.demo_horizon));
  kv("output_dir", quote(c.output_dir.string()));
  kv("workers", num(c.workers));

  o += "\n[sampling]\n";
  kv("interval", num(c.sampling.interval));
  kv("branches", num(c.sampling.branches));
  kv("steps", num(c.sampling.steps));
  kv("scale_lo", fmt_double(c.sampling.sample.scale_lo));
  kv("scale_hi", fmt_double(c.sampling.sample.scale_hi));
  kv("fallback_radius", fmt_double(c.sampling.sample.fallback_radius));
  kv("theta_min", fmt_double(c.theta_min));
  kv("theta_max", fmt_double(c.theta_max));

  o += "\n[representation]\n";
  kv("model", quote(c.model));
  kv("iterations", num(c.train.iterations));
  kv("batch_size", num(c.train.batch_size));
  kv("lr", fmt_double(c.train.lr));
  kv("lambda", fmt_double(c.train.lambda));
  kv("checkpoint_every", num(c.train.checkpoint_every));
  kv("stop_gradient_target", c.train.stop_gradient_target ? "true" : "false");

  o += "\n[reward]\n";
  kv("difference", c.reward.difference ? "true" : "false");
  kv("goal_frames", num(c.reward.goal_frames));

  o += "\n[rl]\n";
  std::vector<std::string> names;
  for (auto src : c.sources) names.push_back(quote(std::string(sacrl::to_string(src))));
  kv("sources", fmt::format("[{}]", fmt::join(names, ", ")));
  kv("seeds", fmt::format("[{}]", fmt::join(c.rl_seeds, ", ")));
  kv("episodes", num(c.episodes));
  kv("horizon", num(c.horizon));
  kv("terminate_on_success", c.terminate_on_success ? "true" : "false");
  kv("smoothing_window", num(c.smoothing_window));
  kv("gamma", fmt_double(c.sac.gamma));
  kv("tau", fmt_double(c.sac.tau));
  kv("alpha", fmt_double(c.sac.alpha));
  kv("lr", fmt_double(c.sac.lr));
  kv("batch_size", num(c.sac.batch_size));
  kv("warmup_steps", num(c.sac.warmup_steps));
  kv("updates_per_step", num(c.sac.updates_per_step));
  kv("hidden", num(c.sac.hidden));
  kv("buffer_capacity", num(c.sac.buffer_capacity));
  return o;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_toml(read_text_file(path));
}

}  // namespace prw::bench
