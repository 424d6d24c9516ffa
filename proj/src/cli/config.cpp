#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "lesion/cli.hpp"
#include "lesion/error.hpp"
#include "lesion/random.hpp"

namespace lesion::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  fail(ErrorKind::ConfigError, "invalid value '" + value + "' for " + key + " (expected " + want + ")");
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) bad_value(key, v, "a number");
  return d;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

// Shortest text that parses back to the same double.
std::string num(double d) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, res.ptr);
}

std::string boolean(bool b) { return b ? "true" : "false"; }

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define DOUBLE_KEY(name, field)                                                               \
  Key {                                                                                       \
    name, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); }, \
        [](const RunConfig& c) { return num(c.field); }                                       \
  }
#define INT_KEY(name, field)                                                                  \
  Key {                                                                                       \
    name,                                                                                     \
        [](RunConfig& c, const std::string& k, const std::string& v) {                        \
          c.field = to_int<decltype(c.field)>(k, v);                                          \
        },                                                                                    \
        [](const RunConfig& c) { return std::to_string(c.field); }                            \
  }
#define BOOL_KEY(name, field)                                                                 \
  Key {                                                                                       \
    name, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_bool(k, v); }, \
        [](const RunConfig& c) { return boolean(c.field); }                                   \
  }

const std::vector<Key>& key_table() {
  static const std::vector<Key> table = {
      INT_KEY("seed", cv.seed),
      Key{"variant",
          [](RunConfig& c, const std::string&, const std::string& v) {
            c.cv.variant = pipeline::parse_variant(v);
          },
          [](const RunConfig& c) { return std::string(pipeline::to_string(c.cv.variant)); }},
      INT_KEY("folds", cv.folds),
      Key{"network",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "full") c.reduced = false;
            else if (v == "reduced") c.reduced = true;
            else bad_value(k, v, "full or reduced");
          },
          [](const RunConfig& c) { return std::string(c.reduced ? "reduced" : "full"); }},
      DOUBLE_KEY("image.gaussian_sigma", cv.preprocess.image.gaussian_sigma),
      DOUBLE_KEY("image.brightness", cv.preprocess.image.brightness_factor),
      DOUBLE_KEY("image.contrast", cv.preprocess.image.contrast_factor),
      DOUBLE_KEY("image.sharpness", cv.preprocess.image.sharpness_factor),
      Key{"segment.polarity",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "dark") c.cv.preprocess.polarity = seg::Polarity::DarkForeground;
            else if (v == "bright") c.cv.preprocess.polarity = seg::Polarity::BrightForeground;
            else bad_value(k, v, "dark or bright");
          },
          [](const RunConfig& c) {
            return std::string(c.cv.preprocess.polarity == seg::Polarity::DarkForeground ? "dark"
                                                                                          : "bright");
          }},
      INT_KEY("segment.opening_radius", cv.preprocess.opening_radius),
      BOOL_KEY("segment.keep_largest_component", cv.preprocess.keep_largest_component),
      DOUBLE_KEY("ive.constant", cv.preprocess.ive.constant),
      DOUBLE_KEY("ive.threshold", cv.preprocess.ive.threshold),
      DOUBLE_KEY("canny.sigma", cv.preprocess.canny.sigma),
      DOUBLE_KEY("canny.low", cv.preprocess.canny.low),
      DOUBLE_KEY("canny.high", cv.preprocess.canny.high),
      INT_KEY("augment.multiplier", cv.augment.multiplier),
      DOUBLE_KEY("augment.rotation_max", cv.augment.rotation_max),
      DOUBLE_KEY("augment.zoom_min", cv.augment.zoom_min),
      DOUBLE_KEY("augment.zoom_max", cv.augment.zoom_max),
      DOUBLE_KEY("augment.brightness_jitter", cv.augment.brightness_jitter),
      DOUBLE_KEY("augment.contrast_jitter", cv.augment.contrast_jitter),
      BOOL_KEY("augment.horizontal_flip", cv.augment.horizontal_flip),
      BOOL_KEY("augment.vertical_flip", cv.augment.vertical_flip),
      Key{"augment.stage",
          [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "sla") c.cv.augment_stage = eval::AugmentStage::Sla;
            else if (v == "feature") c.cv.augment_stage = eval::AugmentStage::Feature;
            else bad_value(k, v, "sla or feature");
          },
          [](const RunConfig& c) {
            return std::string(c.cv.augment_stage == eval::AugmentStage::Sla ? "sla" : "feature");
          }},
      INT_KEY("train.epochs", cv.train.epochs),
      INT_KEY("train.batch_size", cv.train.batch_size),
      DOUBLE_KEY("train.learning_rate", cv.train.adam.learning_rate),
      DOUBLE_KEY("train.beta1", cv.train.adam.beta1),
      DOUBLE_KEY("train.beta2", cv.train.adam.beta2),
      DOUBLE_KEY("train.epsilon", cv.train.adam.epsilon),
  };
  return table;
}

#undef DOUBLE_KEY
#undef INT_KEY
#undef BOOL_KEY

}  // namespace

RunConfig::RunConfig() { finalize(); }

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const Key& k : key_table()) {
    if (key == k.name) {
      k.set(*this, key, trim(value));
      return;
    }
  }
  fail(ErrorKind::ConfigError, "unknown config key '" + key + "'");
}

std::map<std::string, std::string> RunConfig::values() const {
  std::map<std::string, std::string> out;
  for (const Key& k : key_table()) out[k.name] = k.get(*this);
  return out;
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const Key& k : key_table()) out.emplace_back(k.name);
  return out;
}

void RunConfig::finalize() {
  cv.network = reduced ? nn::reduced_spec() : nn::full_spec();
  cv.preprocess.image.canvas_rows = static_cast<int>(cv.network.input_shape[0]);
  cv.preprocess.image.canvas_cols = static_cast<int>(cv.network.input_shape[1]);
  cv.preprocess.image.rng_seed = cv.seed;
  cv.augment.rng_seed = cv.seed;
  cv.train.rng_seed = derive_stream(cv.seed, "shuffle").next();
  cv.validate();
}

void apply_ini(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail(ErrorKind::ConfigError, where + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(ErrorKind::ConfigError, where + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    try {
      cfg.set(key, t.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.kind(), where + ": " + e.what());
    }
  }
}

std::string render_ini(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.values()) out += k + " = " + v + "\n";
  return out;
}

fs::path default_run_root() {
  if (const char* env = std::getenv("LESION_RUN_ROOT"); env && *env) return env;
  return "runs";
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
  if (parts.size() != 3) fail(ErrorKind::ConfigError, "grid must be start:stop:step, got '" + text + "'");
  const double a = to_double("grid start", parts[0]);
  const double b = to_double("grid stop", parts[1]);
  const double step = to_double("grid step", parts[2]);
  if (step <= 0 || b < a) fail(ErrorKind::ConfigError, "grid needs step > 0 and stop >= start");
  std::vector<double> out;
  // Index-based so accumulated rounding never drops the last point.
  for (long i = 0;; ++i) {
    const double v = a + static_cast<double>(i) * step;
    if (v > b + 1e-9 * std::max(1.0, std::abs(b))) break;
    out.push_back(v);
  }
  return out;
}

}  // namespace lesion::cli
