#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lesion/eval.hpp"

namespace lesion::cli {

namespace fs = std::filesystem;

struct ManifestEntry {
  std::string id;  // "<class dir>/<file name>"
  fs::path path;
  int label = eval::kNevus;
};

struct DatasetManifest {
  fs::path root;
  std::vector<ManifestEntry> entries;  // sorted by id
  std::uint64_t fingerprint = 0;       // over ids, sizes and file contents
  std::vector<std::string> skipped;    // unreadable files, with the reason

  std::size_t count(int label) const;
  std::vector<eval::Sample> samples() const;
};

/// Reads `root/melanoma` and `root/naevus` (or `nevus`). Files that fail to
/// decode are skipped and listed; an empty class raises EmptyDataset.
DatasetManifest ingest(const fs::path& root);

/// Every tunable of a run. Canvas size follows the network input.
struct RunConfig {
  eval::CrossvalConfig cv;
  bool reduced = false;

  RunConfig();

  /// Applies one `key = value` setting; unknown keys and bad values raise
  /// ConfigError.
  void set(const std::string& key, const std::string& value);
  /// Canonical key/value dump; feeding it back through set() reproduces the
  /// configuration exactly.
  std::map<std::string, std::string> values() const;
  static std::vector<std::string> keys();

  /// Derives the dependent fields (canvas, seeds) and validates.
  void finalize();
};

/// Flat INI text: `key = value` lines, `#`/`;` comments, and optional
/// `[section]` headers that prefix following keys with `section.`.
void apply_ini(RunConfig& cfg, const std::string& text, const std::string& origin = "<config>");
std::string render_ini(const RunConfig& cfg);

/// `LESION_RUN_ROOT` if set, else `runs` under the working directory.
fs::path default_run_root();

/// Parses "a:b:step" into the inclusive grid a, a+step, ... <= b.
std::vector<double> parse_grid(const std::string& text);

struct Streams {
  std::function<void(const std::string&)> out;  // results
  std::function<void(const std::string&)> err;  // progress, warnings, errors
};

/// Runs one command line (argv[0] is the program name). Returns the exit
/// status; failures are reported on `err` as a one-line JSON object.
int run(const std::vector<std::string>& args, const Streams& streams);

}  // namespace lesion::cli
