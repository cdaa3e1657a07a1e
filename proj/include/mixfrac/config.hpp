#pragma once

#include "mixfrac/solver.hpp"

#include <map>
#include <string>
#include <vector>

namespace mixfrac {

/// Flat view of a hierarchical key-value file. `[section]` headers prefix the
/// following keys with "section."; `#` starts a comment.
class KeyValueFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
  };

  /// Throws ConfigError with "origin:line" on malformed lines or duplicate keys.
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<config>");
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  /// Marks the key as consumed and returns its raw value.
  const std::string& raw(const std::string& key);
  double number(const std::string& key);
  int integer(const std::string& key);
  bool boolean(const std::string& key);
  /// Comma-separated numbers.
  std::vector<double> numbers(const std::string& key);

  /// Throws ConfigError naming the first key that no reader consumed.
  void reject_unused() const;
  const std::string& origin() const { return origin_; }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
  std::map<std::string, Entry> entries_;
  std::string origin_;
};

struct RunConfig {
  std::string preset;  ///< empty when every value is explicit
  RunSettings run;
  std::string output_dir = "mixfrac_out";
  /// VTK snapshot every n increments; 0 writes only the final state.
  int snapshot_stride = 0;
};

/// Preset names: strip_notch{6,10,12,14,18}_{neohooke,150fit}[_nohole][_ref{0..3}].
/// Throws ConfigError for unknown names.
RunConfig resolve_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Reads a run configuration: an optional `preset` key followed by overrides.
/// eps and kappa default to 2h and 0.01h of the final target_h.
RunConfig parse_run_config(KeyValueFile& kv);
RunConfig load_run_config(const std::string& path);

/// Fully explicit config text; parsing it reproduces `cfg` exactly.
std::string to_config_text(const RunConfig& cfg);

}  // namespace mixfrac
