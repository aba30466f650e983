// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kpzlab {

// One run of a subcommand. Values come from a `key = value` file, then the
// KPZLAB_SEED environment variable, then flags; later sources win. Keys
// accept '-' or '_' as the word separator.
struct ExperimentConfig {
  std::string subcommand;
  std::string route;  // polymer | she | composition-chain; empty picks one
  // KPZ time on every route. The polymer route runs the polymer with
  // parameter t / 2; moments take --ts in the moment formula's convention.
  double t = 1;
  double alpha = 1;
  int n = 2000;
  double dx = 0.1;
  double dt_ratio = 0.5;
  std::uint64_t replicas = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out = "-";
  std::string svg;
  std::string cache;   // sample records are appended here
  std::string input;   // samples or point sets are read from here
  std::string summary; // JSON summary; empty means none
  // tails
  std::string side = "upper";
  std::string regime;  // g | h; empty follows the route
  double s_lo = 1, s_hi = 4;
  std::uint64_t min_samples = 100000;
  // moments
  int kmax = 6;
  std::vector<double> ts{0.1, 0.25, 0.5, 1};
  double rel_tol = 1e-3;
  // fractal
  int shell_lo = 4, shell_hi = 14;
  bool theta_scan = false;
  std::string gauge = "loglog23";
  double gamma = 0.5;
  // compose-check
  double beta = 0.5;
  // ensemble-check
  int sweeps = 200;
  std::string hamiltonian = "short";
  // lil
  double t_min = 15.154262241479262;  // e^e
  double t_max = 1000;
  int steps = 40;
  std::uint64_t trajectories = 100;

  // Where each key was last set ("file:line" or "--flag"), for diagnostics.
  std::map<std::string, std::string> origin;

  // Parse one key; `where` prefixes error messages.
  void set(const std::string& key, const std::string& value,
           const std::string& where = "");
  void load_text(const std::string& text, const std::string& origin);
  void load_file(const std::string& path);
  // KPZLAB_SEED, when set, replaces the seed.
  void apply_env();
  void validate() const;
  std::string effective_route() const;
  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& json);
};

const std::vector<std::string>& subcommand_names();

struct CacheRecord {
  std::string route;
  double t = 0;
  std::string regime;
  double value = 0;
  std::string seed_path;
};

// Append-only record file: a `# config:` header fixed by the first writer,
// then rows of (route, t, regime, value, seed_path). Appending under a
// different sampling config is refused.
class SampleCache {
 public:
  static void append(const std::string& path, const ExperimentConfig& cfg,
                     const std::vector<CacheRecord>& records);
  static std::vector<CacheRecord> read(const std::string& path,
                                       std::string* config_json = nullptr);
};

struct RunResult {
  std::string summary_json;
  std::vector<std::string> artifacts;
};

RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace kpzlab
