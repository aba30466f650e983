// SPDX-License-Identifier: Apache-2.0
// Command-line front end. Talks to the library through the C API only.
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpzlab/kpzlab.h"

namespace {

struct Opt {
  const char* name;
  const char* help;
};

// Value options shared by every subcommand; each maps onto a config key.
const std::vector<Opt> kOptions{
    {"route", "sampler route: polymer, she or composition-chain"},
    {"t", "KPZ time (the polymer runs at parameter t/2)"},
    {"alpha", "time multiplier for h samples"},
    {"n", "polymer length"},
    {"dx", "SHE grid spacing"},
    {"dt-ratio", "SHE dt / dx^2"},
    {"replicas", "number of replicas (1e5 style accepted)"},
    {"seed", "root seed (KPZLAB_SEED overrides the config file)"},
    {"threads", "worker threads, 0 for all cores"},
    {"out", "CSV output path, - for stdout"},
    {"svg", "SVG plot path"},
    {"cache", "sample cache to append to"},
    {"input", "samples or points to read"},
    {"summary", "JSON summary path"},
    {"side", "tail side: upper or lower"},
    {"regime", "g or h (default: g when t < 1)"},
    {"s-lo", "tail window start"},
    {"s-hi", "tail window end"},
    {"min-samples", "least sample size for a tail fit"},
    {"kmax", "largest moment order"},
    {"ts", "comma separated times for moments"},
    {"rel-tol", "quadrature relative tolerance"},
    {"shells", "shell range lo..hi"},
    {"gauge", "loglog23, loglog13 or exptime"},
    {"gamma", "level for level sets"},
    {"beta", "time increment ratio for compose-check"},
    {"sweeps", "Gibbs sweeps for ensemble-check"},
    {"hamiltonian", "short or long"},
    {"t-min", "first LIL time"},
    {"t-max", "last LIL time"},
    {"steps", "LIL record times"},
    {"trajectories", "LIL trajectories"},
};

int report(kpz_status st) {
  std::fprintf(stderr, "kpzlab: %s: %s\n", kpz_status_name(st), kpz_last_error());
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kpzlab: KPZ height field experiments"};
  app.require_subcommand(1);

  const std::vector<std::pair<const char*, const char*>> subs{
      {"sample-g", "short-time scaled heights g_t(0)"},
      {"sample-h", "long-time scaled heights h_t(alpha, 0)"},
      {"moments", "exact moments and their bounds"},
      {"tails", "tail exponent fit with CSV and SVG"},
      {"lil", "iterated-logarithm running statistics"},
      {"fractal", "macroscopic dimension of a point or level set"},
      {"compose-check", "composed versus direct increments"},
      {"ensemble-check", "line-ensemble resampling checks"},
  };

  std::string config_path;
  bool theta_scan = false;
  std::map<std::string, std::string> values;
  std::map<std::string, std::vector<CLI::Option*>> handles;
  for (const auto& [name, help] : subs) {
    CLI::App* sc = app.add_subcommand(name, help);
    sc->add_option("--config", config_path, "key = value config file");
    for (const auto& o : kOptions)
      handles[o.name].push_back(
          sc->add_option(std::string("--") + o.name, values[o.name], o.help));
    handles["theta-scan"].push_back(
        sc->add_flag("--theta-scan", theta_scan, "thickness certificates over theta"));
  }

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  kpz_config* cfg = nullptr;
  kpz_status st = kpz_config_create(&cfg);
  if (st != KPZ_OK) return report(st);
  auto done = [&](kpz_status s) {
    int rc = s == KPZ_OK ? 0 : report(s);
    kpz_config_destroy(cfg);
    return rc;
  };

  if (!config_path.empty() && (st = kpz_config_load(cfg, config_path.c_str())) != KPZ_OK)
    return done(st);
  if ((st = kpz_config_apply_env(cfg)) != KPZ_OK) return done(st);
  if ((st = kpz_config_set(cfg, "subcommand", sub.c_str(), "command line")) != KPZ_OK)
    return done(st);
  for (const auto& [name, opts] : handles) {
    bool given = false;
    for (auto* o : opts) given = given || o->count() > 0;
    if (!given) continue;
    const std::string flag = "--" + name;
    const std::string v = name == "theta-scan" ? (theta_scan ? "true" : "false")
                                               : values[name];
    if ((st = kpz_config_set(cfg, name.c_str(), v.c_str(), flag.c_str())) != KPZ_OK)
      return done(st);
  }

  const char* summary = nullptr;
  st = kpz_config_run(cfg, &summary);
  if (st == KPZ_OK && summary) std::fprintf(stderr, "%s\n", summary);
  return done(st);
}
