// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/kpzlab.h"

#include <exception>
#include <new>
#include <string>

#include "kpzlab/error.hpp"
#include "kpzlab/experiment.hpp"
#include "kpzlab/fractal.hpp"
#include "kpzlab/moments.hpp"
#include "kpzlab/noise.hpp"
#include "kpzlab/polymer.hpp"
#include "kpzlab/she.hpp"

struct kpz_stream {
  kpzlab::RngStream s;
};

struct kpz_config {
  kpzlab::ExperimentConfig cfg;
  std::string json;
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

template <class F>
kpz_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return KPZ_OK;
  } catch (const kpzlab::Error& e) {
    g_last_error = e.what();
    return static_cast<kpz_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return KPZ_ERR_SIZE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return KPZ_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return KPZ_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) kpzlab::fail(kpzlab::ErrorCode::invalid_argument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

KPZ_API const char* kpz_last_error(void) { return g_last_error.c_str(); }

KPZ_API const char* kpz_status_name(kpz_status s) {
  switch (s) {
    case KPZ_OK: return "ok";
    case KPZ_ERR_INVALID_ARGUMENT: return "invalid argument";
    case KPZ_ERR_DOMAIN: return "domain error";
    case KPZ_ERR_SIZE: return "size error";
    case KPZ_ERR_CONVERGENCE: return "convergence failure";
    case KPZ_ERR_NUMERIC: return "numeric failure";
    case KPZ_ERR_IO: return "i/o error";
    case KPZ_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

KPZ_API const char* kpz_version(void) { return "0.1.0"; }

KPZ_API kpz_status kpz_stream_create(uint64_t seed, kpz_stream** out) {
  return guard([&] {
    need(out, "out");
    *out = new kpz_stream{kpzlab::RngStream(seed)};
  });
}

KPZ_API kpz_status kpz_stream_child(const kpz_stream* s, uint64_t index,
                                    kpz_stream** out) {
  return guard([&] {
    need(s, "stream");
    need(out, "out");
    *out = new kpz_stream{s->s.child(index)};
  });
}

KPZ_API kpz_status kpz_stream_normal(const kpz_stream* s, uint64_t counter,
                                     double* out) {
  return guard([&] {
    need(s, "stream");
    need(out, "out");
    *out = s->s.normal(counter);
  });
}

KPZ_API void kpz_stream_destroy(kpz_stream* s) { delete s; }

KPZ_API kpz_status kpz_config_create(kpz_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new kpz_config;
  });
}

KPZ_API kpz_status kpz_config_load(kpz_config* c, const char* path) {
  return guard([&] {
    need(c, "config");
    need(path, "path");
    c->cfg.load_file(path);
  });
}

KPZ_API kpz_status kpz_config_load_text(kpz_config* c, const char* text,
                                        const char* origin) {
  return guard([&] {
    need(c, "config");
    need(text, "text");
    c->cfg.load_text(text, origin ? origin : "config");
  });
}

KPZ_API kpz_status kpz_config_set(kpz_config* c, const char* key,
                                  const char* value, const char* where) {
  return guard([&] {
    need(c, "config");
    need(key, "key");
    need(value, "value");
    c->cfg.set(key, value, where ? where : "");
  });
}

KPZ_API kpz_status kpz_config_apply_env(kpz_config* c) {
  return guard([&] {
    need(c, "config");
    c->cfg.apply_env();
  });
}

KPZ_API kpz_status kpz_config_validate(const kpz_config* c) {
  return guard([&] {
    need(c, "config");
    c->cfg.validate();
  });
}

KPZ_API kpz_status kpz_config_json(kpz_config* c, const char** out) {
  return guard([&] {
    need(c, "config");
    need(out, "out");
    c->json = c->cfg.to_json();
    *out = c->json.c_str();
  });
}

KPZ_API kpz_status kpz_config_run(kpz_config* c, const char** summary) {
  return guard([&] {
    need(c, "config");
    c->summary = kpzlab::run_experiment(c->cfg).summary_json;
    if (summary) *summary = c->summary.c_str();
  });
}

KPZ_API void kpz_config_destroy(kpz_config* c) { delete c; }

KPZ_API kpz_status kpz_polymer_log_z(int n, double beta, const kpz_stream* s,
                                     double* out_log_z0) {
  return guard([&] {
    need(s, "stream");
    need(out_log_z0, "out");
    *out_log_z0 = kpzlab::run_polymer(n, beta, s->s).log_z(0);
  });
}

KPZ_API kpz_status kpz_sample_g_polymer(double t, int n, const kpz_stream* s,
                                        size_t replicas, unsigned threads,
                                        double* out) {
  return guard([&] {
    need(s, "stream");
    need(out, "out");
    auto v = kpzlab::sample_g_batch(t, n, s->s, replicas, threads);
    std::copy(v.begin(), v.end(), out);
  });
}

KPZ_API kpz_status kpz_sample_g_she(double t, double dx, const kpz_stream* s,
                                    size_t replicas, unsigned threads,
                                    double* out) {
  return guard([&] {
    need(s, "stream");
    need(out, "out");
    auto v = kpzlab::sample_g_she_batch(t, kpzlab::make_she_grid(t, dx), s->s,
                                        replicas, threads);
    std::copy(v.begin(), v.end(), out);
  });
}

KPZ_API kpz_status kpz_sample_z_she(double t, double dx, const kpz_stream* s,
                                    size_t replicas, unsigned threads,
                                    double* out) {
  return guard([&] {
    need(s, "stream");
    need(out, "out");
    auto v = kpzlab::sample_z_origin_batch(kpzlab::make_she_grid(t, dx), s->s,
                                           replicas, threads);
    std::copy(v.begin(), v.end(), out);
  });
}

KPZ_API kpz_status kpz_kardar_moment(int k, double t, double rel_tol,
                                     double* value, double* est_error) {
  return guard([&] {
    need(value, "value");
    kpzlab::QuadSpec q;
    if (rel_tol > 0) q.rel_tol = rel_tol;
    auto m = kpzlab::kardar_moment(k, t, q);
    *value = m.value;
    if (est_error) *est_error = m.est_error;
  });
}

KPZ_API kpz_status kpz_log_kardar_bound(int k, double t, double* out) {
  return guard([&] {
    need(out, "out");
    *out = kpzlab::log_kardar_bound(k, t);
  });
}

KPZ_API kpz_status kpz_estimate_dimension(const double* points, size_t count,
                                          int n0, int n1, double* dimension,
                                          double* ci_low, double* ci_high) {
  return guard([&] {
    if (count) need(points, "points");
    need(dimension, "dimension");
    auto ps = kpzlab::make_point_set(std::vector<double>(points, points + count));
    auto rep = kpzlab::estimate_dimension(ps.points, n0, n1);
    *dimension = rep.dimension;
    if (ci_low) *ci_low = rep.ci_low;
    if (ci_high) *ci_high = rep.ci_high;
  });
}

}  // extern "C"
