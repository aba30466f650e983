/* SPDX-License-Identifier: Apache-2.0 */
#ifndef KPZLAB_H
#define KPZLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(KPZ_BUILDING_LIBRARY)
#define KPZ_API __attribute__((visibility("default")))
#else
#define KPZ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kpz_status {
  KPZ_OK = 0,
  KPZ_ERR_INVALID_ARGUMENT = 1,
  KPZ_ERR_DOMAIN = 2,
  KPZ_ERR_SIZE = 3,
  KPZ_ERR_CONVERGENCE = 4,
  KPZ_ERR_NUMERIC = 5,
  KPZ_ERR_IO = 6,
  KPZ_ERR_INTERNAL = 7
} kpz_status;

/* Message of the last failed call on this thread; "" after success. */
KPZ_API const char* kpz_last_error(void);
KPZ_API const char* kpz_status_name(kpz_status s);
KPZ_API const char* kpz_version(void);

/* Random streams: (root seed, child path). */
typedef struct kpz_stream kpz_stream;
KPZ_API kpz_status kpz_stream_create(uint64_t seed, kpz_stream** out);
KPZ_API kpz_status kpz_stream_child(const kpz_stream* s, uint64_t index,
                                    kpz_stream** out);
KPZ_API kpz_status kpz_stream_normal(const kpz_stream* s, uint64_t counter,
                                     double* out);
KPZ_API void kpz_stream_destroy(kpz_stream* s);

/* Experiment configs. Keys accept '-' or '_'. */
typedef struct kpz_config kpz_config;
KPZ_API kpz_status kpz_config_create(kpz_config** out);
KPZ_API kpz_status kpz_config_load(kpz_config* c, const char* path);
KPZ_API kpz_status kpz_config_load_text(kpz_config* c, const char* text,
                                        const char* origin);
/* `where` labels diagnostics (a flag name, say); may be NULL. */
KPZ_API kpz_status kpz_config_set(kpz_config* c, const char* key,
                                  const char* value, const char* where);
/* Applies KPZLAB_SEED when set. */
KPZ_API kpz_status kpz_config_apply_env(kpz_config* c);
KPZ_API kpz_status kpz_config_validate(const kpz_config* c);
/* The returned string lives until the next call on this config. */
KPZ_API kpz_status kpz_config_json(kpz_config* c, const char** out);
/* Runs the subcommand; *summary (may be NULL) holds the JSON summary and
   lives until the next call on this config. */
KPZ_API kpz_status kpz_config_run(kpz_config* c, const char** summary);
KPZ_API void kpz_config_destroy(kpz_config* c);

/* Samplers. Replica r uses child r of the stream; threads 0 = all cores.
   Polymer: parameter t, which approximates KPZ time 2t. */
KPZ_API kpz_status kpz_polymer_log_z(int n, double beta, const kpz_stream* s,
                                     double* out_log_z0);
KPZ_API kpz_status kpz_sample_g_polymer(double t, int n, const kpz_stream* s,
                                        size_t replicas, unsigned threads,
                                        double* out);
KPZ_API kpz_status kpz_sample_g_she(double t, double dx, const kpz_stream* s,
                                    size_t replicas, unsigned threads,
                                    double* out);
KPZ_API kpz_status kpz_sample_z_she(double t, double dx, const kpz_stream* s,
                                    size_t replicas, unsigned threads,
                                    double* out);

/* Moments of Z(2t, 0) e^{t/12}. */
KPZ_API kpz_status kpz_kardar_moment(int k, double t, double rel_tol,
                                     double* value, double* est_error);
KPZ_API kpz_status kpz_log_kardar_bound(int k, double t, double* out);

/* Macroscopic dimension of a point set over shells n0..n1. */
KPZ_API kpz_status kpz_estimate_dimension(const double* points, size_t count,
                                          int n0, int n1, double* dimension,
                                          double* ci_low, double* ci_high);

#ifdef __cplusplus
}
#endif

#endif /* KPZLAB_H */
