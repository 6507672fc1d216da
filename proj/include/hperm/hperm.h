#ifndef HPERM_H
#define HPERM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HP_API __declspec(dllexport)
#else
#define HP_API __attribute__((visibility("default")))
#endif

typedef enum hp_status {
    HP_OK = 0,
    HP_ERR_ARG = 1,
    HP_ERR_DIM = 2,
    HP_ERR_DEPTH = 3,
    HP_ERR_NOT_FOUND = 4,
    HP_ERR_IO = 5,
    HP_ERR_VERIFY = 6,
    HP_ERR_INTERNAL = 7
} hp_status;

typedef struct hp_perm hp_perm;
typedef struct hp_chain hp_chain;
typedef struct hp_network hp_network;
typedef struct hp_benes hp_benes;

typedef struct hp_collapse {
    int top;
    int bottom;
    int64_t arity; /* 0 selects 4 */
} hp_collapse;

/* Message for the last failing call on this thread; never NULL. */
HP_API const char* hp_last_error(void);
HP_API const char* hp_status_name(hp_status s);
HP_API const char* hp_version(void);

/* Strings returned through char** are owned by the caller. */
HP_API void hp_string_free(char* s);

/* ---- permutations ---- */

/* targets[i] is the slot entry i moves to */
HP_API hp_status hp_perm_create(const int64_t* targets, int64_t n, hp_perm** out);
HP_API hp_status hp_perm_random(int64_t n, uint64_t seed, hp_perm** out);
/* JSON array or one integer per line */
HP_API hp_status hp_perm_load(const char* path, hp_perm** out);
/* kind: ut | sigma | tau; n = 0 picks the smallest length holding the matrix */
HP_API hp_status hp_perm_named(const char* kind, int64_t d, int64_t n, hp_perm** out);
HP_API hp_status hp_perm_size(const hp_perm* p, int64_t* n);
HP_API hp_status hp_perm_targets(const hp_perm* p, int64_t* out, int64_t cap);
HP_API hp_status hp_perm_apply(const hp_perm* p, const int64_t* in, int64_t* out, int64_t n);
HP_API void hp_perm_free(hp_perm* p);

/* ---- decomposition chains ---- */

/* Deepest ideal decomposition; report holds parameters, validation and the chain. */
HP_API hp_status hp_search(const hp_perm* p, hp_chain** chain, char** report_json);
/* kind: ut | gamma | xi | sigma | tau */
HP_API hp_status hp_decompose(const char* kind, int64_t d, int l, int64_t n, hp_chain** out);
/* Decomposes, checks against the reference on `trials` seeded vectors when trials > 0.
   Returns HP_ERR_VERIFY when a check fails (the report is still produced). */
HP_API hp_status hp_decompose_report(const char* kind, int64_t d, int l, int64_t n, int trials,
                                     uint64_t seed, char** report_json);
HP_API hp_status hp_chain_load(const char* path, hp_chain** out);
HP_API hp_status hp_chain_depth(const hp_chain* c, int* depth);
HP_API hp_status hp_chain_size(const hp_chain* c, int64_t* n);
/* rotations may be NULL */
HP_API hp_status hp_chain_apply(const hp_chain* c, const int64_t* in, int64_t* out, int64_t n,
                                int64_t* rotations);
HP_API hp_status hp_chain_json(const hp_chain* c, char** json);
HP_API hp_status hp_chain_cost_json(const hp_chain* c, char** json);
HP_API void hp_chain_free(hp_chain* c);

/* ---- homomorphic matrix multiplication ---- */

/* replication: "naive" or "d0=<k>[,<d1>,...]". A and B hold m row-major d x d matrices
   each (NULL: seeded random). C receives m*d*d values when non-NULL. */
HP_API hp_status hp_hmm_run(int64_t d, int64_t dprime, int64_t m, const char* replication,
                            const int64_t* A, const int64_t* B, uint64_t seed, int64_t* C,
                            char** report_json);

/* ---- rotation networks ---- */

HP_API hp_status hp_network_build(const hp_perm* p, int reduce, const hp_collapse* collapse,
                                  hp_network** out);
HP_API hp_status hp_network_eval(const hp_network* net, const int64_t* in, int64_t* out, int64_t n);
HP_API hp_status hp_network_json(const hp_network* net, char** json);
/* per-level counts, keys, depth and cost of one network */
HP_API hp_status hp_network_profile_json(const hp_network* net, char** json);
/* mean profile over seeded random permutations */
HP_API hp_status hp_network_sample_profile(int64_t n, int samples, uint64_t seed, int threads,
                                           const hp_collapse* collapse, char** json);
HP_API void hp_network_free(hp_network* net);

/* ---- Benes baseline ---- */

/* depth 0: log n - 1; key_budget 0: log n, negative: one key per step */
HP_API hp_status hp_benes_build(const hp_perm* p, int depth, int64_t key_budget, hp_benes** out);
HP_API hp_status hp_benes_eval(const hp_benes* b, const int64_t* in, int64_t* out, int64_t n);
/* chain, per-level rotations, keys and cost */
HP_API hp_status hp_benes_json(const hp_benes* b, char** json);
HP_API void hp_benes_free(hp_benes* b);

/* ---- cost model ---- */

/* kind: rescale | decompose | multsum | moddown | rotation_separate | rotation_merged | cmult */
HP_API hp_status hp_submodule_cost(const char* kind, int64_t N, int L, int64_t alpha, int level,
                                   int64_t* out);
HP_API hp_status hp_merged_saving(int64_t N, int64_t alpha, int level, int64_t* saving, int* holds);

/* ---- bench and verification ---- */

/* CSV: scheme,n,samples,level,mean_rotations,stddev_rotations,mean_scalar_mult */
HP_API hp_status hp_bench_csv(const int64_t* sizes, int count, int samples, uint64_t seed,
                              int threads, const hp_collapse* collapse, int with_benes, char** csv);
/* HP_ERR_VERIFY when any path fails; the report is produced either way */
HP_API hp_status hp_verify_all(int64_t n_max, int instances, uint64_t seed, int threads,
                               char** report_json);

#ifdef __cplusplus
}
#endif

#endif
