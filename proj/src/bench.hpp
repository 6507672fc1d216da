#pragma once

#include "core.hpp"
#include "costmodel.hpp"
#include "netperm.hpp"

namespace hperm {

using u64 = std::uint64_t;

// Fisher-Yates over mt19937_64 with unbiased bounded draws.
Permutation random_permutation(i64 n, u64 seed);
Vec random_vector(i64 n, u64 seed, i64 lo = -1000, i64 hi = 1000);
u64 sample_seed(u64 base, u64 index);

struct BenchConfig {
    std::vector<i64> sizes = {1024, 2048, 4096};
    int samples = 20;
    u64 seed = 7;
    int threads = 0;  // 0: hardware concurrency
    bool benes = true;
    Collapse collapse;  // applied to the netperm networks before profiling
    CostParams cost;
};

struct BenchRow {
    std::string scheme;
    i64 n = 0;
    int samples = 0;
    int level = 0;  // 0 marks the total row
    double mean_rotations = 0;
    double stddev_rotations = 0;
    double mean_scalar_mult = 0;
};

// Schemes: "ours" (merged rotations), "ours_separate" (same counts, separate rescale),
// "benes" (collapsed to log n - 1 with a log n key budget).
std::vector<BenchRow> run_bench(const BenchConfig& cfg);

inline constexpr const char* kBenchHeader =
    "scheme,n,samples,level,mean_rotations,stddev_rotations,mean_scalar_mult";
std::string bench_csv(const std::vector<BenchRow>& rows);

struct SampleStats {
    std::vector<double> mean;    // per level
    std::vector<double> stddev;  // per level, sample deviation
    double total_mean = 0;
    double total_stddev = 0;
};

SampleStats summarize(const std::vector<std::vector<i64>>& per_sample);

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace hperm
