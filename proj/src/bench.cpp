#include "bench.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "benes.hpp"

namespace hperm {

namespace {

u64 bounded(std::mt19937_64& rng, u64 bound) {
    // rejection keeps draws unbiased and independent of the library's distributions
    const u64 limit = UINT64_MAX - UINT64_MAX % bound;
    u64 x;
    do x = rng();
    while (x >= limit);
    return x % bound;
}

}  // namespace

u64 sample_seed(u64 base, u64 index) {
    u64 z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Permutation random_permutation(i64 n, u64 seed) {
    if (n < 1) throw Error(Err::Dim, "permutation length must be positive");
    std::mt19937_64 rng(seed);
    std::vector<i64> t(n);
    std::iota(t.begin(), t.end(), 0);
    for (i64 i = n - 1; i > 0; --i) std::swap(t[i], t[bounded(rng, (u64)i + 1)]);
    return Permutation(std::move(t));
}

Vec random_vector(i64 n, u64 seed, i64 lo, i64 hi) {
    std::mt19937_64 rng(seed);
    Vec v(n);
    for (auto& x : v) x = lo + (i64)bounded(rng, (u64)(hi - lo + 1));
    return v;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = (int)std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max(count, 1));
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

SampleStats summarize(const std::vector<std::vector<i64>>& per_sample) {
    SampleStats s;
    size_t levels = 0;
    for (const auto& v : per_sample) levels = std::max(levels, v.size());
    const double S = (double)per_sample.size();
    s.mean.assign(levels, 0);
    s.stddev.assign(levels, 0);
    std::vector<double> totals;
    for (const auto& v : per_sample) {
        double t = 0;
        for (size_t i = 0; i < v.size(); ++i) {
            s.mean[i] += (double)v[i];
            t += (double)v[i];
        }
        totals.push_back(t);
    }
    if (S == 0) return s;
    for (auto& m : s.mean) m /= S;
    for (const auto& v : per_sample)
        for (size_t i = 0; i < levels; ++i) {
            double x = i < v.size() ? (double)v[i] : 0.0;
            s.stddev[i] += (x - s.mean[i]) * (x - s.mean[i]);
        }
    s.total_mean = std::accumulate(totals.begin(), totals.end(), 0.0) / S;
    for (double t : totals) s.total_stddev += (t - s.total_mean) * (t - s.total_mean);
    if (S > 1) {
        for (auto& d : s.stddev) d = std::sqrt(d / (S - 1));
        s.total_stddev = std::sqrt(s.total_stddev / (S - 1));
    } else {
        for (auto& d : s.stddev) d = 0;
        s.total_stddev = 0;
    }
    return s;
}

namespace {

void emit(std::vector<BenchRow>& rows, const std::string& scheme, i64 n, int samples,
          const std::vector<std::vector<i64>>& counts, const CostParams& cost, bool merged) {
    SampleStats st = summarize(counts);
    double total_cost = 0;
    for (size_t i = 0; i < st.mean.size(); ++i) {
        std::vector<double> one(i + 1, 0.0);
        one[i] = st.mean[i];
        double c = profile_cost(one, cost, merged);
        total_cost += c;
        rows.push_back({scheme, n, samples, (int)i + 1, st.mean[i], st.stddev[i], c});
    }
    rows.push_back({scheme, n, samples, 0, st.total_mean, st.total_stddev, total_cost});
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
    if (cfg.samples < 1) throw Error(Err::Arg, "need at least one sample");
    std::vector<BenchRow> rows;
    for (i64 n : cfg.sizes) {
        if (!is_pow2(n) || n < 4) throw Error(Err::Arg, "bench sizes must be powers of two >= 4");
        std::vector<std::vector<i64>> ours(cfg.samples), benes(cfg.samples);
        parallel_for(cfg.samples, cfg.threads, [&](int s) {
            Permutation p = random_permutation(n, sample_seed(cfg.seed ^ (u64)n, (u64)s));
            MultiGroupNetwork net = build_network(p);
            if (cfg.collapse.top || cfg.collapse.bottom)
                net = collapse_levels(reduce_masks(net), cfg.collapse);
            ours[s] = rotation_profile(net).per_level;
            if (cfg.benes) {
                const int k = ilog2(n);
                BenesChain ch = restrict_keys(collapse_benes(benes_decompose(p), k - 1), k);
                benes[s] = benes_stats(ch).per_level;
            }
        });
        emit(rows, "ours", n, cfg.samples, ours, cfg.cost, true);
        emit(rows, "ours_separate", n, cfg.samples, ours, cfg.cost, false);
        if (cfg.benes) emit(rows, "benes", n, cfg.samples, benes, cfg.cost, false);
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << kBenchHeader << '\n';
    os << std::setprecision(10);
    for (const auto& r : rows) {
        os << r.scheme << ',' << r.n << ',' << r.samples << ',';
        if (r.level == 0) os << "total";
        else os << r.level;
        os << ',' << r.mean_rotations << ',' << r.stddev_rotations << ',' << r.mean_scalar_mult << '\n';
    }
    return os.str();
}

}  // namespace hperm
