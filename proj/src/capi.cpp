#include "hperm/hperm.h"

#include <cstdlib>
#include <cstring>
#include <random>

#include "bench.hpp"
#include "benes.hpp"
#include "costmodel.hpp"
#include "hmm.hpp"
#include "json.hpp"
#include "netperm.hpp"
#include "search.hpp"
#include "serialize.hpp"
#include "structured.hpp"
#include "verify.hpp"

using namespace hperm;
using ordered_json = nlohmann::ordered_json;

struct hp_perm {
    Permutation p;
};
struct hp_chain {
    DecompositionChain c;
};
struct hp_network {
    MultiGroupNetwork net;
};
struct hp_benes {
    BenesChain chain;
};

namespace {

thread_local std::string g_error;

hp_status set_error(hp_status s, const std::string& msg) {
    g_error = msg;
    return s;
}

hp_status from_code(Err e) {
    switch (e) {
        case Err::Arg: return HP_ERR_ARG;
        case Err::Dim: return HP_ERR_DIM;
        case Err::Depth: return HP_ERR_DEPTH;
        case Err::NotFound: return HP_ERR_NOT_FOUND;
        case Err::IO: return HP_ERR_IO;
        case Err::Verify: return HP_ERR_VERIFY;
        case Err::Internal: return HP_ERR_INTERNAL;
    }
    return HP_ERR_INTERNAL;
}

template <class F>
hp_status guard(F&& fn) {
    g_error.clear();
    try {
        return fn();
    } catch (const Error& e) {
        return set_error(from_code(e.code), e.what());
    } catch (const nlohmann::json::exception& e) {
        return set_error(HP_ERR_ARG, e.what());
    } catch (const std::bad_alloc&) {
        return set_error(HP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(HP_ERR_INTERNAL, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void put(char** dst, const std::string& s) {
    if (dst) *dst = dup_string(s);
}

#define HP_REQUIRE(cond, msg) \
    if (!(cond)) return set_error(HP_ERR_ARG, msg)

Collapse to_collapse(const hp_collapse* c) {
    Collapse out;
    if (!c) return out;
    out.top = c->top;
    out.bottom = c->bottom;
    out.arity = c->arity ? c->arity : 4;
    return out;
}

ordered_json signed_diags(const DiagMatrix& m) { return ordered_json(m.signed_keys()); }

ordered_json chain_summary(const DecompositionChain& c) {
    ordered_json arr = ordered_json::array();
    for (const auto& f : c.factors) {
        ordered_json o;
        o["diagonals"] = signed_diags(f.m);
        o["count"] = (i64)f.m.diags.size();
        arr.push_back(o);
    }
    return arr;
}

ordered_json cost_obj(const CostReport& r) { return ordered_json::parse(cost_report_json(r)); }

ordered_json ledger_obj(const Ledger& l) {
    ordered_json j;
    j["rotations"] = l.rotation_count();
    j["keys"] = l.keys();
    j["cmults"] = l.cmults;
    j["mults"] = l.mults;
    j["adds"] = l.adds;
    j["rescales"] = l.rescales;
    return j;
}

ordered_json profile_obj(const RotationProfile& p) {
    ordered_json j;
    j["per_level"] = p.per_level;
    j["total"] = p.total;
    j["keys"] = p.keys;
    j["key_count"] = (i64)p.keys.size();
    j["depth"] = p.depth;
    return j;
}

Vec to_vec(const int64_t* in, int64_t n) { return Vec(in, in + n); }

void copy_out(const Vec& v, int64_t* out) { std::copy(v.begin(), v.end(), out); }

DecompositionChain build_named_chain(const std::string& kind, i64 d, int l, i64 n) {
    if (kind == "ut") {
        HmtSpec spec;
        spec.d = d;
        spec.n = n ? n : d * d;
        spec.l = l;
        return decompose_ut(spec);
    }
    if (kind == "sigma") return decompose_sigma(d, l, n);
    if (kind == "tau") return decompose_tau(d, l, n);
    if (kind == "gamma" || kind == "xi") {
        if (n && n != d * d * d) throw Error(Err::Dim, "gamma/xi chains live on d^3 slots");
        PaddedGammaXi pg = decompose_gamma_xi_pad(d, l);
        return kind == "gamma" ? pg.gamma : pg.xi;
    }
    throw Error(Err::Arg, "unknown chain kind '" + kind + "' (ut, gamma, xi, sigma, tau)");
}

// reference output and the input domain the chain is defined on
Vec reference_apply(const std::string& kind, i64 d, i64 n, Vec& v) {
    if (kind == "ut") return build_ut(d, n).apply_plain(v);
    if (kind == "sigma") return build_sigma(d, n).apply_plain(v);
    if (kind == "tau") return build_tau(d, n).apply_plain(v);
    // padded chains are exact for inputs supported on the first d^2 slots
    std::fill(v.begin() + d * d, v.end(), 0);
    GammaXi ref = build_gamma_xi(d);
    return kind == "gamma" ? ref.gamma.apply_plain(v) : ref.xi.apply_plain(v);
}

}  // namespace

extern "C" {

const char* hp_last_error(void) { return g_error.c_str(); }

const char* hp_status_name(hp_status s) {
    switch (s) {
        case HP_OK: return "ok";
        case HP_ERR_ARG: return "invalid argument";
        case HP_ERR_DIM: return "dimension mismatch";
        case HP_ERR_DEPTH: return "depth exhausted";
        case HP_ERR_NOT_FOUND: return "not found";
        case HP_ERR_IO: return "i/o error";
        case HP_ERR_VERIFY: return "verification failed";
        case HP_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

const char* hp_version(void) { return "0.1.0"; }

void hp_string_free(char* s) { std::free(s); }

// ---- permutations ----

hp_status hp_perm_create(const int64_t* targets, int64_t n, hp_perm** out) {
    return guard([&] {
        HP_REQUIRE(targets && out && n > 0, "targets, n > 0 and out are required");
        Permutation p(to_vec(targets, n));
        if (!p.valid()) return set_error(HP_ERR_ARG, "targets are not a permutation of 0..n-1");
        *out = new hp_perm{std::move(p)};
        return HP_OK;
    });
}

hp_status hp_perm_random(int64_t n, uint64_t seed, hp_perm** out) {
    return guard([&] {
        HP_REQUIRE(out, "out is required");
        *out = new hp_perm{random_permutation(n, seed)};
        return HP_OK;
    });
}

hp_status hp_perm_load(const char* path, hp_perm** out) {
    return guard([&] {
        HP_REQUIRE(path && out, "path and out are required");
        *out = new hp_perm{load_permutation(path)};
        return HP_OK;
    });
}

hp_status hp_perm_named(const char* kind, int64_t d, int64_t n, hp_perm** out) {
    return guard([&] {
        HP_REQUIRE(kind && out, "kind and out are required");
        HP_REQUIRE(d >= 2, "d must be at least 2");
        const std::string k = kind;
        const i64 len = n ? n : d * d;
        DiagMatrix m;
        if (k == "ut") m = build_ut(d, len);
        else if (k == "sigma") m = build_sigma(d, len);
        else if (k == "tau") m = build_tau(d, len);
        else return set_error(HP_ERR_ARG, "unknown permutation '" + k + "' (ut, sigma, tau)");
        *out = new hp_perm{m.to_perm()};
        return HP_OK;
    });
}

hp_status hp_perm_size(const hp_perm* p, int64_t* n) {
    return guard([&] {
        HP_REQUIRE(p && n, "null handle");
        *n = p->p.size();
        return HP_OK;
    });
}

hp_status hp_perm_targets(const hp_perm* p, int64_t* out, int64_t cap) {
    return guard([&] {
        HP_REQUIRE(p && out, "null handle");
        if (cap < p->p.size()) return set_error(HP_ERR_DIM, "buffer too small");
        copy_out(p->p.targets, out);
        return HP_OK;
    });
}

hp_status hp_perm_apply(const hp_perm* p, const int64_t* in, int64_t* out, int64_t n) {
    return guard([&] {
        HP_REQUIRE(p && in && out, "null argument");
        if (n != p->p.size()) return set_error(HP_ERR_DIM, "vector length differs from the permutation");
        copy_out(p->p.apply(to_vec(in, n)), out);
        return HP_OK;
    });
}

void hp_perm_free(hp_perm* p) { delete p; }

// ---- chains ----

hp_status hp_search(const hp_perm* p, hp_chain** chain, char** report_json) {
    return guard([&] {
        HP_REQUIRE(p, "null handle");
        DiagMatrix U = DiagMatrix::from_perm(p->p);
        SearchParams sp = diag_profile(U);
        MaxDepthResult r = max_ideal_depth(U, sp);
        ValidationReport v = validate_ideal_chain(U, r.chain, sp);
        ordered_json j;
        j["n"] = sp.n;
        j["a"] = sp.a;
        j["r"] = sp.r;
        j["asymmetric"] = sp.asymmetric;
        j["source_diagonals"] = signed_diags(U);
        j["depth"] = r.depth;
        j["validation"] = {{"product", v.product}, {"right_factors", v.right_factors},
                           {"left_bound", v.left_bound}, {"ok", v.ok()}};
        if (!v.detail.empty()) j["validation"]["detail"] = v.detail;
        j["factors"] = chain_summary(r.chain);
        j["chain"] = ordered_json::parse(chain_json(r.chain));
        put(report_json, j.dump(2) + "\n");
        if (chain) *chain = new hp_chain{std::move(r.chain)};
        if (!v.ok()) return set_error(HP_ERR_VERIFY, "search result failed validation: " + v.detail);
        return HP_OK;
    });
}

hp_status hp_decompose(const char* kind, int64_t d, int l, int64_t n, hp_chain** out) {
    return guard([&] {
        HP_REQUIRE(kind && out, "kind and out are required");
        *out = new hp_chain{build_named_chain(kind, d, l, n)};
        return HP_OK;
    });
}

hp_status hp_decompose_report(const char* kind, int64_t d, int l, int64_t n, int trials, uint64_t seed,
                              char** report_json) {
    return guard([&] {
        HP_REQUIRE(kind, "kind is required");
        HP_REQUIRE(trials >= 0, "trials must be non-negative");
        const std::string k = kind;
        DecompositionChain c = build_named_chain(k, d, l, n);
        ordered_json j;
        j["kind"] = k;
        j["d"] = d;
        j["l"] = l;
        j["n"] = c.n;
        j["depth"] = c.depth;
        j["factors"] = chain_summary(c);
        Ledger led;
        {
            LedgerScope scope(led);
            c.apply(SlotVector(Vec(c.n, 0)));
        }
        j["rotations"] = led.rotation_count();
        j["keys"] = led.keys();
        int failures = 0;
        if (trials > 0) {
            std::string first;
            for (int t = 0; t < trials; ++t) {
                Vec v = random_vector(c.n, sample_seed(seed, (u64)t));
                Vec want = reference_apply(k, d, c.n, v);
                if (c.apply(SlotVector(v)).slots != want) {
                    if (!failures) first = "trial " + std::to_string(t);
                    ++failures;
                }
            }
            j["verify"] = {{"trials", trials}, {"seed", seed}, {"failures", failures}, {"passed", failures == 0}};
            if (failures) j["verify"]["first_failure"] = first;
        }
        j["chain"] = ordered_json::parse(chain_json(c));
        put(report_json, j.dump(2) + "\n");
        if (failures) return set_error(HP_ERR_VERIFY, std::to_string(failures) + " trials differ from the reference");
        return HP_OK;
    });
}

hp_status hp_chain_load(const char* path, hp_chain** out) {
    return guard([&] {
        HP_REQUIRE(path && out, "path and out are required");
        *out = new hp_chain{parse_chain(read_file(path))};
        return HP_OK;
    });
}

hp_status hp_chain_depth(const hp_chain* c, int* depth) {
    return guard([&] {
        HP_REQUIRE(c && depth, "null handle");
        *depth = c->c.depth;
        return HP_OK;
    });
}

hp_status hp_chain_size(const hp_chain* c, int64_t* n) {
    return guard([&] {
        HP_REQUIRE(c && n, "null handle");
        *n = c->c.n;
        return HP_OK;
    });
}

hp_status hp_chain_apply(const hp_chain* c, const int64_t* in, int64_t* out, int64_t n, int64_t* rotations) {
    return guard([&] {
        HP_REQUIRE(c && in && out, "null argument");
        if (n != c->c.n) return set_error(HP_ERR_DIM, "vector length differs from the chain");
        Ledger led;
        SlotVector r;
        {
            LedgerScope scope(led);
            r = c->c.apply(SlotVector(to_vec(in, n)));
        }
        copy_out(r.slots, out);
        if (rotations) *rotations = led.rotation_count();
        return HP_OK;
    });
}

hp_status hp_chain_json(const hp_chain* c, char** json) {
    return guard([&] {
        HP_REQUIRE(c && json, "null argument");
        put(json, chain_json(c->c) + "\n");
        return HP_OK;
    });
}

hp_status hp_chain_cost_json(const hp_chain* c, char** json) {
    return guard([&] {
        HP_REQUIRE(c && json, "null argument");
        put(json, cost_report_json(chain_cost(c->c, CostParams{})) + "\n");
        return HP_OK;
    });
}

void hp_chain_free(hp_chain* c) { delete c; }

// ---- hmm ----

hp_status hp_hmm_run(int64_t d, int64_t dprime, int64_t m, const char* replication, const int64_t* A,
                     const int64_t* B, uint64_t seed, int64_t* C, char** report_json) {
    return guard([&] {
        HmmConfig cfg;
        cfg.d = d;
        cfg.d_prime = dprime;
        cfg.m = m;
        cfg.replication = parse_replication(replication ? replication : "naive", d);
        cfg.validate();
        std::vector<Matrix> As(m), Bs(m);
        std::mt19937_64 rng(seed);
        for (i64 g = 0; g < m; ++g) {
            As[g] = A ? to_vec(A + g * d * d, d * d) : random_vector(d * d, rng(), -9, 9);
            Bs[g] = B ? to_vec(B + g * d * d, d * d) : random_vector(d * d, rng(), -9, 9);
        }
        Ledger led;
        HmmRun run;
        {
            LedgerScope scope(led);
            run = hmm_multiply(As, Bs, cfg);
        }
        bool correct = true;
        for (i64 g = 0; g < m; ++g) correct &= run.C[g] == matmul(As[g], Bs[g], d);
        HmmBudget b = hmm_rotation_budget(cfg);
        ordered_json j;
        j["d"] = d;
        j["dprime"] = dprime;
        j["m"] = m;
        j["slots"] = cfg.slots();
        j["replication"] = replication ? replication : "naive";
        j["seed"] = seed;
        j["depth"] = run.depth;
        j["rotations"] = led.rotation_count();
        j["budget"] = {{"naive", b.naive},   {"closed_form", b.closed_form}, {"expected", b.expected},
                       {"amortized", b.amortized}};
        if (!cfg.replication.naive())
            j["budget"]["replication"] = {{"row_closed", b.row_closed}, {"row_expected", b.row_expected},
                                          {"col_closed", b.col_closed}, {"col_expected", b.col_expected}};
        j["budget_matched"] = led.rotation_count() == b.expected;
        j["ledger"] = ledger_obj(led);
        {
            // price the recorded rotations at their operand levels
            CostReport r;
            CostParams cp;
            for (const auto& ev : led.rotations) {
                cp.level = std::max(0, ev.level);
                r.breakdown += rotation_breakdown(ev.merged, cp);
                r.rotations++;
            }
            r.total = r.breakdown.total();
            r.keys = led.keys();
            r.depth = run.depth;
            r.cmult_count = led.cmults;
            for (int lvl : led.cmult_levels) {
                cp.level = std::max(0, lvl);
                r.cmult += submodule_cost(Submodule::CMult, cp);
            }
            j["cost"] = cost_obj(r);
        }
        j["correct"] = correct;
        put(report_json, j.dump(2) + "\n");
        if (C)
            for (i64 g = 0; g < m; ++g) copy_out(run.C[g], C + g * d * d);
        if (!correct) return set_error(HP_ERR_VERIFY, "product differs from the reference");
        return HP_OK;
    });
}

// ---- networks ----

hp_status hp_network_build(const hp_perm* p, int reduce, const hp_collapse* collapse, hp_network** out) {
    return guard([&] {
        HP_REQUIRE(p && out, "null argument");
        MultiGroupNetwork net = build_network(p->p);
        Collapse c = to_collapse(collapse);
        if (reduce || c.top || c.bottom) net = reduce_masks(net);
        if (c.top || c.bottom) net = collapse_levels(net, c);
        *out = new hp_network{std::move(net)};
        return HP_OK;
    });
}

hp_status hp_network_eval(const hp_network* net, const int64_t* in, int64_t* out, int64_t n) {
    return guard([&] {
        HP_REQUIRE(net && in && out, "null argument");
        if (n != net->net.n) return set_error(HP_ERR_DIM, "vector length differs from the network");
        copy_out(evaluate_network(net->net, SlotVector(to_vec(in, n))).slots, out);
        return HP_OK;
    });
}

hp_status hp_network_json(const hp_network* net, char** json) {
    return guard([&] {
        HP_REQUIRE(net && json, "null argument");
        put(json, network_json(net->net) + "\n");
        return HP_OK;
    });
}

hp_status hp_network_profile_json(const hp_network* net, char** json) {
    return guard([&] {
        HP_REQUIRE(net && json, "null argument");
        const auto& g = net->net;
        ordered_json j;
        j["n"] = g.n;
        j["groups"] = g.groups();
        j["max_level"] = g.max_level();
        j["reduced"] = g.reduced;
        j["collapse"] = {{"top", g.collapse.top}, {"bottom", g.collapse.bottom}, {"arity", g.collapse.arity}};
        j["profile"] = profile_obj(rotation_profile(g));
        j["mask_depth"] = mask_depth(g);
        j["cost"] = cost_obj(network_cost(g, CostParams{}));
        j["cost_separate"] = cost_obj(network_cost_separate(g, CostParams{}));
        put(json, j.dump(2) + "\n");
        return HP_OK;
    });
}

hp_status hp_network_sample_profile(int64_t n, int samples, uint64_t seed, int threads,
                                    const hp_collapse* collapse, char** json) {
    return guard([&] {
        HP_REQUIRE(json, "null argument");
        HP_REQUIRE(samples >= 1, "need at least one sample");
        HP_REQUIRE(is_pow2(n) && n >= 4, "n must be a power of two >= 4");
        const Collapse c = to_collapse(collapse);
        std::vector<std::vector<i64>> counts(samples);
        std::vector<i64> keys(samples);
        std::vector<int> levels(samples);
        parallel_for(samples, threads, [&](int s) {
            // same per-sample seeds as bench
            Permutation p = random_permutation(n, sample_seed(seed ^ (u64)n, (u64)s));
            MultiGroupNetwork net = build_network(p);
            if (c.top || c.bottom) net = collapse_levels(reduce_masks(net), c);
            RotationProfile pr = rotation_profile(net);
            counts[s] = pr.per_level;
            keys[s] = (i64)pr.keys.size();
            levels[s] = net.max_level();
        });
        SampleStats st = summarize(counts);
        CostParams cp;
        ordered_json j;
        j["n"] = n;
        j["samples"] = samples;
        j["seed"] = seed;
        j["collapse"] = {{"top", c.top}, {"bottom", c.bottom}, {"arity", c.arity}};
        j["mean_per_level"] = st.mean;
        j["stddev_per_level"] = st.stddev;
        j["mean_total"] = st.total_mean;
        j["stddev_total"] = st.total_stddev;
        j["max_keys"] = *std::max_element(keys.begin(), keys.end());
        j["max_level"] = *std::max_element(levels.begin(), levels.end());
        j["scalar_mult_merged"] = profile_cost(st.mean, cp, true);
        j["scalar_mult_separate"] = profile_cost(st.mean, cp, false);
        put(json, j.dump(2) + "\n");
        return HP_OK;
    });
}

void hp_network_free(hp_network* net) { delete net; }

// ---- benes ----

hp_status hp_benes_build(const hp_perm* p, int depth, int64_t key_budget, hp_benes** out) {
    return guard([&] {
        HP_REQUIRE(p && out, "null argument");
        const i64 n = p->p.size();
        if (!is_pow2(n) || n < 4) return set_error(HP_ERR_ARG, "Benes routing needs a power-of-two n >= 4");
        const int k = ilog2(n);
        if (depth == 0) depth = k - 1;
        if (depth < 1 || depth > 2 * k - 1)
            return set_error(HP_ERR_ARG, "depth must lie in [1, 2 log n - 1]");
        BenesChain ch = benes_decompose(p->p);
        if (depth < ch.depth()) ch = collapse_benes(ch, depth);
        if (key_budget == 0) key_budget = k;
        if (key_budget > 0) ch = restrict_keys(ch, key_budget);
        *out = new hp_benes{std::move(ch)};
        return HP_OK;
    });
}

hp_status hp_benes_eval(const hp_benes* b, const int64_t* in, int64_t* out, int64_t n) {
    return guard([&] {
        HP_REQUIRE(b && in && out, "null argument");
        if (n != b->chain.n) return set_error(HP_ERR_DIM, "vector length differs from the chain");
        // uncollapsed chains can be deeper than the default level budget
        copy_out(evaluate_benes(b->chain, SlotVector(to_vec(in, n), 2 * b->chain.depth() + 2)).slots, out);
        return HP_OK;
    });
}

hp_status hp_benes_json(const hp_benes* b, char** json) {
    return guard([&] {
        HP_REQUIRE(b && json, "null argument");
        const auto& ch = b->chain;
        BenesStats st = benes_stats(ch);
        ordered_json j;
        j["n"] = ch.n;
        j["depth"] = ch.depth();
        j["per_level"] = st.per_level;
        j["total"] = st.total;
        j["mean_diagonals"] = st.mean_diagonals;
        j["keys"] = st.keys;
        j["key_count"] = (i64)st.keys.size();
        j["cost"] = cost_obj(benes_cost(ch, CostParams{}));
        j["chain"] = ordered_json::parse(chain_json(ch.to_chain()));
        put(json, j.dump(2) + "\n");
        return HP_OK;
    });
}

void hp_benes_free(hp_benes* b) { delete b; }

// ---- cost ----

hp_status hp_submodule_cost(const char* kind, int64_t N, int L, int64_t alpha, int level, int64_t* out) {
    return guard([&] {
        HP_REQUIRE(kind && out, "null argument");
        CostParams cp;
        cp.N = N;
        cp.L = L;
        cp.alpha = alpha;
        cp.level = level;
        cp.validate();
        *out = submodule_cost(parse_submodule(kind), cp);
        return HP_OK;
    });
}

hp_status hp_merged_saving(int64_t N, int64_t alpha, int level, int64_t* saving, int* holds) {
    return guard([&] {
        CostParams cp;
        cp.N = N;
        cp.alpha = alpha;
        cp.level = level;
        cp.validate();
        SavingCheck s = merged_saving(cp);
        if (saving) *saving = s.saving;
        if (holds) *holds = s.holds ? 1 : 0;
        return HP_OK;
    });
}

// ---- bench / verify ----

hp_status hp_bench_csv(const int64_t* sizes, int count, int samples, uint64_t seed, int threads,
                       const hp_collapse* collapse, int with_benes, char** csv) {
    return guard([&] {
        HP_REQUIRE(csv, "null argument");
        BenchConfig cfg;
        if (sizes && count > 0) cfg.sizes.assign(sizes, sizes + count);
        cfg.samples = samples;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.benes = with_benes != 0;
        cfg.collapse = to_collapse(collapse);
        put(csv, bench_csv(run_bench(cfg)));
        return HP_OK;
    });
}

hp_status hp_verify_all(int64_t n_max, int instances, uint64_t seed, int threads, char** report_json) {
    return guard([&] {
        VerifyConfig cfg;
        cfg.n_max = n_max;
        cfg.instances = instances;
        cfg.seed = seed;
        cfg.threads = threads;
        auto checks = run_verify(cfg);
        put(report_json, verify_json(checks) + "\n");
        for (const auto& c : checks)
            if (!c.passed()) return set_error(HP_ERR_VERIFY, "check '" + c.name + "' failed: " + c.detail);
        return HP_OK;
    });
}

}  // extern "C"
