#include "verify.hpp"

#include <mutex>
#include <random>

#include "benes.hpp"
#include "hmm.hpp"
#include "json.hpp"
#include "search.hpp"
#include "structured.hpp"

namespace hperm {

namespace {

using Case = std::function<std::string(int, u64)>;  // returns "" on success

VerifyCheck run_check(const std::string& name, int instances, u64 seed, int threads, const Case& fn) {
    VerifyCheck c;
    c.name = name;
    c.instances = instances;
    std::mutex mu;
    int first = -1;
    parallel_for(instances, threads, [&](int i) {
        std::string err;
        try {
            err = fn(i, sample_seed(seed, (u64)i));
        } catch (const std::exception& e) {
            err = e.what();
        }
        if (err.empty()) return;
        std::lock_guard<std::mutex> lock(mu);
        c.failures++;
        if (first < 0 || i < first) {
            first = i;
            c.detail = "instance " + std::to_string(i) + ": " + err;
        }
    });
    return c;
}

std::vector<i64> powers_upto(i64 lo, i64 hi) {
    std::vector<i64> out;
    for (i64 x = lo; x <= hi; x *= 2) out.push_back(x);
    return out;
}

std::string compare(const Vec& got, const Vec& want) {
    if (got == want) return "";
    for (size_t i = 0; i < want.size() && i < got.size(); ++i)
        if (got[i] != want[i])
            return "slot " + std::to_string(i) + " got " + std::to_string(got[i]) + " want " + std::to_string(want[i]);
    return "length mismatch";
}

}  // namespace

std::vector<VerifyCheck> run_verify(const VerifyConfig& cfg) {
    if (cfg.n_max < 16) throw Error(Err::Arg, "n-max must be at least 16");
    if (cfg.instances < 1) throw Error(Err::Arg, "need at least one instance");
    const int I = cfg.instances;
    const int T = cfg.threads;
    std::vector<VerifyCheck> out;

    // dimensions d with d^2 <= n_max
    std::vector<i64> ds;
    for (i64 d = 2; d * d <= cfg.n_max; ++d) ds.push_back(d);
    std::vector<i64> pow_ds;
    for (i64 d : ds)
        if (is_pow2(d) && d >= 4) pow_ds.push_back(d);

    out.push_back(run_check("ideal_search", I, cfg.seed + 1, T, [&](int i, u64 s) -> std::string {
        i64 d = pow_ds[i % pow_ds.size()];
        DiagMatrix U = build_ut(d, d * d);
        SearchParams p = diag_profile(U);
        MaxDepthResult r = max_ideal_depth(U, p);
        ValidationReport rep = validate_ideal_chain(U, r.chain, p);
        if (!rep.ok()) return "chain invalid for d=" + std::to_string(d) + ": " + rep.detail;
        Vec v = random_vector(d * d, s);
        return compare(r.chain.apply(SlotVector(v)).slots, U.apply_plain(v));
    }));

    struct Hmt {
        i64 d;
        int l;
    };
    std::vector<Hmt> hmts;
    for (i64 d : ds)
        if (d >= 3)
            for (int l = 1; l <= std::max(1, ilog2(d) - 1); ++l) hmts.push_back({d, l});
    out.push_back(run_check("decompose_ut", I, cfg.seed + 2, T, [&](int i, u64 s) -> std::string {
        auto [d, l] = hmts[i % hmts.size()];
        HmtSpec spec;
        spec.d = d;
        spec.n = d * d;
        spec.l = l;
        DecompositionChain ch = decompose_ut(spec);
        Vec v = random_vector(d * d, s);
        return compare(ch.apply(SlotVector(v)).slots, build_ut(d, d * d).apply_plain(v));
    }));
    out.push_back(run_check("decompose_sigma", I, cfg.seed + 3, T, [&](int i, u64 s) -> std::string {
        auto [d, l] = hmts[i % hmts.size()];
        DecompositionChain ch = decompose_sigma(d, l);
        Vec v = random_vector(ch.n, s);
        return compare(ch.apply(SlotVector(v)).slots, build_sigma(d, ch.n).apply_plain(v));
    }));
    out.push_back(run_check("decompose_tau", I, cfg.seed + 4, T, [&](int i, u64 s) -> std::string {
        auto [d, l] = hmts[i % hmts.size()];
        DecompositionChain ch = decompose_tau(d, l);
        Vec v = random_vector(ch.n, s);
        return compare(ch.apply(SlotVector(v)).slots, build_tau(d, ch.n).apply_plain(v));
    }));

    struct Pad {
        i64 d;
        int l;
    };
    std::vector<Pad> pads;
    for (i64 d = 2; d * d * d <= std::max<i64>(cfg.n_max, 64) && d <= 16; d *= 2)
        for (int l = 0; l <= ilog2(d); ++l) pads.push_back({d, l});
    out.push_back(run_check("padded_gamma_xi", I, cfg.seed + 5, T, [&](int i, u64 s) -> std::string {
        auto [d, l] = pads[i % pads.size()];
        PaddedGammaXi pg = decompose_gamma_xi_pad(d, l);
        GammaXi ref = build_gamma_xi(d);
        Vec v(d * d * d, 0);
        Vec a = random_vector(d * d, s);
        std::copy(a.begin(), a.end(), v.begin());
        std::string e = compare(pg.gamma.apply(SlotVector(v)).slots, ref.gamma.apply_plain(v));
        if (!e.empty()) return "gamma d=" + std::to_string(d) + " l=" + std::to_string(l) + ": " + e;
        e = compare(pg.xi.apply(SlotVector(v)).slots, ref.xi.apply_plain(v));
        return e.empty() ? e : "xi d=" + std::to_string(d) + " l=" + std::to_string(l) + ": " + e;
    }));

    out.push_back(run_check("hmm_multiply", I, cfg.seed + 6, T, [&](int i, u64 s) -> std::string {
        std::mt19937_64 rng(s);
        std::vector<i64> hd;
        for (i64 d = 2; d <= 16 && d * d <= cfg.n_max; d *= 2) hd.push_back(d);
        i64 d = hd[i % hd.size()];
        i64 dp = i64(1) << (rng() % (ilog2(d) + 1));
        i64 m = 1 + (i64)(rng() % 2);
        HmmConfig c;
        c.d = d;
        c.d_prime = dp;
        c.m = m;
        if (i % 2) c.replication = parse_replication("d0=" + std::to_string(i64(1) << (rng() % (ilog2(d) + 1))), d);
        std::vector<Matrix> A(m), B(m);
        for (i64 g = 0; g < m; ++g) {
            A[g] = random_vector(d * d, rng(), -9, 9);
            B[g] = random_vector(d * d, rng(), -9, 9);
        }
        HmmRun r = hmm_multiply(A, B, c);
        for (i64 g = 0; g < m; ++g) {
            std::string e = compare(r.C[g], matmul(A[g], B[g], d));
            if (!e.empty()) return "d=" + std::to_string(d) + " d'=" + std::to_string(dp) + ": " + e;
        }
        return "";
    }));

    std::vector<i64> ns = powers_upto(16, cfg.n_max);
    auto net_case = [&](int mode) {
        return [&, mode](int i, u64 s) -> std::string {
            i64 n = ns[i % ns.size()];
            Permutation p = random_permutation(n, s);
            Vec v = random_vector(n, s ^ 0x5bd1e995);
            MultiGroupNetwork net = build_network(p);
            if (mode >= 1) net = reduce_masks(net);
            if (mode == 2) {
                int L = net.max_level();
                std::mt19937_64 rng(s);
                int t = L > 2 ? 1 + (int)(rng() % std::min(3, L - 2)) : 0;
                int b = L - t > 1 ? 1 + (int)(rng() % std::min(4, L - t - 1)) : 0;
                i64 arity = i64(2) << (rng() % 3);
                net = collapse_levels(net, Collapse{t, b, arity});
            }
            return compare(evaluate_network(net, SlotVector(v)).slots, p.apply(v));
        };
    };
    out.push_back(run_check("netperm", I, cfg.seed + 7, T, net_case(0)));
    out.push_back(run_check("netperm_reduced", I, cfg.seed + 8, T, net_case(1)));
    out.push_back(run_check("netperm_collapsed", I, cfg.seed + 9, T, net_case(2)));

    out.push_back(run_check("benes", I, cfg.seed + 10, T, [&](int i, u64 s) -> std::string {
        i64 n = ns[i % ns.size()];
        Permutation p = random_permutation(n, s);
        Vec v = random_vector(n, s ^ 0x5bd1e995);
        BenesChain raw = benes_decompose(p);
        if (raw.product().targets != p.targets) return "factor product differs";
        const int k = ilog2(n);
        BenesChain ch = restrict_keys(collapse_benes(raw, k - 1), k);
        return compare(evaluate_benes(ch, SlotVector(v)).slots, p.apply(v));
    }));
    return out;
}

std::string verify_json(const std::vector<VerifyCheck>& checks) {
    nlohmann::ordered_json j;
    bool ok = true;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        ok &= c.passed();
        nlohmann::ordered_json o;
        o["name"] = c.name;
        o["instances"] = c.instances;
        o["failures"] = c.failures;
        o["passed"] = c.passed();
        if (!c.detail.empty()) o["detail"] = c.detail;
        j["checks"].push_back(o);
    }
    j["passed"] = ok;
    return j.dump(2);
}

}  // namespace hperm
