#include "hmm.hpp"

#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "structured.hpp"

namespace hperm {

i64 HmmConfig::slots() const {
    if (n) return n;
    i64 need = m * span();
    i64 s = 1;
    while (s < need) s <<= 1;
    return s;
}

void HmmConfig::validate() const {
    if (!is_pow2(d) || d < 2) throw Error(Err::Arg, "d must be a power of two >= 2");
    if (d_prime < 1 || d % d_prime) throw Error(Err::Arg, "d' must divide d");
    if (m < 1) throw Error(Err::Arg, "m must be positive");
    i64 s = slots();
    if (!is_pow2(s) || m * span() > s) throw Error(Err::Dim, "m*d^2*d' exceeds the slot count");
    if (!replication.naive()) {
        i64 prod = 1;
        for (i64 f : replication.factors) {
            if (!is_pow2(f)) throw Error(Err::Arg, "replication factors must be powers of two");
            prod *= f;
        }
        if (prod != d) throw Error(Err::Arg, "replication factors must multiply to d");
    }
}

Matrix matmul(const Matrix& A, const Matrix& B, i64 d) {
    Matrix C(d * d, 0);
    for (i64 i = 0; i < d; ++i)
        for (i64 k = 0; k < d; ++k) {
            i64 a = A[i * d + k];
            if (!a) continue;
            for (i64 j = 0; j < d; ++j) C[i * d + j] += a * B[k * d + j];
        }
    return C;
}

namespace {

// unit index of slot p is (p / stride) % d
struct UnitSpace {
    i64 d;
    i64 stride;
    bool cyclic;
};

struct Digits {
    std::vector<i64> dj;  // dj[0] = d_0
    std::vector<i64> p;   // p[j] = d_0 ... d_{j-1}
    int l = 0;
};

Digits digits_of(i64 d, const std::vector<i64>& factors) {
    Digits g;
    std::vector<i64> f = factors.empty() ? std::vector<i64>{d} : factors;
    g.l = (int)f.size() - 1;
    g.dj.assign(f.rbegin(), f.rend());
    g.p.assign(g.dj.size() + 1, 1);
    for (size_t j = 0; j < g.dj.size(); ++j) g.p[j + 1] = g.p[j] * g.dj[j];
    return g;
}

Vec unit_mask(i64 n, const UnitSpace& us, const std::function<bool(i64)>& keep) {
    Vec m(n, 0);
    for (i64 p = 0; p < n; ++p) m[p] = keep((p / us.stride) % us.d) ? 1 : 0;
    return m;
}

// key of the layer-j node holding unit k (layer 1 nodes are per unit)
i64 node_key(i64 k, int j, const Digits& g) { return j == 1 ? k : k / g.p[j]; }

std::map<i64, SlotVector> replicate_units(const SlotVector& P, const UnitSpace& us,
                                          const std::vector<i64>& factors, const std::vector<i64>& units) {
    const i64 n = P.size();
    const Digits g = digits_of(us.d, factors);
    const i64 d0 = g.dj[0];
    std::map<i64, SlotVector> out;

    if (g.l == 0) {
        for (i64 k : units) out[k] = rescale(cmult(P, unit_mask(n, us, [&](i64 u) { return u == k; })));
    } else {
        std::map<i64, SlotVector> cur = {{0, P}};
        for (int j = g.l; j >= 1; --j) {
            const i64 dj = g.dj[j], pj = g.p[j];
            std::map<i64, std::set<i64>> kids;  // parent key -> child keys
            std::map<i64, i64> rep;             // child key -> a unit it carries
            for (i64 k : units) {
                i64 c = node_key(k, j, g);
                kids[j == g.l ? 0 : node_key(k, j + 1, g)].insert(c);
                rep[c] = k;
            }
            std::map<i64, SlotVector> next;
            for (const auto& [pk, cs] : kids) {
                const SlotVector& parent = cur.at(pk);
                std::map<i64, SlotVector> cache;
                for (i64 c : cs) {
                    const i64 k = rep[c];
                    const i64 kj = (k / pj) % dj, k0 = k % d0;
                    SlotVector acc;
                    for (i64 t = 0; t < dj; ++t) {
                        i64 e = us.cyclic ? pmod(kj - t, dj) : kj - t;
                        if (e != 0 && !cache.count(e)) cache.emplace(e, rotate(parent, e * pj * us.stride));
                        const SlotVector& src = e == 0 ? parent : cache.at(e);
                        Vec mask = unit_mask(n, us, [&](i64 u) {
                            return (u / pj) % dj == t && (j != 1 || u % d0 == k0);
                        });
                        SlotVector term = cmult(src, mask);
                        acc = t == 0 ? term : add(acc, term);
                    }
                    next[c] = rescale(acc);
                }
            }
            cur = std::move(next);
        }
        out = std::move(cur);
    }

    const int lw = ilog2(d0);
    for (auto& [k, x] : out) {
        const i64 o = k % d0;
        for (int t = 0; t < lw; ++t) {
            i64 s = i64(1) << t;
            i64 step = us.cyclic || ((o >> t) & 1) ? s : -s;
            x = add(x, rotate(x, step * us.stride));
        }
    }
    return out;
}

SlotVector padded_sum(const SlotVector& v, i64 step, i64 count) {
    DecompositionChain ch;
    ch.n = v.size();
    ch.depth = ilog2(count);
    for (auto& f : padded_sum_factors(v.size(), step, count, ilog2(count)))
        ch.factors.push_back({std::move(f), Strategy::Direct, 0});
    return ch.apply(v);
}

std::vector<i64> block_units(i64 d, i64 dp) {
    std::vector<i64> k;
    for (i64 b = 0; b < d / dp; ++b) k.push_back(dp * b);
    return k;
}

}  // namespace

i64 replication_rotations(i64 d, const std::vector<i64>& factors, const std::vector<i64>& units, bool cyclic) {
    const Digits g = digits_of(d, factors);
    i64 total = (i64)units.size() * ilog2(g.dj[0]);
    for (int j = g.l; j >= 1; --j) {
        const i64 dj = g.dj[j], pj = g.p[j];
        std::map<i64, std::set<i64>> steps;
        for (i64 k : units) {
            i64 pk = j == g.l ? 0 : node_key(k, j + 1, g);
            i64 kj = (k / pj) % dj;
            for (i64 t = 0; t < dj; ++t) {
                i64 e = cyclic ? pmod(kj - t, dj) : kj - t;
                if (e) steps[pk].insert(e);
            }
        }
        for (const auto& [pk, s] : steps) total += (i64)s.size();
    }
    return total;
}

HmmRun hmm_multiply(const std::vector<Matrix>& A, const std::vector<Matrix>& B, const HmmConfig& cfg) {
    cfg.validate();
    const i64 d = cfg.d, dp = cfg.d_prime, n = cfg.slots(), S = cfg.span();
    if ((i64)A.size() != cfg.m || (i64)B.size() != cfg.m) throw Error(Err::Arg, "expected m matrices on each side");
    Vec a(n, 0), b(n, 0);
    for (i64 g = 0; g < cfg.m; ++g) {
        if ((i64)A[g].size() != d * d || (i64)B[g].size() != d * d) throw Error(Err::Dim, "matrix size is not d*d");
        std::copy(A[g].begin(), A[g].end(), a.begin() + g * S);
        std::copy(B[g].begin(), B[g].end(), b.begin() + g * S);
    }
    Ledger local;
    Ledger* outer = active_ledger();
    HmmRun run;
    SlotVector C;
    {
        LedgerScope scope(outer ? *outer : local);
        const i64 before = active_ledger()->rotation_count();
        SlotVector pa, pb;
        {
            TagScope t(1);
            pa = padded_sum(SlotVector(a), -(d * d - 1), dp);
        }
        {
            TagScope t(2);
            pb = padded_sum(SlotVector(b), -d * (d - 1), dp);
        }
        const auto units = block_units(d, dp);
        std::map<i64, SlotVector> ra, rb;
        {
            TagScope t(3);
            ra = replicate_units(pa, {d, 1, false}, cfg.replication.factors, units);
        }
        {
            TagScope t(4);
            rb = replicate_units(pb, {d, d, n == d * d}, cfg.replication.factors, units);
        }
        TagScope t(5);
        bool first = true;
        for (i64 k : units) {
            SlotVector prod = mult(ra.at(k), rb.at(k));
            C = first ? prod : add(C, prod);
            first = false;
        }
        C = rescale(C);
        for (i64 s = S / 2; s >= S / dp && s >= 1 && dp > 1; s /= 2) C = add(C, rotate(C, s));
        run.rotations = active_ledger()->rotation_count() - before;
    }
    run.depth = C.depth_used;
    for (i64 g = 0; g < cfg.m; ++g) run.C.emplace_back(C.slots.begin() + g * S, C.slots.begin() + g * S + d * d);
    return run;
}

SlotVector srep_replicate(const SlotVector& v, i64 k, const ReplicaLayout& layout) {
    const i64 d = layout.d;
    if (!is_pow2(d) || d * d > v.size()) throw Error(Err::Dim, "replication needs a power-of-two d with d*d <= n");
    if (k < 0 || k >= d) throw Error(Err::Arg, "unit index out of range");
    const bool row = layout.dir == Direction::Row;
    UnitSpace us{d, row ? d : 1, row && v.size() == d * d};
    return replicate_units(v, us, {}, {k}).at(k);
}

std::vector<SlotVector> fast_replicate(const SlotVector& v, const HmmConfig& cfg, Direction dir) {
    const i64 d = cfg.d;
    if (!is_pow2(d) || d * d > v.size()) throw Error(Err::Dim, "replication needs a power-of-two d with d*d <= n");
    if (!cfg.replication.naive()) {
        i64 prod = 1;
        for (i64 f : cfg.replication.factors) prod *= f;
        if (prod != d) throw Error(Err::Arg, "replication factors must multiply to d");
    }
    const bool row = dir == Direction::Row;
    UnitSpace us{d, row ? d : 1, row && v.size() == d * d};
    std::vector<i64> units(d);
    for (i64 k = 0; k < d; ++k) units[k] = k;
    auto m = replicate_units(v, us, cfg.replication.factors, units);
    std::vector<SlotVector> out;
    for (auto& [k, x] : m) out.push_back(std::move(x));
    return out;
}

HmmBudget hmm_rotation_budget(const HmmConfig& cfg) {
    const i64 d = cfg.d, dp = cfg.d_prime;
    const i64 ld = ilog2(d), ldp = ilog2(dp);
    HmmBudget b;
    b.naive = 3 * ldp + 2 * (d / dp) * ld;
    b.amortized = (double)b.naive / (double)cfg.m;
    const auto units = block_units(d, dp);
    const auto& f = cfg.replication.factors;
    b.expected = 3 * ldp + replication_rotations(d, f, units, false) +
                 replication_rotations(d, f, units, cfg.slots() == d * d);
    if (cfg.replication.naive()) {
        b.closed_form = (double)b.naive;
    } else {
        const double d0 = (double)cfg.replication.d0();
        const double ld0 = std::log2(d0);
        b.closed_form = dp > 1 ? 4.0 * d / d0 - 2.0 * dp + 2.0 * d * ld0 / dp + 3.0 * ldp
                               : 3.0 * d / d0 + 2.0 * d * ld0;
        const i64 d0i = cfg.replication.d0();
        b.row_closed = d / d0i + d * ilog2(d0i);
        b.col_closed = 2 * d / d0i + d * ilog2(d0i);
        std::vector<i64> all(d);
        for (i64 k = 0; k < d; ++k) all[k] = k;
        b.row_expected = replication_rotations(d, f, all, true);
        b.col_expected = replication_rotations(d, f, all, false);
    }
    return b;
}

Replication parse_replication(const std::string& s, i64 d) {
    Replication r;
    if (s.empty() || s == "naive") return r;
    if (s.rfind("d0=", 0) != 0) throw Error(Err::Arg, "replication must be 'naive' or 'd0=<k>[,...]'");
    std::stringstream ss(s.substr(3));
    std::string tok;
    std::vector<i64> low;  // d_0, d_1, ...
    i64 prod = 1;
    while (std::getline(ss, tok, ',')) {
        i64 f = 0;
        try {
            f = std::stoll(tok);
        } catch (...) {
            throw Error(Err::Arg, "bad replication factor '" + tok + "'");
        }
        if (f < 1) throw Error(Err::Arg, "replication factors must be positive");
        low.push_back(f);
        prod *= f;
    }
    if (low.empty() || prod < 1 || d % prod) throw Error(Err::Arg, "replication factors must divide d");
    if (prod < d || low.size() == 1) low.push_back(d / prod);
    r.factors.assign(low.rbegin(), low.rend());
    return r;
}

}  // namespace hperm
