#include "core.hpp"

#include <algorithm>
#include <numeric>

namespace hperm {

// ---- permutations ----------------------------------------------------------

Permutation::Permutation(std::vector<i64> t) : targets(std::move(t)) {}

Permutation Permutation::identity(i64 n) {
    std::vector<i64> t(n);
    std::iota(t.begin(), t.end(), 0);
    return Permutation(std::move(t));
}

Permutation Permutation::rotation(i64 n, i64 k) {
    // Rot(x,k)[i] = x[i+k], so entry i lands at i-k
    std::vector<i64> t(n);
    for (i64 i = 0; i < n; ++i) t[i] = pmod(i - k, n);
    return Permutation(std::move(t));
}

bool Permutation::valid() const {
    i64 n = size();
    if (n == 0) return false;
    std::vector<char> seen(n, 0);
    for (i64 t : targets) {
        if (t < 0 || t >= n || seen[t]) return false;
        seen[t] = 1;
    }
    return true;
}

Permutation Permutation::inverse() const {
    std::vector<i64> inv(size());
    for (i64 i = 0; i < size(); ++i) inv[targets[i]] = i;
    return Permutation(std::move(inv));
}

Permutation Permutation::after(const Permutation& q) const {
    std::vector<i64> t(size());
    for (i64 i = 0; i < size(); ++i) t[i] = targets[q.targets[i]];
    return Permutation(std::move(t));
}

Vec Permutation::apply(const Vec& v) const {
    if ((i64)v.size() != size()) throw Error(Err::Dim, "permutation/vector length mismatch");
    Vec out(v.size());
    for (i64 i = 0; i < size(); ++i) out[targets[i]] = v[i];
    return out;
}

// ---- ledger ----------------------------------------------------------------

namespace {
thread_local Ledger* g_ledger = nullptr;
thread_local int g_tag = 0;
}  // namespace

std::set<i64> Ledger::keys() const {
    std::set<i64> s;
    for (const auto& r : rotations) s.insert(r.step);
    return s;
}

std::map<int, i64> Ledger::rotations_by_tag() const {
    std::map<int, i64> m;
    for (const auto& r : rotations) m[r.tag]++;
    return m;
}

LedgerScope::LedgerScope(Ledger& l) : prev_(g_ledger) { g_ledger = &l; }
LedgerScope::~LedgerScope() { g_ledger = prev_; }
TagScope::TagScope(int tag) : prev_(g_tag) { g_tag = tag; }
TagScope::~TagScope() { g_tag = prev_; }
Ledger* active_ledger() { return g_ledger; }
int active_tag() { return g_tag; }

// ---- slot ops --------------------------------------------------------------

Vec rot_plain(const Vec& v, i64 k) {
    i64 n = (i64)v.size();
    if (n == 0) return v;
    k = pmod(k, n);
    if (k == 0) return v;
    Vec out(n);
    std::rotate_copy(v.begin(), v.begin() + k, v.end(), out.begin());
    return out;
}

static void record_rotation(i64 k, i64 n, int level, bool merged) {
    if (!g_ledger) return;
    g_ledger->rotations.push_back({pmod(k, n), smod(k, n), level, merged, g_tag});
}

SlotVector rotate(const SlotVector& v, i64 k) {
    SlotVector out(rot_plain(v.slots, k), v.level);
    out.depth_used = v.depth_used;
    record_rotation(k, v.size(), v.level, false);
    return out;
}

SlotVector rotate_rescale(const SlotVector& v, i64 k) {
    if (v.level < 1) throw Error(Err::Depth, "rescale at level 0: modulus chain exhausted");
    SlotVector out(rot_plain(v.slots, k), v.level - 1);
    out.depth_used = v.depth_used + 1;
    record_rotation(k, v.size(), v.level, true);
    return out;
}

SlotVector cmult(const SlotVector& v, const Vec& mask) {
    if (mask.size() != v.slots.size()) throw Error(Err::Dim, "mask length mismatch");
    SlotVector out = v;
    for (size_t i = 0; i < mask.size(); ++i) out.slots[i] *= mask[i];
    if (g_ledger) {
        g_ledger->cmults++;
        g_ledger->cmult_levels.push_back(v.level);
    }
    return out;
}

SlotVector mult(const SlotVector& a, const SlotVector& b) {
    if (a.size() != b.size()) throw Error(Err::Dim, "length mismatch");
    SlotVector out = a;
    for (size_t i = 0; i < a.slots.size(); ++i) out.slots[i] = a.slots[i] * b.slots[i];
    out.level = std::min(a.level, b.level);
    out.depth_used = std::max(a.depth_used, b.depth_used);
    if (g_ledger) g_ledger->mults++;
    return out;
}

SlotVector add(const SlotVector& a, const SlotVector& b) {
    if (a.size() != b.size()) throw Error(Err::Dim, "length mismatch");
    SlotVector out = a;
    for (size_t i = 0; i < a.slots.size(); ++i) out.slots[i] += b.slots[i];
    out.level = std::min(a.level, b.level);
    out.depth_used = std::max(a.depth_used, b.depth_used);
    if (g_ledger) g_ledger->adds++;
    return out;
}

SlotVector rescale(const SlotVector& v) {
    if (v.level < 1) throw Error(Err::Depth, "rescale at level 0: modulus chain exhausted");
    SlotVector out = v;
    out.level--;
    out.depth_used++;
    if (g_ledger) {
        g_ledger->rescales++;
        g_ledger->rescale_levels.push_back(v.level);
    }
    return out;
}

// ---- DiagMatrix ------------------------------------------------------------

DiagMatrix DiagMatrix::identity(i64 n) {
    DiagMatrix m(n);
    for (i64 i = 0; i < n; ++i) m.diags[0][i] = 1;
    return m;
}

DiagMatrix DiagMatrix::from_perm(const Permutation& p) {
    DiagMatrix m(p.size());
    for (i64 i = 0; i < p.size(); ++i) m.set(p.targets[i], i, 1);
    return m;
}

DiagMatrix perm_to_diag(const Permutation& p) {
    if (!p.valid()) throw Error(Err::Arg, "not a permutation");
    return DiagMatrix::from_perm(p);
}

void DiagMatrix::set(i64 row, i64 col, i64 val) {
    i64 k = pmod(col - row, n);
    if (val == 0) {
        auto it = diags.find(k);
        if (it == diags.end()) return;
        it->second.erase(row);
        if (it->second.empty()) diags.erase(it);
        return;
    }
    diags[k][row] = val;
}

i64 DiagMatrix::get(i64 row, i64 col) const {
    auto it = diags.find(pmod(col - row, n));
    if (it == diags.end()) return 0;
    auto jt = it->second.find(row);
    return jt == it->second.end() ? 0 : jt->second;
}

std::vector<i64> DiagMatrix::keys() const {
    std::vector<i64> k;
    for (const auto& [key, _] : diags) k.push_back(key);
    return k;
}

std::vector<i64> DiagMatrix::signed_keys() const {
    std::vector<i64> k;
    for (const auto& [key, _] : diags) k.push_back(smod(key, n));
    std::sort(k.begin(), k.end());
    return k;
}

i64 DiagMatrix::nnz() const {
    i64 c = 0;
    for (const auto& [_, d] : diags) c += (i64)d.size();
    return c;
}

bool DiagMatrix::is_permutation() const {
    std::vector<char> row(n, 0), col(n, 0);
    i64 cnt = 0;
    for (const auto& [k, d] : diags) {
        for (const auto& [l, v] : d) {
            if (v != 1) return false;
            i64 c = pmod(l + k, n);
            if (row[l] || col[c]) return false;
            row[l] = col[c] = 1;
            ++cnt;
        }
    }
    return cnt == n;
}

Permutation DiagMatrix::to_perm() const {
    if (!is_permutation()) throw Error(Err::Arg, "matrix is not a permutation");
    std::vector<i64> t(n);
    for (const auto& [k, d] : diags)
        for (const auto& [l, v] : d) t[pmod(l + k, n)] = l;
    return Permutation(std::move(t));
}

Vec DiagMatrix::diagonal(i64 k) const {
    Vec u(n, 0);
    auto it = diags.find(pmod(k, n));
    if (it != diags.end())
        for (const auto& [l, v] : it->second) u[l] = v;
    return u;
}

bool DiagMatrix::all_ones() const {
    if (diags.empty()) return false;
    for (const auto& [_, d] : diags) {
        if ((i64)d.size() != n) return false;
        for (const auto& [l, v] : d)
            if (v != 1) return false;
    }
    return true;
}

DiagMatrix DiagMatrix::operator*(const DiagMatrix& rhs) const {
    if (n != rhs.n) throw Error(Err::Dim, "dimension mismatch in product");
    // row-sparse form of rhs
    std::vector<std::vector<std::pair<i64, i64>>> rrows(n);
    for (const auto& [k, d] : rhs.diags)
        for (const auto& [l, v] : d) rrows[l].push_back({pmod(l + k, n), v});
    std::vector<std::map<i64, i64>> acc(n);
    for (const auto& [k, d] : diags)
        for (const auto& [l, v] : d) {
            i64 m = pmod(l + k, n);
            for (const auto& [c, w] : rrows[m]) acc[l][c] += v * w;
        }
    DiagMatrix out(n);
    for (i64 l = 0; l < n; ++l)
        for (const auto& [c, v] : acc[l])
            if (v != 0) out.diags[pmod(c - l, n)][l] = v;
    return out;
}

Vec DiagMatrix::apply_plain(const Vec& v) const {
    Vec out(n, 0);
    for (const auto& [k, d] : diags)
        for (const auto& [l, val] : d) out[l] += val * v[pmod(l + k, n)];
    return out;
}

i64 convert_r(i64 k, i64 l, i64 kR, i64 n) { return pmod(k + l - kR, n); }

// ---- HLT -------------------------------------------------------------------

SlotVector apply_hlt_direct(const DiagMatrix& U, const SlotVector& v) {
    if (U.n != v.size()) throw Error(Err::Dim, "HLT dimension mismatch");
    const bool mask_free = U.all_ones();
    SlotVector acc(Vec(U.n, 0), v.level);
    acc.depth_used = v.depth_used;
    bool first = true;
    for (const auto& [k, d] : U.diags) {
        SlotVector r = k == 0 ? v : rotate(v, k);
        if (!mask_free) r = cmult(r, U.diagonal(k));
        acc = first ? r : add(acc, r);
        first = false;
    }
    if (!mask_free) acc = rescale(acc);
    return acc;
}

i64 BsgsPlan::rotation_count() const {
    std::set<i64> baby, giant;
    for (const auto& [gb, _] : blocks) {
        if (pmod(a * gb.second, n) != 0) baby.insert(gb.second);
        if (pmod(a * (i0 + n1 * gb.first), n) != 0) giant.insert(gb.first);
    }
    return (i64)(baby.size() + giant.size());
}

namespace {

i64 common_difference(const DiagMatrix& U) {
    i64 a = 0;
    for (i64 k : U.signed_keys()) a = gcd64(a, k);
    return a == 0 ? 1 : a;
}

struct Placement {
    i64 key;
    i64 t;
};

std::vector<Placement> place(const DiagMatrix& U, i64 a) {
    std::vector<Placement> out;
    for (i64 key : U.keys()) {
        i64 s = smod(key, U.n);
        if (s % a != 0) throw Error(Err::Arg, "diagonal not on the arithmetic sequence of the plan");
        out.push_back({key, s / a});
    }
    return out;
}

}  // namespace

BsgsPlan make_bsgs_plan(const DiagMatrix& U, i64 n1, i64 a) {
    if (n1 < 1) throw Error(Err::Arg, "n1 must be positive");
    BsgsPlan plan;
    plan.n = U.n;
    plan.a = a > 0 ? a : common_difference(U);
    plan.n1 = n1;
    auto pl = place(U, plan.a);
    if (pl.empty()) return plan;
    i64 tmin = pl[0].t, tmax = pl[0].t;
    for (const auto& p : pl) { tmin = std::min(tmin, p.t); tmax = std::max(tmax, p.t); }
    i64 q = tmin >= 0 ? tmin / n1 : -((-tmin + n1 - 1) / n1);
    plan.i0 = q * n1;
    plan.n2 = (tmax - plan.i0) / n1 + 1;
    for (const auto& p : pl) {
        i64 off = p.t - plan.i0;
        i64 g = off / n1, b = off % n1;
        i64 shift = plan.a * (plan.i0 + n1 * g);
        plan.blocks[{g, b}] = rot_plain(U.diagonal(p.key), -shift);
    }
    return plan;
}

BsgsPlan best_bsgs_plan(const DiagMatrix& U) {
    i64 a = common_difference(U);
    auto pl = place(U, a);
    if (pl.empty()) return make_bsgs_plan(U, 1, a);
    i64 tmin = pl[0].t, tmax = pl[0].t;
    for (const auto& p : pl) { tmin = std::min(tmin, p.t); tmax = std::max(tmax, p.t); }
    i64 span = tmax - tmin + 1;
    i64 best_n1 = 1, best = -1;
    for (i64 n1 = 1; n1 <= span; ++n1) {
        i64 q = tmin >= 0 ? tmin / n1 : -((-tmin + n1 - 1) / n1);
        i64 i0 = q * n1;
        std::set<i64> baby, giant;
        for (const auto& p : pl) {
            i64 off = p.t - i0;
            i64 g = off / n1, b = off % n1;
            if (pmod(a * b, U.n) != 0) baby.insert(b);
            if (pmod(a * (i0 + n1 * g), U.n) != 0) giant.insert(g);
        }
        i64 c = (i64)(baby.size() + giant.size());
        if (best < 0 || c < best) { best = c; best_n1 = n1; }
    }
    return make_bsgs_plan(U, best_n1, a);
}

SlotVector apply_hlt_bsgs(const DiagMatrix& U, const BsgsPlan& plan, const SlotVector& v) {
    return apply_hlt_bsgs(U, plan, v, [](const SlotVector& x, i64 k) { return rotate(x, k); });
}

SlotVector apply_hlt_bsgs(const DiagMatrix& U, const BsgsPlan& plan, const SlotVector& v, const RotateFn& rot) {
    if (U.n != v.size() || plan.n != U.n) throw Error(Err::Dim, "BSGS dimension mismatch");
    i64 covered = 0;
    for (const auto& [gb, _] : plan.blocks) (void)gb, ++covered;
    if (covered != (i64)U.diags.size()) throw Error(Err::Arg, "plan does not cover every diagonal");
    std::map<i64, SlotVector> baby;
    auto baby_rot = [&](i64 b) -> const SlotVector& {
        auto it = baby.find(b);
        if (it != baby.end()) return it->second;
        i64 s = plan.a * b;
        return baby.emplace(b, pmod(s, v.size()) == 0 ? v : rot(v, s)).first->second;
    };
    SlotVector out(Vec(v.size(), 0), v.level);
    out.depth_used = v.depth_used;
    bool first_out = true;
    auto it = plan.blocks.begin();
    while (it != plan.blocks.end()) {
        i64 g = it->first.first;
        SlotVector inner;
        bool first = true;
        for (; it != plan.blocks.end() && it->first.first == g; ++it) {
            SlotVector t = cmult(baby_rot(it->first.second), it->second);
            inner = first ? t : add(inner, t);
            first = false;
        }
        i64 shift = plan.a * (plan.i0 + plan.n1 * g);
        if (pmod(shift, v.size()) != 0) inner = rot(inner, shift);
        out = first_out ? inner : add(out, inner);
        first_out = false;
    }
    return plan.blocks.empty() ? out : rescale(out);
}

// ---- chains ----------------------------------------------------------------

DiagMatrix DecompositionChain::product() const {
    if (factors.empty()) return DiagMatrix::identity(n);
    DiagMatrix p = factors[0].m;
    for (size_t i = 1; i < factors.size(); ++i) p = p * factors[i].m;
    return p;
}

SlotVector DecompositionChain::apply(const SlotVector& v) const {
    SlotVector x = v;
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
        if (it->strategy == Strategy::Bsgs) {
            BsgsPlan plan = it->n1 > 0 ? make_bsgs_plan(it->m, it->n1) : best_bsgs_plan(it->m);
            x = apply_hlt_bsgs(it->m, plan, x);
        } else {
            x = apply_hlt_direct(it->m, x);
        }
    }
    if (!final_mask.empty()) x = rescale(cmult(x, final_mask));
    return x;
}

}  // namespace hperm
