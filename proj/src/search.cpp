#include "search.hpp"

#include <algorithm>
#include <climits>
#include <set>

namespace hperm {

namespace {

constexpr i64 kNone = INT64_MIN;

i64 ceil_div(i64 a, i64 b) { return (a + b - 1) / b; }

// offset of the entry in row l on stored diagonal key, picked inside [lo, hi] when possible
i64 entry_offset(i64 key, i64 l, i64 n, i64 lo, i64 hi) {
    i64 lit = pmod(l + key, n) - l;
    if (lit >= lo && lit <= hi) return lit;
    i64 alt = lit > 0 ? lit - n : lit + n;
    if (alt >= lo && alt <= hi) return alt;
    return lit;
}

class Depth1Search {
public:
    Depth1Search(const DiagMatrix& U, i64 ulo, i64 uhi, i64 rc, i64 lo, i64 hi, bool asym,
                 const std::function<bool(const Factorization&)>& cb)
        : U_(U), n_(U.n), ulo_(ulo), uhi_(uhi), rc_(rc), lo_(lo), hi_(hi), asym_(asym), cb_(cb),
          mpos_(U.n, kNone), mneg_(U.n, kNone), mzero_(U.n, kNone) {}

    bool run() {
        // Step 1: route entries, increasing diagonal then increasing row
        std::vector<std::pair<i64, i64>> entries;  // (k, l)
        for (const auto& [key, d] : U_.diags)
            for (const auto& [l, v] : d) entries.push_back({entry_offset(key, l, n_, ulo_, uhi_), l});
        std::sort(entries.begin(), entries.end());
        for (auto [k, l] : entries) {
            // boundary entries that the left factor could absorb stay on diagonal 0
            if (k >= rc_ && rc_ > 0 && k > hi_) {
                i64 row = convert_r(k, l, rc_, n_);
                if (mneg_[row] != kNone || !in_bound(k - rc_)) return false;
                mpos_[row] = k;
            } else if (!asym_ && k <= -rc_ && rc_ > 0 && k < lo_) {
                i64 row = convert_r(k, l, -rc_, n_);
                if (mpos_[row] != kNone || !in_bound(k + rc_)) return false;
                mneg_[row] = k;
            } else {
                mzero_[convert_r(k, l, 0, n_)] = k;
            }
        }
        // Step 2: conflicting rows in increasing order
        for (i64 a = 0; a < n_; ++a)
            if (conflict(a)) q_.push_back(a);
        if (q_.empty()) return finish();
        return check_row(q_[0], 0);
    }

private:
    bool in_bound(i64 kl) const { return kl >= lo_ && kl <= hi_; }

    bool conflict(i64 a) const {
        if (mzero_[a] == kNone) return false;
        return mpos_[a] != kNone || mneg_[a] != kNone || !in_bound(mzero_[a]);
    }

    bool finish() {
        Factorization f{DiagMatrix(n_), DiagMatrix(n_)};
        auto put = [&](const std::vector<i64>& m, i64 kR) {
            for (i64 row = 0; row < n_; ++row) {
                if (m[row] == kNone) continue;
                i64 k = m[row];
                i64 col = pmod(row + kR, n_);
                i64 l = pmod(col - k, n_);
                f.R.set(row, col, 1);
                f.L.set(l, row, 1);
            }
        };
        put(mzero_, 0);
        put(mpos_, rc_);
        put(mneg_, -rc_);
        return cb_(f);
    }

    bool check_row(i64 a, size_t i) {
        if (!conflict(a)) {
            // row is clean; move on to the next row of Q that still conflicts
            for (;;) {
                if (++i >= q_.size()) return finish();
                a = q_[i];
                if (conflict(a)) break;
            }
        }
        const i64 b = mzero_[a];
        mzero_[a] = kNone;
        bool solved = false;
        i64 ah = pmod(a - rc_, n_);
        if (in_bound(b - rc_) && mneg_[ah] == kNone && mpos_[ah] == kNone) {
            mpos_[ah] = b;
            solved = check_row(ah, i);
            if (!solved) mpos_[ah] = kNone;
        }
        if (!solved && !asym_) {
            ah = pmod(a + rc_, n_);
            if (in_bound(b + rc_) && mpos_[ah] == kNone && mneg_[ah] == kNone) {
                mneg_[ah] = b;
                solved = check_row(ah, i);
                if (!solved) mneg_[ah] = kNone;
            }
        }
        if (!solved) mzero_[a] = b;
        return solved;
    }

    const DiagMatrix& U_;
    i64 n_, ulo_, uhi_, rc_, lo_, hi_;
    bool asym_;
    const std::function<bool(const Factorization&)>& cb_;
    std::vector<i64> mpos_, mneg_, mzero_;
    std::vector<i64> q_;
};

void check_params(const DiagMatrix& U, const SearchParams& p) {
    if (!U.is_permutation()) throw Error(Err::Arg, "search requires a permutation matrix");
    if (p.a < 1 || p.r < 0) throw Error(Err::Arg, "malformed search parameters");
    i64 lo = p.asymmetric ? 0 : -p.r;
    for (const auto& [key, d] : U.diags)
        for (const auto& [l, v] : d) {
            i64 k = entry_offset(key, l, U.n, lo, p.r);
            if (k % p.a != 0 || k < lo || k > p.r)
                throw Error(Err::Arg, "diagonal offset " + std::to_string(k) + " outside the declared range");
        }
}

}  // namespace

SearchParams diag_profile(const DiagMatrix& U) {
    // literal offsets col-row versus offsets reduced into (-n/2, n/2]; keep the smaller r/a
    i64 a_lit = 0, r_lit = 0, a_mod = 0, r_mod = 0;
    for (const auto& [key, d] : U.diags) {
        i64 s = smod(key, U.n);
        a_mod = gcd64(a_mod, s);
        r_mod = std::max(r_mod, s < 0 ? -s : s);
        for (const auto& [l, v] : d) {
            i64 lit = pmod(l + key, U.n) - l;
            a_lit = gcd64(a_lit, lit);
            r_lit = std::max(r_lit, lit < 0 ? -lit : lit);
        }
    }
    SearchParams p;
    p.n = U.n;
    if (a_lit == 0) a_lit = 1;
    if (a_mod == 0) a_mod = 1;
    bool lit = r_lit / a_lit < r_mod / a_mod || (r_lit / a_lit == r_mod / a_mod && r_lit <= r_mod);
    i64 a = lit ? a_lit : a_mod;
    p.a = a == 0 ? 1 : a;
    p.r = lit ? r_lit : r_mod;
    return p;
}

i64 rc_at(const SearchParams& p, int i) {
    i64 m = p.r / p.a;
    return p.a * ceil_div(m, i64(1) << i);
}

namespace detail {
bool search_step(const DiagMatrix& U, i64 ulo, i64 uhi, i64 rc, i64 lo, i64 hi, bool asymmetric,
                 const std::function<bool(const Factorization&)>& on_solution) {
    Depth1Search s(U, ulo, uhi, rc, lo, hi, asymmetric, on_solution);
    return s.run();
}
}  // namespace detail

static void bounds_for(const SearchParams& p, i64 rc, i64& lo, i64& hi) {
    i64 rp = p.r - rc;
    lo = p.asymmetric ? 0 : -rp;
    hi = rp;
}

std::optional<Factorization> search_depth1(const DiagMatrix& U, const SearchParams& p) {
    check_params(U, p);
    i64 rc = rc_at(p, 1), lo, hi;
    bounds_for(p, rc, lo, hi);
    std::optional<Factorization> out;
    detail::search_step(U, p.asymmetric ? 0 : -p.r, p.r, rc, lo, hi, p.asymmetric, [&](const Factorization& f) {
        out = f;
        return true;
    });
    return out;
}

std::vector<Factorization> enumerate_depth1(const DiagMatrix& U, const SearchParams& p,
                                            size_t limit) {
    check_params(U, p);
    i64 rc = rc_at(p, 1), lo, hi;
    bounds_for(p, rc, lo, hi);
    std::vector<Factorization> out;
    std::set<std::vector<i64>> seen;
    detail::search_step(U, p.asymmetric ? 0 : -p.r, p.r, rc, lo, hi, p.asymmetric, [&](const Factorization& f) {
        if (seen.insert(f.R.to_perm().targets).second) out.push_back(f);
        return out.size() >= limit;
    });
    return out;
}

namespace {

struct DepthDfs {
    SearchParams p;
    int cap = 0;
    int best = -1;
    DiagMatrix best_L;
    std::vector<DiagMatrix> best_rs;  // R_1 first
    std::set<std::pair<int, std::vector<i64>>> dead;

    // returns true when the cap has been reached
    bool go(const DiagMatrix& L, int done, i64 r_cur, std::vector<DiagMatrix>& rs) {
        if (done > best) {
            best = done;
            best_L = L;
            best_rs = rs;
        }
        if (best >= cap) return true;
        int i = done + 1;
        i64 rc = rc_at(p, i);
        i64 rp = r_cur - rc;
        if (rp < 0 || r_cur < p.a) return false;
        auto key = std::make_pair(done, L.to_perm().targets);
        if (dead.count(key)) return false;
        i64 lo = p.asymmetric ? 0 : -rp, hi = rp;
        i64 ulo = p.asymmetric ? 0 : -r_cur;
        bool stop = detail::search_step(L, ulo, r_cur, rc, lo, hi, p.asymmetric, [&](const Factorization& f) {
            rs.push_back(f.R);
            bool s = go(f.L, i, rp, rs);
            rs.pop_back();
            return s;
        });
        if (!stop) dead.insert(key);
        return stop;
    }
};

}  // namespace

MaxDepthResult max_ideal_depth(const DiagMatrix& U) { return max_ideal_depth(U, diag_profile(U)); }

MaxDepthResult max_ideal_depth(const DiagMatrix& U, const SearchParams& p) {
    check_params(U, p);
    DepthDfs dfs;
    dfs.p = p;
    i64 m = p.r / p.a;
    dfs.cap = m >= 1 ? ilog2(m) : 0;
    std::vector<DiagMatrix> rs;
    dfs.go(U, 0, p.r, rs);
    MaxDepthResult res;
    res.depth = dfs.best;
    res.chain.n = U.n;
    res.chain.depth = dfs.best;
    res.chain.factors.push_back({dfs.best_L, Strategy::Bsgs, 0});
    for (auto it = dfs.best_rs.rbegin(); it != dfs.best_rs.rend(); ++it)
        res.chain.factors.push_back({*it, Strategy::Direct, 0});
    return res;
}

ValidationReport validate_ideal_chain(const DiagMatrix& U, const DecompositionChain& chain,
                                      const SearchParams& p) {
    ValidationReport rep;
    const int l = (int)chain.factors.size() - 1;
    if (l < 0) {
        rep.detail = "empty chain";
        return rep;
    }
    bool perms = true;
    for (const auto& f : chain.factors) perms = perms && f.m.is_permutation();
    rep.product = perms && chain.product() == U;
    if (!rep.product) rep.detail += "product differs from U; ";

    rep.right_factors = true;
    i64 used = 0;
    for (int i = 1; i <= l; ++i) {
        const DiagMatrix& R = chain.factors[l - i + 1].m;
        i64 rc = rc_at(p, i);
        used += rc;
        for (i64 key : R.keys()) {
            i64 s = smod(key, U.n);
            bool okk = key == 0 || key == pmod(rc, U.n) || (!p.asymmetric && key == pmod(-rc, U.n));
            if (!okk) {
                rep.right_factors = false;
                rep.detail += "R_" + std::to_string(i) + " has diagonal " + std::to_string(s) + "; ";
                break;
            }
        }
    }
    i64 rp = p.r - used;
    rep.left_bound = true;
    const i64 lo = p.asymmetric ? 0 : -rp;
    for (i64 key : chain.factors[0].m.keys()) {
        i64 s = key;
        bool okk = (key >= lo && key <= rp) || (key - U.n >= lo && key - U.n <= rp);
        if (!okk) {
            rep.left_bound = false;
            rep.detail += "U_L diagonal " + std::to_string(s) + " exceeds r'=" + std::to_string(rp) + "; ";
            break;
        }
    }
    return rep;
}

i64 oracle_depth1_count(const DiagMatrix& U, i64 ulo, i64 uhi, i64 rc, i64 lo, i64 hi, bool asymmetric,
                        i64 limit) {
    const i64 n = U.n;
    Permutation pu = U.to_perm();  // pu.targets[col] = row of U's entry in that column
    std::vector<char> used(n, 0);
    std::vector<i64> kr_opts = {0};
    if (rc > 0) {
        kr_opts.push_back(rc);
        if (!asymmetric) kr_opts.push_back(-rc);
    }
    i64 count = 0;
    // columns in order; each picks its right-factor row
    std::function<void(i64)> rec = [&](i64 c) {
        if (count >= limit) return;
        if (c == n) {
            ++count;
            return;
        }
        i64 l = pu.targets[c];
        i64 k = entry_offset(pmod(c - l, n), l, n, ulo, uhi);
        i64 tried[3];
        int ntried = 0;
        for (i64 kr : kr_opts) {
            i64 kl = k - kr;
            if (kl < lo || kl > hi) continue;
            i64 row = pmod(c - kr, n);
            // +rc and -rc name the same row when 2rc = n
            if (used[row] || std::find(tried, tried + ntried, row) != tried + ntried) continue;
            tried[ntried++] = row;
            used[row] = 1;
            rec(c + 1);
            used[row] = 0;
        }
    };
    rec(0);
    return count;
}

}  // namespace hperm
