#include "benes.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>

namespace hperm {

i64 RotationKeys::cost(i64 step) const {
    step = pmod(step, n);
    if (step == 0) return 0;
    if (unrestricted()) return 1;
    auto it = paths.find(step);
    return it == paths.end() ? -1 : (i64)it->second.size();
}

SlotVector RotationKeys::rotate(const SlotVector& v, i64 step) const {
    step = pmod(step, n);
    if (step == 0) return v;
    if (unrestricted()) return hperm::rotate(v, step);
    auto it = paths.find(step);
    if (it == paths.end()) throw Error(Err::NotFound, "rotation step not reachable from the key set");
    SlotVector x = v;
    for (i64 k : it->second) x = hperm::rotate(x, k);
    return x;
}

namespace {

// BFS over Z_n; parent pointers give one shortest key sequence per residue.
std::vector<int> bfs_dist(i64 n, const std::vector<i64>& keys, std::vector<i64>* via = nullptr) {
    std::vector<int> dist(n, -1);
    if (via) via->assign(n, -1);
    std::deque<i64> q;
    dist[0] = 0;
    q.push_back(0);
    while (!q.empty()) {
        i64 x = q.front();
        q.pop_front();
        for (i64 k : keys) {
            i64 y = pmod(x + k, n);
            if (dist[y] >= 0) continue;
            dist[y] = dist[x] + 1;
            if (via) (*via)[y] = k;
            q.push_back(y);
        }
    }
    return dist;
}

}  // namespace

RotationKeys make_keys(i64 n, const std::vector<i64>& keys) {
    RotationKeys rk;
    rk.n = n;
    std::set<i64> ks;
    for (i64 k : keys)
        if (pmod(k, n) != 0) ks.insert(pmod(k, n));
    rk.keys.assign(ks.begin(), ks.end());
    if (rk.keys.empty()) return rk;
    std::vector<i64> via;
    auto dist = bfs_dist(n, rk.keys, &via);
    for (i64 s = 1; s < n; ++s) {
        if (dist[s] < 0) continue;
        std::vector<i64> path;
        for (i64 x = s; x != 0; x = pmod(x - via[x], n)) path.push_back(via[x]);
        std::reverse(path.begin(), path.end());
        rk.paths.emplace(s, std::move(path));
    }
    return rk;
}

DiagMatrix BenesChain::factor_matrix(size_t i) const { return perm_to_diag(factors.at(i)); }

Permutation BenesChain::product() const {
    Permutation p = Permutation::identity(n);
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) p = it->after(p);
    return p;
}

DecompositionChain BenesChain::to_chain() const {
    DecompositionChain c;
    c.n = n;
    c.depth = depth();
    for (size_t i = 0; i < factors.size(); ++i) c.factors.push_back({factor_matrix(i), Strategy::Bsgs, 0});
    return c;
}

namespace {

struct Router {
    i64 n;
    int rounds;
    std::vector<std::vector<i64>> first, last;  // per round, targets
    std::vector<i64> middle;

    // pi: local input index -> local output index within [base, base + size)
    void route(i64 base, const std::vector<i64>& pi, int round) {
        const i64 s = (i64)pi.size();
        if (s == 1) return;
        if (s == 2) {
            for (i64 a = 0; a < 2; ++a) middle[base + a] = base + pi[a];
            return;
        }
        const i64 h = s / 2;
        std::vector<i64> inv(s);
        for (i64 a = 0; a < s; ++a) inv[pi[a]] = a;
        auto mate = [h](i64 x) { return x < h ? x + h : x - h; };
        std::vector<int> color(s, -1);
        for (i64 a0 = 0; a0 < h; ++a0) {
            if (color[a0] >= 0) continue;
            i64 a = a0;
            while (true) {
                color[a] = 0;
                i64 partner = mate(a);
                color[partner] = 1;
                i64 b = inv[mate(pi[partner])];
                if (color[b] >= 0) {
                    if (color[b] != 0) throw Error(Err::Internal, "Benes looping produced an inconsistent coloring");
                    break;
                }
                a = b;
            }
        }
        std::vector<i64> up(h), low(h);
        for (i64 a = 0; a < s; ++a) {
            first[round][base + a] = base + a % h + color[a] * h;
            (color[a] ? low : up)[a % h] = pi[a] % h;
        }
        for (i64 o = 0; o < s; ++o) {
            i64 c = color[inv[o]];
            last[round][base + o % h + c * h] = base + o;
        }
        route(base, up, round + 1);
        route(base + h, low, round + 1);
    }
};

std::vector<i64> iota_vec(i64 n) {
    std::vector<i64> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

}  // namespace

BenesChain benes_decompose(const Permutation& p) {
    if (!p.valid()) throw Error(Err::Arg, "not a permutation");
    const i64 n = p.size();
    if (!is_pow2(n)) throw Error(Err::Dim, "Benes decomposition needs a power-of-two length");
    BenesChain chain;
    chain.n = n;
    chain.keys.n = n;
    if (n == 1) return chain;
    const int k = ilog2(n);
    Router r{n, k, {}, {}, iota_vec(n)};
    r.first.assign(k - 1, iota_vec(n));
    r.last.assign(k - 1, iota_vec(n));
    r.route(0, p.targets, 0);
    for (int i = 0; i + 1 < k; ++i) {
        chain.factors.emplace_back(r.last[i]);
        chain.distances.push_back({n >> (i + 1)});
    }
    chain.factors.emplace_back(r.middle);
    chain.distances.push_back({1});
    for (int i = k - 2; i >= 0; --i) {
        chain.factors.emplace_back(r.first[i]);
        chain.distances.push_back({n >> (i + 1)});
    }
    for (size_t i = 0; i < chain.factors.size(); ++i) chain.members.push_back({(int)i});
    return chain;
}

namespace {

i64 plan_rotations(const DiagMatrix& D, const RotationKeys& keys) {
    BsgsPlan plan = best_bsgs_plan(D);
    std::set<i64> steps;
    for (const auto& [gb, _] : plan.blocks) {
        steps.insert(pmod(plan.a * gb.second, D.n));
        steps.insert(pmod(plan.a * (plan.i0 + plan.n1 * gb.first), D.n));
    }
    i64 c = 0;
    for (i64 s : steps) {
        i64 k = keys.cost(s);
        if (k < 0) return -1;
        c += k;
    }
    return c;
}

constexpr int kMaxGroup = 4;

}  // namespace

BenesChain collapse_benes(const BenesChain& chain, int target_depth) {
    if (target_depth < 1) throw Error(Err::Arg, "target depth must be at least 1");
    const int F = chain.depth();
    if (target_depth >= F) return chain;
    if ((i64)target_depth * kMaxGroup < F) throw Error(Err::Arg, "target depth too small for adjacent grouping");
    // cost[i][len]: rotations of the product of factors i .. i+len-1
    const i64 INF = std::numeric_limits<i64>::max() / 4;
    std::vector<std::vector<i64>> cost(F, std::vector<i64>(kMaxGroup + 1, INF));
    std::vector<std::vector<Permutation>> prod(F, std::vector<Permutation>(kMaxGroup + 1));
    RotationKeys free_keys;
    free_keys.n = chain.n;
    for (int i = 0; i < F; ++i) {
        Permutation acc = chain.factors[i];
        for (int len = 1; len <= kMaxGroup && i + len <= F; ++len) {
            if (len > 1) acc = acc.after(chain.factors[i + len - 1]);
            prod[i][len] = acc;
            cost[i][len] = plan_rotations(perm_to_diag(acc), free_keys);
        }
    }
    // best[j][t]: first j factors in t groups
    std::vector<std::vector<i64>> best(F + 1, std::vector<i64>(target_depth + 1, INF));
    std::vector<std::vector<int>> choice(F + 1, std::vector<int>(target_depth + 1, 0));
    best[0][0] = 0;
    for (int j = 1; j <= F; ++j)
        for (int t = 1; t <= target_depth; ++t)
            for (int len = 1; len <= kMaxGroup && len <= j; ++len) {
                i64 prev = best[j - len][t - 1];
                if (prev >= INF || cost[j - len][len] >= INF) continue;
                i64 c = prev + cost[j - len][len];
                if (c < best[j][t]) {  // strict: ties keep the shorter last group
                    best[j][t] = c;
                    choice[j][t] = len;
                }
            }
    if (best[F][target_depth] >= INF) throw Error(Err::Internal, "no grouping reaches the target depth");
    std::vector<int> lens;
    for (int j = F, t = target_depth; t > 0; --t) {
        lens.push_back(choice[j][t]);
        j -= choice[j][t];
    }
    std::reverse(lens.begin(), lens.end());
    BenesChain out;
    out.n = chain.n;
    out.keys = chain.keys;
    int i = 0;
    for (int len : lens) {
        out.factors.push_back(prod[i][len]);
        std::vector<i64> d;
        std::vector<int> m;
        for (int q = i; q < i + len; ++q) {
            d.insert(d.end(), chain.distances[q].begin(), chain.distances[q].end());
            m.insert(m.end(), chain.members[q].begin(), chain.members[q].end());
        }
        out.distances.push_back(d);
        out.members.push_back(m);
        i += len;
    }
    return out;
}

BenesChain restrict_keys(const BenesChain& chain, i64 budget) {
    if (budget < 1) throw Error(Err::Arg, "key budget must be positive");
    const i64 n = chain.n;
    std::map<i64, i64> demand;  // step -> number of factors using it
    for (size_t i = 0; i < chain.factors.size(); ++i) {
        DiagMatrix D = chain.factor_matrix(i);
        BsgsPlan plan = best_bsgs_plan(D);
        std::set<i64> steps;
        for (const auto& [gb, _] : plan.blocks) {
            i64 b = pmod(plan.a * gb.second, n), g = pmod(plan.a * (plan.i0 + plan.n1 * gb.first), n);
            if (b) steps.insert(b);
            if (g) steps.insert(g);
        }
        for (i64 s : steps) demand[s]++;
    }
    BenesChain out = chain;
    if ((i64)demand.size() <= budget) {
        std::vector<i64> ks;
        for (auto& [s, _] : demand) ks.push_back(s);
        out.keys = make_keys(n, ks);
        return out;
    }
    std::set<i64> cand;
    for (auto& [s, _] : demand) cand.insert(s);
    for (i64 p = 1; p < n; p <<= 1) {
        cand.insert(p);
        cand.insert(n - p);
    }
    const i64 unreachable = n;  // penalty per missing step
    auto total = [&](const std::vector<i64>& ks) {
        auto dist = bfs_dist(n, ks);
        i64 c = 0;
        for (auto& [s, w] : demand) c += w * (dist[s] < 0 ? unreachable : dist[s]);
        return c;
    };
    std::vector<i64> chosen;
    while ((i64)chosen.size() < budget) {
        i64 best_c = -1, best_k = 0;
        for (i64 k : cand) {
            if (std::find(chosen.begin(), chosen.end(), k) != chosen.end()) continue;
            auto trial = chosen;
            trial.push_back(k);
            i64 c = total(trial);
            if (best_c < 0 || c < best_c) {
                best_c = c;
                best_k = k;
            }
        }
        if (best_c < 0) break;
        chosen.push_back(best_k);
    }
    out.keys = make_keys(n, chosen);
    for (auto& [s, _] : demand)
        if (out.keys.cost(s) < 0) throw Error(Err::Internal, "key budget leaves a step unreachable");
    return out;
}

i64 factor_rotations(const BenesChain& chain, size_t i) {
    return plan_rotations(chain.factor_matrix(i), chain.keys);
}

SlotVector evaluate_benes(const BenesChain& chain, const SlotVector& v) {
    if (v.size() != chain.n) throw Error(Err::Dim, "input length does not match the chain");
    SlotVector x = v;
    int level = 1;
    for (auto it = chain.factors.rbegin(); it != chain.factors.rend(); ++it, ++level) {
        DiagMatrix D = perm_to_diag(*it);
        BsgsPlan plan = best_bsgs_plan(D);
        TagScope tag(level);
        x = apply_hlt_bsgs(D, plan, x, [&](const SlotVector& y, i64 k) { return chain.keys.rotate(y, k); });
    }
    return x;
}

BenesStats benes_stats(const BenesChain& chain) {
    BenesStats st;
    i64 diags = 0;
    for (size_t j = chain.factors.size(); j-- > 0;) {
        i64 r = factor_rotations(chain, j);
        st.per_level.push_back(r);
        st.total += r;
        diags += (i64)chain.factor_matrix(j).diags.size();
    }
    if (!chain.factors.empty()) st.mean_diagonals = double(diags) / double(chain.factors.size());
    if (chain.keys.unrestricted()) {
        for (size_t j = 0; j < chain.factors.size(); ++j) {
            DiagMatrix D = chain.factor_matrix(j);
            BsgsPlan plan = best_bsgs_plan(D);
            for (const auto& [gb, _] : plan.blocks) {
                i64 b = pmod(plan.a * gb.second, chain.n), g = pmod(plan.a * (plan.i0 + plan.n1 * gb.first), chain.n);
                if (b) st.keys.insert(b);
                if (g) st.keys.insert(g);
            }
        }
    } else {
        st.keys.insert(chain.keys.keys.begin(), chain.keys.keys.end());
    }
    return st;
}

}  // namespace hperm
