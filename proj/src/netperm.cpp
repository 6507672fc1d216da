#include "netperm.hpp"

#include <algorithm>
#include <functional>
#include <optional>

namespace hperm {

int MultiGroupNetwork::max_level() const {
    int m = 0;
    for (int b : group_bottom) m = std::max(m, b);
    return m;
}

i64 MultiGroupNetwork::rotation_nodes() const {
    i64 c = 0;
    for (const auto& nd : nodes) c += nd.rotation ? 1 : 0;
    return c;
}

namespace {

struct Member {
    i64 origin;
    int node;   // current node (possibly in an earlier group)
    int level;
};

i64 floor_pow2(i64 x) { return x <= 0 ? 0 : i64(1) << ilog2(x); }

class Builder {
public:
    explicit Builder(const Permutation& p) {
        net_.n = p.size();
        net_.perm = p;
        const i64 n = net_.n;
        net_.r_org.resize(n);
        rem_.resize(n);
        net_.trajectory.assign(n, {});
        for (i64 i = 0; i < n; ++i) {
            net_.r_org[i] = pmod(i - p.targets[i], n);
            rem_[i] = net_.r_org[i];
        }
        NetNode in;
        in.column = 0;
        for (i64 i = 0; i < n; ++i) in.entries.push_back(i);
        net_.nodes.push_back(in);
        for (i64 i = 0; i < n; ++i) net_.trajectory[i].push_back(0);
    }

    MultiGroupNetwork run() {
        std::vector<Member> members;
        for (i64 i = 0; i < net_.n; ++i) members.push_back({i, 0, 0});
        int g = 0;
        while (!members.empty()) {
            std::vector<Member> deferred;
            build_group(g, members, deferred);
            members = std::move(deferred);
            ++g;
        }
        for (auto& e : net_.edges) std::sort(e.positions.begin(), e.positions.end());
        return std::move(net_);
    }

private:
    MultiGroupNetwork net_;
    Vec rem_;
    std::map<std::pair<int, int>, int> edge_index_;

    i64 position(i64 origin) const {
        return pmod(origin - (net_.r_org[origin] - rem_[origin]), net_.n);
    }

    int new_node(int group, int level, bool rot, i64 step, int column) {
        NetNode nd;
        nd.group = group;
        nd.level = level;
        nd.rotation = rot;
        nd.step = step;
        nd.column = column;
        net_.nodes.push_back(std::move(nd));
        return (int)net_.nodes.size() - 1;
    }

    void link(int src, int dst, i64 pos) {
        auto key = std::make_pair(src, dst);
        auto it = edge_index_.find(key);
        int id;
        if (it == edge_index_.end()) {
            NetEdge e;
            e.src = src;
            e.dst = dst;
            net_.edges.push_back(std::move(e));
            id = (int)net_.edges.size() - 1;
            edge_index_.emplace(key, id);
        } else {
            id = it->second;
        }
        net_.edges[id].positions.push_back(pos);
    }

    void build_group(int g, std::vector<Member>& members, std::vector<Member>& deferred) {
        std::sort(members.begin(), members.end(),
                  [](const Member& a, const Member& b) { return a.origin < b.origin; });
        int level = members.front().level;
        for (const auto& m : members) level = std::min(level, m.level);
        net_.group_start.push_back(level);

        int next_column = g == 0 ? 1 : 0;  // column 0 of group 0 is the input
        // standby column of a node in this group
        std::map<int, int> column_of_source;

        auto unsolved = [&]() {
            for (const auto& m : members)
                if (rem_[m.origin] > 0) return true;
            return false;
        };

        while (unsolved()) {
            i64 rmax = 0;
            for (const auto& m : members)
                if (m.level == level) rmax = std::max(rmax, rem_[m.origin]);
            const i64 rot = floor_pow2(rmax);
            int rnode = -1;
            std::vector<char> occupied;
            std::map<int, int> standby_at;  // column -> node at level+1
            std::vector<Member> kept;
            for (auto& m : members) {
                if (m.level != level) {
                    kept.push_back(m);
                    continue;
                }
                const i64 pos = position(m.origin);
                const bool src_rotation = net_.nodes[m.node].rotation;
                const int src_group = net_.nodes[m.node].group;
                const int src_column = net_.nodes[m.node].column;
                if (rot > 0 && rem_[m.origin] >= rot) {
                    if (rnode < 0) {
                        rnode = new_node(g, level + 1, true, rot, -1);
                        occupied.assign(net_.n, 0);
                    }
                    if (occupied[pos]) {
                        deferred.push_back(m);
                        continue;
                    }
                    occupied[pos] = 1;
                    link(m.node, rnode, pos);
                    rem_[m.origin] -= rot;
                    net_.nodes[rnode].entries.push_back(m.origin);
                    m.node = rnode;
                } else {
                    int column;
                    if (!src_rotation && src_group == g) {
                        column = src_column;
                    } else {
                        auto it = column_of_source.find(m.node);
                        if (it == column_of_source.end())
                            it = column_of_source.emplace(m.node, next_column++).first;
                        column = it->second;
                    }
                    auto it = standby_at.find(column);
                    if (it == standby_at.end())
                        it = standby_at.emplace(column, new_node(g, level + 1, false, 0, column)).first;
                    link(m.node, it->second, pos);
                    net_.nodes[it->second].entries.push_back(m.origin);
                    m.node = it->second;
                }
                m.level = level + 1;
                net_.trajectory[m.origin].push_back(m.node);
                kept.push_back(m);
            }
            members = std::move(kept);
            ++level;
        }
        net_.group_bottom.push_back(level);
        for (size_t id = 0; id < net_.nodes.size(); ++id) {
            const auto& nd = net_.nodes[id];
            if (nd.level == level && (nd.group == g || (id == 0 && g == 0)))
                net_.outputs.push_back((int)id);
        }
        std::sort(net_.outputs.begin(), net_.outputs.end());
        net_.outputs.erase(std::unique(net_.outputs.begin(), net_.outputs.end()), net_.outputs.end());
    }
};

Vec dense_mask(const std::vector<i64>& positions, i64 n) {
    Vec m(n, 0);
    for (i64 p : positions) m[p] = 1;
    return m;
}

// ciphertext with an optional rescale still owed after a mask
struct Ct {
    SlotVector v;
    bool pending = false;
};

Ct settle(const Ct& c) {
    if (!c.pending) return c;
    return {rescale(c.v), false};
}

Ct accumulate(const std::optional<Ct>& acc, const Ct& x) {
    if (!acc) return x;
    if (acc->pending == x.pending) return {add(acc->v, x.v), x.pending};
    return {add(settle(*acc).v, settle(x).v), false};
}

Ct masked(const Ct& src, const std::vector<i64>& positions, i64 n) {
    Ct s = settle(src);
    return {cmult(s.v, dense_mask(positions, n)), true};
}

Ct rotated(const Ct& c, i64 k) {
    if (pmod(k, c.v.size()) == 0) return c;
    if (c.pending) return {rotate_rescale(c.v, k), false};
    return {rotate(c.v, k), false};
}

}  // namespace

MultiGroupNetwork build_network(const Permutation& p) {
    if (!p.valid()) throw Error(Err::Arg, "not a permutation");
    if (p.size() < 1) throw Error(Err::Dim, "empty permutation");
    return Builder(p).run();
}

MultiGroupNetwork reduce_masks(const MultiGroupNetwork& net) {
    if (net.collapse.top || net.collapse.bottom) throw Error(Err::Arg, "reduce masks before collapsing");
    MultiGroupNetwork out = net;
    for (auto& e : out.edges) {
        const NetNode& s = out.nodes[e.src];
        const NetNode& d = out.nodes[e.dst];
        if (d.rotation || s.group != d.group) continue;
        const int bottom = out.group_bottom[d.group];
        if (d.level == bottom) continue;
        e.copy = true;
    }
    // the first rotation of group 0 may take the whole input when its garbage is
    // filtered before reaching the output
    if (!out.group_bottom.empty() && out.group_bottom[0] >= 2) {
        for (auto& e : out.edges)
            if (e.src == 0 && out.nodes[e.dst].rotation) e.copy = true;
    }
    out.reduced = true;
    return out;
}

MultiGroupNetwork collapse_levels(const MultiGroupNetwork& net, const Collapse& c) {
    if (c.top < 0 || c.bottom < 0) throw Error(Err::Arg, "collapse counts must be non-negative");
    if (!is_pow2(c.arity) || c.arity < 2) throw Error(Err::Arg, "bottom arity must be a power of two >= 2");
    const int L = net.max_level();
    if (c.top > L || c.bottom > L || (c.top > 0 && c.bottom > 0 && c.top + c.bottom >= L))
        throw Error(Err::Arg, "collapse exceeds the network height");
    MultiGroupNetwork out = net;
    out.collapse = c;
    return out;
}

namespace {

struct Evaluator {
    const MultiGroupNetwork& net;
    i64 n;
    std::vector<std::vector<int>> in_edges;
    std::vector<std::optional<Ct>> outputs;

    explicit Evaluator(const MultiGroupNetwork& nw) : net(nw), n(nw.n) {
        in_edges.resize(net.nodes.size());
        for (size_t i = 0; i < net.edges.size(); ++i) in_edges[net.edges[i].dst].push_back((int)i);
        outputs.resize(net.nodes.size());
    }

    i64 consumed(i64 origin, int level) const {
        i64 c = 0;
        const auto& tr = net.trajectory[origin];
        for (int l = 1; l <= level && l < (int)tr.size(); ++l) {
            const NetNode& nd = net.nodes[tr[l]];
            if (nd.rotation) c += nd.step;
        }
        return c;
    }

    Ct finish_node(int id, const std::optional<Ct>& in) {
        const NetNode& nd = net.nodes[id];
        Ct x = in ? *in : Ct{SlotVector(Vec(n, 0)), false};
        if (nd.rotation) {
            TagScope tag(nd.level);
            x = rotated(x, nd.step);
        }
        return x;
    }

    SlotVector run(const SlotVector& v) {
        const Collapse& c = net.collapse;
        const int L = net.max_level();
        const int top = c.top;
        const int B = c.bottom > 0 ? L - c.bottom : L;
        Ct input{v, false};
        std::optional<Ct> result;
        auto to_output = [&](const Ct& x) { result = accumulate(result, x); };

        std::vector<std::optional<Ct>> node_in(net.nodes.size());
        if (top == 0) {
            outputs[0] = input;
        } else {
            // entries enter level top+1 (or the output) straight from rotated inputs
            std::map<i64, std::map<int, std::vector<i64>>> plan;  // c -> dst node (-1 output) -> positions
            for (i64 e = 0; e < n; ++e) {
                const auto& tr = net.trajectory[e];
                const int last = (int)tr.size() - 1;
                if (last <= top) {
                    plan[net.r_org[e]][-1].push_back(pmod(e - net.r_org[e], n));
                } else {
                    i64 ce = consumed(e, top);
                    plan[pmod(ce, n)][tr[top + 1]].push_back(pmod(e - ce, n));
                }
            }
            // pre-rotations through an m-ary tree of rotated copies, one digit
            // chunk of log m bits per tree layer counted from the top bit
            const int hb = n > 1 ? ilog2(n - 1) : 0;
            const int w = ilog2(c.arity);
            std::map<i64, Ct> rot{{0, input}};
            auto rotated_input = [&](i64 dist) {
                i64 cur = 0;
                for (int hi = hb; hi >= 0; hi -= w) {
                    const int lo = std::max(0, hi - w + 1);
                    const i64 chunk = dist & (((i64(1) << (hi + 1)) - 1) ^ ((i64(1) << lo) - 1));
                    if (!chunk) continue;
                    if (!rot.count(cur + chunk)) {
                        TagScope tag(1);
                        rot.emplace(cur + chunk, rotated(rot.at(cur), chunk));
                    }
                    cur += chunk;
                }
                return rot.at(cur);
            };
            for (auto& [dist, dsts] : plan) {
                Ct r = rotated_input(dist);
                for (auto& [dst, pos] : dsts) {
                    std::sort(pos.begin(), pos.end());
                    Ct m = masked(r, pos, n);
                    if (dst < 0) to_output(m);
                    else node_in[dst] = accumulate(node_in[dst], m);
                }
            }
        }

        std::vector<std::vector<int>> by_level(L + 1);
        for (size_t id = 0; id < net.nodes.size(); ++id) by_level[net.nodes[id].level].push_back((int)id);

        for (int lvl = std::max(1, top + 1); lvl <= B; ++lvl) {
            for (int id : by_level[lvl]) {
                if (lvl > top + 1 || top == 0) {
                    for (int ei : in_edges[id]) {
                        const NetEdge& e = net.edges[ei];
                        if (!e.copy && outputs[e.src]->pending) outputs[e.src] = settle(*outputs[e.src]);
                        const Ct& s = *outputs[e.src];
                        Ct x = e.copy ? s : masked(s, e.positions, n);
                        node_in[id] = accumulate(node_in[id], x);
                    }
                }
                outputs[id] = finish_node(id, node_in[id]);
            }
        }
        for (int id : net.outputs) {
            const int lvl = net.nodes[id].level;
            if (top > 0 && lvl <= top) continue;  // routed by the top layer
            if (c.bottom > 0 && lvl >= B) continue;  // enters a class below
            to_output(*outputs[id]);
        }
        if (c.bottom > 0) {
            // class ciphertexts by remaining distance after level B
            std::map<i64, std::optional<Ct>> classes;
            for (int id : by_level[B]) {
                outputs[id] = settle(*outputs[id]);
                std::map<i64, std::vector<i64>> pos_by_rem;
                for (i64 e : net.nodes[id].entries) {
                    i64 ce = consumed(e, B);
                    pos_by_rem[net.r_org[e] - ce].push_back(pmod(e - ce, n));
                }
                for (auto& [r, pos] : pos_by_rem) {
                    std::sort(pos.begin(), pos.end());
                    classes[r] = accumulate(classes[r], masked(*outputs[id], pos, n));
                }
            }
            const i64 m = c.arity;
            i64 scale = 1;
            int stage = 0;
            std::map<i64, Ct> cur;
            for (auto& [r, x] : classes) cur.emplace(r, *x);
            while (!(cur.size() == 1 && cur.begin()->first == 0) && !cur.empty()) {
                std::map<i64, std::optional<Ct>> next;
                for (auto& [p, x] : cur) {
                    i64 v = p % m;
                    Ct y = x;
                    if (v != 0) {
                        TagScope tag(B + 1 + stage);
                        y = rotated(x, v * scale);
                    }
                    next[p / m] = accumulate(next[p / m], y);
                }
                cur.clear();
                for (auto& [p, x] : next) cur.emplace(p, *x);
                scale *= m;
                ++stage;
            }
            if (!cur.empty()) to_output(cur.begin()->second);
        }
        if (!result) return SlotVector(Vec(n, 0), v.level);
        return settle(*result).v;
    }
};

}  // namespace

SlotVector evaluate_network(const MultiGroupNetwork& net, const SlotVector& v) {
    if (v.size() != net.n) throw Error(Err::Dim, "input length does not match the network");
    return Evaluator(net).run(v);
}

RotationProfile rotation_profile(const MultiGroupNetwork& net) {
    RotationProfile prof;
    const int L = net.max_level();
    if (!net.collapse.top && !net.collapse.bottom) {
        prof.per_level.assign(L, 0);
        for (const auto& nd : net.nodes) {
            if (!nd.rotation) continue;
            prof.per_level[nd.level - 1]++;
            prof.keys.insert(nd.step);
            prof.total++;
        }
        prof.depth = mask_depth(net);
        return prof;
    }
    Ledger led;
    SlotVector out;
    {
        LedgerScope scope(led);
        out = evaluate_network(net, SlotVector(Vec(net.n, 0)));
    }
    auto tags = led.rotations_by_tag();
    int top_tag = 0;
    for (auto& [t, _] : tags) top_tag = std::max(top_tag, t);
    prof.per_level.assign(std::max(L, top_tag), 0);
    for (auto& [t, cnt] : tags) prof.per_level[t - 1] += cnt;
    prof.keys = led.keys();
    prof.total = led.rotation_count();
    prof.depth = out.depth_used;
    return prof;
}

int mask_depth(const MultiGroupNetwork& net) {
    SlotVector out = evaluate_network(net, SlotVector(Vec(net.n, 0)));
    return out.depth_used;
}

}  // namespace hperm
