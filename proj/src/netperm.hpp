#pragma once

#include "core.hpp"

namespace hperm {

struct NetNode {
    int group = 0;
    int level = 0;
    bool rotation = false;
    i64 step = 0;      // rotation nodes only
    int column = -1;   // standby column within the group
    std::vector<i64> entries;  // origins held by this node
};

struct NetEdge {
    int src = 0;
    int dst = 0;
    bool copy = false;
    std::vector<i64> positions;  // mask support (sorted)
};

struct Collapse {
    int top = 0;
    int bottom = 0;
    i64 arity = 4;  // bottom tree arity, a power of two
};

struct MultiGroupNetwork {
    i64 n = 0;
    Permutation perm;
    std::vector<NetNode> nodes;  // nodes[0] is the input standby node
    std::vector<NetEdge> edges;
    std::vector<int> outputs;    // bottom nodes summed into the output
    std::vector<int> group_start;
    std::vector<int> group_bottom;
    // per entry (by origin): distance left to travel, node per level from 0
    std::vector<i64> r_org;
    std::vector<std::vector<int>> trajectory;
    bool reduced = false;
    Collapse collapse;

    int groups() const { return (int)group_start.size(); }
    int max_level() const;
    i64 rotation_nodes() const;
};

// Left-shift convention: entry i must travel r_org = (i - targets[i]) mod n slots left.
MultiGroupNetwork build_network(const Permutation& p);
MultiGroupNetwork reduce_masks(const MultiGroupNetwork& net);
MultiGroupNetwork collapse_levels(const MultiGroupNetwork& net, const Collapse& c);

SlotVector evaluate_network(const MultiGroupNetwork& net, const SlotVector& v);

struct RotationProfile {
    std::vector<i64> per_level;  // index 0 is network level 1
    std::set<i64> keys;
    i64 total = 0;
    int depth = 0;               // multiplicative depth of an evaluation
};

// Structural profile for uncollapsed networks; collapsed networks are profiled
// by an instrumented evaluation on a zero vector.
RotationProfile rotation_profile(const MultiGroupNetwork& net);

// Multiplicative depth of the mask structure (longest chain of masked edges to the output).
int mask_depth(const MultiGroupNetwork& net);

}  // namespace hperm
