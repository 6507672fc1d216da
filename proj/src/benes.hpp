#pragma once

#include "core.hpp"

namespace hperm {

// Restricted rotation keys; other steps are composed along shortest key paths.
struct RotationKeys {
    i64 n = 0;
    std::vector<i64> keys;                  // normalized to [0, n)
    std::map<i64, std::vector<i64>> paths;  // step -> keys applied in order

    bool unrestricted() const { return keys.empty(); }
    // rotations needed for step (0 for step 0); -1 when unreachable
    i64 cost(i64 step) const;
    SlotVector rotate(const SlotVector& v, i64 step) const;
};

// Shortest key paths from the given key set.
RotationKeys make_keys(i64 n, const std::vector<i64>& keys);

struct BenesChain {
    i64 n = 0;
    // factors[0] is applied last, as in DecompositionChain
    std::vector<Permutation> factors;
    // pre-collapse routing distance per factor; merged factors list their members
    std::vector<std::vector<i64>> distances;
    std::vector<std::vector<int>> members;  // original factor indices per factor
    RotationKeys keys;                      // empty: every step has its own key

    int depth() const { return (int)factors.size(); }
    DiagMatrix factor_matrix(size_t i) const;
    Permutation product() const;
    DecompositionChain to_chain() const;
};

BenesChain benes_decompose(const Permutation& p);

// Groups adjacent factors so that depth equals target_depth, minimizing total BSGS rotations.
BenesChain collapse_benes(const BenesChain& chain, int target_depth);

// Greedy key selection over the BSGS steps of every factor.
BenesChain restrict_keys(const BenesChain& chain, i64 budget);

// BSGS rotations of one factor counted under the chain's key set
i64 factor_rotations(const BenesChain& chain, size_t i);

SlotVector evaluate_benes(const BenesChain& chain, const SlotVector& v);

struct BenesStats {
    std::vector<i64> per_level;  // factor application order, level 1 first
    i64 total = 0;
    double mean_diagonals = 0;
    std::set<i64> keys;
};

BenesStats benes_stats(const BenesChain& chain);

}  // namespace hperm
