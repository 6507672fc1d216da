#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bench.hpp"
#include "netperm.hpp"

using namespace hperm;

namespace {

SlotVector sv(Vec v) { return SlotVector(std::move(v)); }

Vec iota(i64 n) {
    Vec v(n);
    for (i64 i = 0; i < n; ++i) v[i] = i;
    return v;
}

int bit_length(i64 x) { return x <= 0 ? 0 : ilog2(x) + 1; }

i64 max_r_org(const MultiGroupNetwork& net) {
    i64 m = 0;
    for (i64 r : net.r_org) m = std::max(m, r);
    return m;
}

}  // namespace

TEST(Network, RotationByThree) {
    Permutation p = Permutation::rotation(8, 3);
    MultiGroupNetwork net = build_network(p);
    EXPECT_EQ(net.groups(), 1);
    std::vector<i64> steps;
    for (const auto& nd : net.nodes)
        if (nd.rotation) steps.push_back(nd.step);
    EXPECT_EQ(steps, (std::vector<i64>{2, 1}));
    EXPECT_EQ(evaluate_network(net, sv(iota(8))).slots, (Vec{3, 4, 5, 6, 7, 0, 1, 2}));
}

TEST(Network, IdentityHasNoRotations) {
    for (i64 n : {1, 2, 16, 256}) {
        MultiGroupNetwork net = build_network(Permutation::identity(n));
        EXPECT_EQ(net.rotation_nodes(), 0);
        RotationProfile prof = rotation_profile(net);
        EXPECT_EQ(prof.total, 0);
        Vec v = random_vector(n, 4);
        EXPECT_EQ(evaluate_network(net, sv(v)).slots, v);
    }
}

TEST(Network, EvaluationMatchesOracle) {
    std::mt19937_64 rng(12);
    for (i64 n : {64, 256, 1024})
        for (int t = 0; t < 100; ++t) {
            Permutation p = random_permutation(n, rng());
            Vec v = random_vector(n, rng());
            ASSERT_EQ(evaluate_network(build_network(p), sv(v)).slots, p.apply(v)) << "n=" << n << " t=" << t;
        }
}

TEST(Network, SmallExhaustive) {
    for (i64 n : {1, 2, 3, 4, 5, 6}) {
        std::vector<i64> t(n);
        for (i64 i = 0; i < n; ++i) t[i] = i;
        do {
            Permutation p(t);
            Vec v = iota(n);
            ASSERT_EQ(evaluate_network(build_network(p), sv(v)).slots, p.apply(v));
        } while (std::next_permutation(t.begin(), t.end()));
    }
}

TEST(Network, LevelBoundAndKeys) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 60; ++t) {
        i64 n = i64(1) << (2 + rng() % 9);
        MultiGroupNetwork net = build_network(random_permutation(n, rng()));
        // a power-of-two maximum distance needs one level more than its ceiling log
        EXPECT_LE(net.max_level(), bit_length(max_r_org(net)));
        RotationProfile prof = rotation_profile(net);
        EXPECT_LE((i64)prof.keys.size(), ilog2(n));
        for (i64 k : prof.keys) {
            EXPECT_EQ(k & (k - 1), 0);
            EXPECT_LE(k, n / 2);
        }
        for (int g = 0; g < net.groups(); ++g) {
            int levels = net.group_bottom[g] - net.group_start[g];
            EXPECT_LE(levels, ilog2(n) + 1 - net.group_start[g]) << "group " << g;
        }
    }
}

TEST(Network, BinaryPath) {
    for (u64 s = 0; s < 20; ++s) {
        MultiGroupNetwork net = build_network(random_permutation(512, s));
        for (i64 i = 0; i < net.n; ++i) {
            i64 sum = 0;
            std::set<i64> seen;
            for (int id : net.trajectory[i]) {
                const NetNode& nd = net.nodes[id];
                if (!nd.rotation) continue;
                EXPECT_TRUE(seen.insert(nd.step).second) << "origin " << i;
                sum += nd.step;
            }
            EXPECT_EQ(sum, net.r_org[i]);
        }
    }
}

TEST(Network, NoSlotHeldTwice) {
    for (u64 s = 0; s < 10; ++s) {
        MultiGroupNetwork net = build_network(random_permutation(256, s));
        for (const auto& e : net.edges) {
            std::set<i64> pos(e.positions.begin(), e.positions.end());
            EXPECT_EQ(pos.size(), e.positions.size());
        }
        for (const auto& nd : net.nodes) {
            std::set<i64> at;
            for (i64 o : nd.entries) {
                // position of an entry inside a node is fixed by how far it has travelled
                i64 travelled = 0;
                for (int id : net.trajectory[o]) {
                    if (net.nodes[id].rotation) travelled += net.nodes[id].step;
                    if (&net.nodes[id] == &nd) break;
                }
                EXPECT_TRUE(at.insert(pmod(o - travelled, net.n)).second);
            }
        }
    }
}

TEST(Network, ReductionKeepsOutputAndBoundsDepth) {
    const i64 n = 256;
    for (u64 s = 0; s < 20; ++s) {
        Permutation p = random_permutation(n, 100 + s);
        MultiGroupNetwork net = build_network(p);
        MultiGroupNetwork red = reduce_masks(net);
        EXPECT_TRUE(red.reduced);
        EXPECT_LE(mask_depth(red), ilog2(n) - 1);
        EXPECT_LE(mask_depth(red), mask_depth(net));
        Vec v = random_vector(n, s);
        EXPECT_EQ(evaluate_network(red, sv(v)).slots, p.apply(v));
        bool any_copy = false;
        for (const auto& e : red.edges) any_copy |= e.copy;
        EXPECT_TRUE(any_copy);
    }
}

TEST(Network, CollapseIsExact) {
    const i64 n = 256;
    for (u64 s = 0; s < 10; ++s) {
        Permutation p = random_permutation(n, 300 + s);
        MultiGroupNetwork net = reduce_masks(build_network(p));
        MultiGroupNetwork col = collapse_levels(net, Collapse{2, 3, 4});
        Vec v = random_vector(n, s);
        EXPECT_EQ(evaluate_network(col, sv(v)).slots, p.apply(v));
        EXPECT_LT(mask_depth(col), mask_depth(net));
    }
}

TEST(Network, ZeroCollapseIsNoop) {
    MultiGroupNetwork net = build_network(random_permutation(128, 5));
    MultiGroupNetwork col = collapse_levels(net, Collapse{0, 0, 4});
    RotationProfile a = rotation_profile(net), b = rotation_profile(col);
    EXPECT_EQ(a.per_level, b.per_level);
    EXPECT_EQ(a.keys, b.keys);
    EXPECT_EQ(mask_depth(net), mask_depth(col));
}

TEST(Network, CollapseKeyIncrease) {
    const i64 n = 1024;
    for (i64 m : {2, 4, 8}) {
        const int t = 2, b = 3;
        for (u64 s = 0; s < 5; ++s) {
            MultiGroupNetwork net = build_network(random_permutation(n, 40 + s));
            RotationProfile prof = rotation_profile(collapse_levels(net, Collapse{t, b, m}));
            double extra = (double)(m - 1) / ilog2(m) - 1;
            EXPECT_LE((double)prof.keys.size(), ilog2(n) + (t + b) * extra + 1e-9) << "m=" << m;
        }
    }
}

TEST(Network, CollapseRejectsBadArity) {
    MultiGroupNetwork net = build_network(random_permutation(64, 1));
    EXPECT_THROW(collapse_levels(net, Collapse{1, 1, 3}), Error);
    EXPECT_THROW(collapse_levels(net, Collapse{-1, 0, 4}), Error);
}

TEST(Network, DimensionMismatch) {
    MultiGroupNetwork net = build_network(random_permutation(16, 1));
    EXPECT_THROW(evaluate_network(net, sv(Vec(8, 0))), Error);
}

TEST(Profile, MeanTotalNearTableRow) {
    const i64 n = 1024;
    std::vector<std::vector<i64>> per;
    for (int s = 0; s < 20; ++s) per.push_back(rotation_profile(build_network(random_permutation(n, sample_seed(7, s)))).per_level);
    SampleStats st = summarize(per);
    EXPECT_NEAR(st.total_mean, 34.5, 0.1 * 34.5);
    EXPECT_EQ((int)st.mean.size(), ilog2(n));
    EXPECT_DOUBLE_EQ(st.mean[0], 1.0);
    EXPECT_GT(st.total_stddev, 0.5);
    EXPECT_LT(st.total_stddev, 4.0);
}

TEST(Profile, GroupCountGrowsSlowly) {
    double groups = 0;
    for (u64 s = 0; s < 10; ++s) groups += build_network(random_permutation(1024, s)).groups();
    EXPECT_LE(groups / 10, 10.0);
}
