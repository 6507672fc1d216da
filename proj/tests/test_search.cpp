#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "bench.hpp"
#include "search.hpp"
#include "structured.hpp"

using namespace hperm;

namespace {

// disjoint swaps (i, i + step) placed at the given starts
Permutation swaps(i64 n, const std::vector<std::pair<i64, i64>>& pairs) {
    Permutation p = Permutation::identity(n);
    for (auto [i, step] : pairs) std::swap(p.targets[i], p.targets[pmod(i + step, n)]);
    return p;
}

// random permutation supported on {0, +-c}: disjoint adjacent-by-c swaps
Permutation random_swaps(i64 n, i64 c, std::mt19937_64& rng) {
    Permutation p = Permutation::identity(n);
    std::vector<char> used(n, 0);
    for (i64 i = 0; i + c < n; ++i)
        if (!used[i] && !used[i + c] && rng() % 2) {
            std::swap(p.targets[i], p.targets[i + c]);
            used[i] = used[i + c] = 1;
        }
    return p;
}

std::set<i64> keyset(const DiagMatrix& m) {
    auto k = m.signed_keys();
    return {k.begin(), k.end()};
}

bool subset(const std::set<i64>& a, const std::set<i64>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST(DiagProfile, Examples) {
    SearchParams t = diag_profile(build_ut(4, 16));
    EXPECT_EQ(t.a, 3);
    EXPECT_EQ(t.r, 9);

    SearchParams id = diag_profile(DiagMatrix::identity(8));
    EXPECT_EQ(id.a, 1);
    EXPECT_EQ(id.r, 0);

    DiagMatrix f = perm_to_diag(swaps(32, {{0, 2}, {5, 4}, {12, 6}}));
    EXPECT_EQ(f.signed_keys(), (std::vector<i64>{-6, -4, -2, 0, 2, 4, 6}));
    SearchParams fp = diag_profile(f);
    EXPECT_EQ(fp.a, 2);
    EXPECT_EQ(fp.r, 6);
}

TEST(SearchDepth1, TransposeFourSplitsAtSix) {
    DiagMatrix U = build_ut(4, 16);
    SearchParams p = diag_profile(U);
    auto f = search_depth1(U, p);
    ASSERT_TRUE(f.has_value());
    EXPECT_EQ(keyset(f->R), (std::set<i64>{-6, 0, 6}));
    EXPECT_TRUE(subset(keyset(f->L), {-3, 0, 3}));
    EXPECT_EQ(f->L * f->R, U);
}

TEST(SearchDepth1, AlreadyOnRoutingDiagonals) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        DiagMatrix U = perm_to_diag(random_swaps(32, 5, rng));
        if (U.diags.size() == 1) continue;
        SearchParams p = diag_profile(U);
        ASSERT_EQ(rc_at(p, 1), 5);
        auto f = search_depth1(U, p);
        ASSERT_TRUE(f.has_value());
        EXPECT_EQ(f->L, DiagMatrix::identity(32));
        EXPECT_EQ(f->R, U);
    }
}

TEST(SearchDepth1, AbsentWhenOracleFindsNothing) {
    int absent = 0;
    for (u64 s = 0; s < 400 && absent < 5; ++s) {
        DiagMatrix U = perm_to_diag(random_permutation(8, s));
        SearchParams p = diag_profile(U);
        if (p.r < 2) continue;
        i64 rc = rc_at(p, 1), rp = p.r - rc;
        if (oracle_depth1_count(U, -p.r, p.r, rc, -rp, rp, false, 1) != 0) continue;
        ++absent;
        EXPECT_FALSE(search_depth1(U, p).has_value()) << "seed " << s;
    }
    EXPECT_GT(absent, 0);
}

TEST(SearchDepth1, MalformedParams) {
    DiagMatrix U = build_ut(4, 16);
    SearchParams p = diag_profile(U);
    p.a = 0;
    EXPECT_THROW(search_depth1(U, p), Error);
    p = diag_profile(U);
    p.r = 3;  // narrower than U's diagonals
    EXPECT_THROW(search_depth1(U, p), Error);
}

// search succeeds exactly when some right factor on {0, +-rc} leaves a bounded left factor
TEST(SearchDepth1, CompleteForAllSmallPermutations) {
    i64 checked = 0;
    for (i64 n = 2; n <= 8; ++n) {
        std::vector<i64> t(n);
        std::iota(t.begin(), t.end(), 0);
        do {
            DiagMatrix U = perm_to_diag(Permutation(t));
            SearchParams p = diag_profile(U);
            p.a = 1;
            if (p.r == 0) continue;
            i64 rc = rc_at(p, 1), rp = p.r - rc;
            bool oracle = oracle_depth1_count(U, -p.r, p.r, rc, -rp, rp, false, 1) > 0;
            auto f = search_depth1(U, p);
            ASSERT_EQ(f.has_value(), oracle) << "n=" << n;
            if (f) ASSERT_EQ(f->L * f->R, U);
            ++checked;
        } while (std::next_permutation(t.begin(), t.end()));
    }
    EXPECT_GT(checked, 40000);
}

TEST(SearchDepth1, CompleteOnSampledSixteen) {
    for (u64 s = 0; s < 200; ++s) {
        DiagMatrix U = perm_to_diag(random_permutation(16, s));
        SearchParams p = diag_profile(U);
        p.a = 1;
        if (p.r == 0) continue;
        i64 rc = rc_at(p, 1), rp = p.r - rc;
        bool oracle = oracle_depth1_count(U, -p.r, p.r, rc, -rp, rp, false, 1) > 0;
        ASSERT_EQ(search_depth1(U, p).has_value(), oracle) << "seed " << s;
    }
}

TEST(SearchDepth1, SolutionsSatisfyDefinitionAtDepthOne) {
    for (u64 s = 0; s < 300; ++s) {
        DiagMatrix U = perm_to_diag(random_permutation(12, s));
        SearchParams p = diag_profile(U);
        auto f = search_depth1(U, p);
        if (!f) continue;
        DecompositionChain c;
        c.n = U.n;
        c.depth = 1;
        c.factors = {{f->L, Strategy::Direct, 0}, {f->R, Strategy::Direct, 0}};
        EXPECT_TRUE(validate_ideal_chain(U, c, p).ok()) << "seed " << s;
    }
}

TEST(EnumerateDepth1, TransposeFourContainsFigurePair) {
    DiagMatrix U = build_ut(4, 16);
    SearchParams p = diag_profile(U);
    auto all = enumerate_depth1(U, p);
    ASSERT_FALSE(all.empty());
    bool figure = false;
    for (const auto& f : all) {
        EXPECT_EQ(f.L * f.R, U);
        figure |= keyset(f.R) == std::set<i64>{-6, 0, 6} && subset(keyset(f.L), {-3, 0, 3});
    }
    EXPECT_TRUE(figure);
}

TEST(EnumerateDepth1, SingleSolutionWhenNothingToResolve) {
    DiagMatrix U = perm_to_diag(swaps(16, {{0, 4}, {9, 4}}));
    auto all = enumerate_depth1(U, diag_profile(U));
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].R, U);
}

TEST(EnumerateDepth1, SoundAndDuplicateFree) {
    for (u64 s = 0; s < 100; ++s) {
        DiagMatrix U = perm_to_diag(random_permutation(10, s));
        SearchParams p = diag_profile(U);
        auto all = enumerate_depth1(U, p);
        std::set<std::vector<i64>> seen;
        for (const auto& f : all) {
            EXPECT_TRUE(f.L.is_permutation());
            EXPECT_TRUE(f.R.is_permutation());
            EXPECT_EQ(f.L * f.R, U);
            EXPECT_TRUE(seen.insert(f.R.to_perm().targets).second);
        }
        i64 rc = rc_at(p, 1), rp = p.r - rc;
        if (p.r > 0) {
            i64 oracle = oracle_depth1_count(U, -p.r, p.r, rc, -rp, rp, false);
            EXPECT_LE((i64)all.size(), oracle);
            EXPECT_EQ(all.empty(), oracle == 0);
        }
    }
}

TEST(MaxIdealDepth, TransposeEightAtLeastTwo) {
    DiagMatrix U = build_ut(8, 64);
    MaxDepthResult r = max_ideal_depth(U);
    EXPECT_GE(r.depth, 2);
    EXPECT_EQ(r.chain.product(), U);
    EXPECT_TRUE(validate_ideal_chain(U, r.chain, diag_profile(U)).ok());
}

TEST(MaxIdealDepth, Identity) {
    DiagMatrix U = DiagMatrix::identity(16);
    MaxDepthResult r = max_ideal_depth(U);
    EXPECT_EQ(r.depth, 0);
    ASSERT_EQ(r.chain.factors.size(), 1u);
    EXPECT_EQ(r.chain.factors[0].m, U);
}

TEST(MaxIdealDepth, ProductAlwaysMatches) {
    for (u64 s = 0; s < 60; ++s) {
        i64 n = 8 + (i64)(s % 9);
        DiagMatrix U = perm_to_diag(random_permutation(n, s));
        MaxDepthResult r = max_ideal_depth(U);
        EXPECT_EQ((int)r.chain.factors.size(), r.depth + 1);
        EXPECT_EQ(r.chain.product(), U) << "seed " << s;
    }
}

TEST(MaxIdealDepth, TransposeMeetsLogBound) {
    for (i64 d : {4, 8, 16}) {
        DiagMatrix U = build_ut(d, d * d);
        SearchParams p = diag_profile(U);
        MaxDepthResult r = max_ideal_depth(U, p);
        EXPECT_GE(r.depth, ilog2(d - 1)) << "d=" << d;
        EXPECT_TRUE(validate_ideal_chain(U, r.chain, p).ok()) << "d=" << d;
    }
}

// depth-2 chain on n=32 with diagonals {2i : |i| <= 6}
TEST(Validate, FigureOneDepthTwo) {
    SearchParams p;
    p.n = 32;
    p.a = 2;
    p.r = 12;
    EXPECT_EQ(rc_at(p, 1), 6);
    EXPECT_EQ(rc_at(p, 2), 4);
    std::mt19937_64 rng(12);
    for (int t = 0; t < 20; ++t) {
        DiagMatrix R1 = perm_to_diag(random_swaps(32, 6, rng));
        DiagMatrix R2 = perm_to_diag(random_swaps(32, 4, rng));
        DiagMatrix L = perm_to_diag(random_swaps(32, 2, rng));
        DiagMatrix U = L * R2 * R1;
        DecompositionChain c;
        c.n = 32;
        c.depth = 2;
        c.factors = {{L, Strategy::Direct, 0}, {R2, Strategy::Direct, 0}, {R1, Strategy::Direct, 0}};
        ValidationReport rep = validate_ideal_chain(U, c, p);
        EXPECT_TRUE(rep.product);
        EXPECT_TRUE(rep.right_factors);
        EXPECT_TRUE(rep.left_bound) << rep.detail;

        // a left factor wider than r' = 2 breaks condition 3
        DecompositionChain wide = c;
        wide.factors[0].m = perm_to_diag(swaps(32, {{0, 4}}));
        EXPECT_FALSE(validate_ideal_chain(wide.product(), wide, p).left_bound);
    }
}

TEST(Validate, DepthZeroAndCorruption) {
    DiagMatrix U = perm_to_diag(random_permutation(16, 3));
    SearchParams p = diag_profile(U);
    DecompositionChain c;
    c.n = 16;
    c.factors = {{U, Strategy::Direct, 0}};
    EXPECT_TRUE(validate_ideal_chain(U, c, p).product);

    MaxDepthResult r = max_ideal_depth(build_ut(8, 64));
    ASSERT_GE(r.chain.factors.size(), 2u);
    DecompositionChain bad = r.chain;
    Permutation q = bad.factors[1].m.to_perm();
    std::swap(q.targets[0], q.targets[1]);
    bad.factors[1].m = perm_to_diag(q);
    EXPECT_FALSE(validate_ideal_chain(build_ut(8, 64), bad, diag_profile(build_ut(8, 64))).product);
}

TEST(Validate, AsymmetricTau) {
    DiagMatrix U = build_tau(4, 16);
    SearchParams p = diag_profile(U);
    p.asymmetric = true;
    p.a = 4;
    p.r = 12;
    auto f = search_depth1(U, p);
    ASSERT_TRUE(f.has_value());
    EXPECT_TRUE(subset(keyset(f->R), {0, 8}));
    EXPECT_EQ(f->L * f->R, U);
}
