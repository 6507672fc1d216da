#include <gtest/gtest.h>

#include <random>

#include "bench.hpp"
#include "search.hpp"
#include "structured.hpp"

using namespace hperm;

namespace {

std::set<i64> signed_set(const DiagMatrix& m) {
    auto k = m.signed_keys();
    return {k.begin(), k.end()};
}

std::set<i64> key_set(const DiagMatrix& m) {
    auto k = m.keys();
    return {k.begin(), k.end()};
}

// vec(A) -> vec(op(A)) straight from the definitions
Vec oracle(BlockOp op, const Vec& v, i64 d) {
    Vec out = v;
    for (i64 i = 0; i < d; ++i)
        for (i64 j = 0; j < d; ++j) {
            switch (op) {
                case BlockOp::Transpose: out[i * d + j] = v[j * d + i]; break;
                case BlockOp::Sigma: out[i * d + j] = v[i * d + (i + j) % d]; break;    // column j = diagonal j
                case BlockOp::Tau: out[i * d + j] = v[((i + j) % d) * d + j]; break;    // row i = diagonal i
            }
        }
    return out;
}

// U_{R_i} of a chain [U_L, U_{R_l}, ..., U_{R_1}]
const DiagMatrix& right_factor(const DecompositionChain& c, int i) { return c.factors[c.factors.size() - i].m; }

void expect_chain_matches(const DecompositionChain& c, const DiagMatrix& U, int trials, u64 seed) {
    ASSERT_EQ(c.n, U.n);
    for (int t = 0; t < trials; ++t) {
        Vec v = random_vector(c.n, seed + t);
        ASSERT_EQ(c.apply(SlotVector(v)).slots, U.apply_plain(v)) << "trial " << t;
    }
}

}  // namespace

TEST(BuildUt, Examples) {
    EXPECT_EQ(build_ut(2, 4).apply_plain({1, 2, 3, 4}), (Vec{1, 3, 2, 4}));
    std::set<i64> want;
    for (i64 i = -3; i <= 3; ++i) want.insert(pmod(3 * i, 16));
    EXPECT_EQ(key_set(build_ut(4, 16)), want);
    EXPECT_EQ(build_ut(1, 1), DiagMatrix::identity(1));
    EXPECT_THROW(build_ut(5, 16), Error);
}

TEST(BuildUt, TransposesEmbeddedMatrix) {
    for (i64 d = 1; d <= 12; ++d) {
        i64 n = d * d + 7;
        Vec v = random_vector(n, (u64)d);
        Vec want = v;
        Vec head(v.begin(), v.begin() + d * d);
        Vec t = oracle(BlockOp::Transpose, head, d);
        std::copy(t.begin(), t.end(), want.begin());
        EXPECT_EQ(build_ut(d, n).apply_plain(v), want) << "d=" << d;
    }
}

TEST(BuildSigmaTau, MatchDefinitions) {
    for (i64 d = 1; d <= 12; ++d) {
        Vec v = random_vector(d * d, 40 + (u64)d);
        EXPECT_EQ(build_sigma(d, d * d).apply_plain(v), oracle(BlockOp::Sigma, v, d)) << "d=" << d;
        EXPECT_EQ(build_tau(d, d * d).apply_plain(v), oracle(BlockOp::Tau, v, d)) << "d=" << d;
    }
    EXPECT_EQ(build_sigma(2, 4).apply_plain({1, 2, 3, 4}), (Vec{1, 2, 4, 3}));
    EXPECT_EQ(build_sigma(1, 1), DiagMatrix::identity(1));
}

TEST(BuildTau, DiagonalsStepByD) {
    EXPECT_EQ(key_set(build_tau(4, 16)), (std::set<i64>{0, 4, 8, 12}));
    for (i64 d = 2; d <= 16; ++d) {
        for (i64 k : build_tau(d, d * d).keys()) {
            EXPECT_EQ(k % d, 0);
            EXPECT_LE(k, d * d - d);
        }
    }
}

TEST(DecomposeUt, FourDepthOne) {
    HmtSpec s;
    s.d = 4;
    s.n = 16;
    s.l = 1;
    DecompositionChain c = decompose_ut(s);
    ASSERT_EQ(c.factors.size(), 2u);
    EXPECT_EQ(signed_set(right_factor(c, 1)), (std::set<i64>{-6, 0, 6}));
    for (i64 k : signed_set(c.factors[0].m)) EXPECT_TRUE(k == 0 || k == 3 || k == -3) << k;
    expect_chain_matches(c, build_ut(4, 16), 100, 1);
}

TEST(DecomposeUt, PowerOfTwoStructure) {
    for (i64 d : {4, 8, 16, 32, 64}) {
        for (int l = 1; l <= ilog2(d - 1); ++l) {
            HmtSpec s;
            s.d = d;
            s.n = d * d;
            s.l = l;
            DecompositionChain c = decompose_ut(s);
            ASSERT_EQ((int)c.factors.size(), l + 1);
            for (int i = 1; i <= l; ++i) {
                i64 rc = (d - 1) * d >> i;
                std::set<i64> want_mod{0, smod(rc, d * d), smod(-rc, d * d)};
                std::set<i64> got_mod;
                for (i64 k : right_factor(c, i).keys()) got_mod.insert(smod(k, d * d));
                EXPECT_EQ(got_mod, want_mod) << "d=" << d << " l=" << l << " i=" << i;
                EXPECT_LE(right_factor(c, i).diags.size(), 3u);
            }
            std::set<i64> left;
            for (i64 i = -(d >> l) + 1; i < (d >> l); ++i) left.insert(pmod(i * (d - 1), d * d));
            EXPECT_EQ(key_set(c.factors[0].m), left) << "d=" << d << " l=" << l;
            EXPECT_LE((i64)c.factors[0].m.diags.size(), 2 * (d >> l) - 1);
            if (d <= 16) EXPECT_EQ(c.product(), build_ut(d, d * d));
            expect_chain_matches(c, build_ut(d, d * d), 5, 100 + (u64)d);
        }
    }
}

TEST(DecomposeUt, OddDimensions) {
    for (i64 d = 3; d <= 33; d += 2) {
        for (int l = 1; l <= clog2(d) - 1; ++l) {
            HmtSpec s;
            s.d = d;
            s.n = d * d;
            s.l = l;
            DecompositionChain c = decompose_ut(s);
            for (int i = 1; i <= l; ++i) EXPECT_LE(right_factor(c, i).diags.size(), 5u) << "d=" << d;
            if (d <= 15) EXPECT_EQ(c.product(), build_ut(d, d * d));
            expect_chain_matches(c, build_ut(d, d * d), 3, 200 + (u64)d);
        }
    }
}

TEST(DecomposeUt, PaddingAndLargerSlotCounts) {
    HmtSpec s;
    s.d = 6;
    s.n = 64;
    s.l = 2;
    s.pad = true;
    // padded mode works on the 8 x 8 layout holding the zero-padded matrix
    expect_chain_matches(decompose_ut(s), build_ut(8, 64), 20, 7);
    s.pad = false;
    expect_chain_matches(decompose_ut(s), build_ut(6, 64), 20, 8);
    s.d = 4;
    s.n = 128;
    s.l = 1;
    expect_chain_matches(decompose_ut(s), build_ut(4, 128), 20, 9);
}

TEST(DecomposeUt, RejectsBadDepth) {
    HmtSpec s;
    s.d = 8;
    s.n = 64;
    s.l = 0;
    EXPECT_THROW(decompose_ut(s), Error);
    s.l = 5;
    EXPECT_THROW(decompose_ut(s), Error);
    s.d = 9;
    s.l = 1;
    EXPECT_THROW(decompose_ut(s), Error);
}

TEST(BsgsSplit, ClosestToRatio) {
    EXPECT_EQ(choose_bsgs_split(64), (std::pair<i64, i64>{16, 4}));
    EXPECT_EQ(choose_bsgs_split(4), (std::pair<i64, i64>{4, 1}));
    for (i64 D = 1; D <= 128; ++D) {
        auto [d1, d2] = choose_bsgs_split(D);
        EXPECT_EQ(d1 * d2, D);
    }
}

TEST(Partition, PowerOfTwoHalving) {
    auto rounds = partition_rounds(8, 3);
    ASSERT_EQ(rounds.size(), 3u);
    EXPECT_EQ(rounds[0].sizes(), (std::vector<i64>{4}));
    EXPECT_EQ(rounds[1].sizes(), (std::vector<i64>{2}));
    EXPECT_EQ(rounds[2].sizes(), (std::vector<i64>{1}));
}

TEST(Partition, OddSplitsOverlap) {
    auto one = partition_rounds(7, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].sizes(), (std::vector<i64>{3, 4}));
    EXPECT_EQ(one[0].overlaps.size(), 1u);
    auto two = partition_rounds(7, 2);
    auto sz = two[1].sizes();
    ASSERT_LE(sz.size(), 2u);
    if (sz.size() == 2) EXPECT_EQ(sz[1] - sz[0], 1);
}

TEST(Partition, AtMostTwoSizesDifferingByOne) {
    for (i64 d = 2; d <= 64; ++d)
        for (BlockOp op : {BlockOp::Transpose, BlockOp::Sigma}) {
            auto rounds = partition_rounds(d, clog2(d), op);
            for (const auto& r : rounds) {
                auto sz = r.sizes();
                ASSERT_FALSE(sz.empty());
                ASSERT_LE(sz.size(), 2u) << "d=" << d << " round " << r.round;
                if (sz.size() == 2) EXPECT_EQ(sz[1] - sz[0], 1) << "d=" << d;
            }
        }
    for (i64 d = 2; d <= 64; ++d)
        for (const auto& r : column_rounds(d, clog2(d))) {
            auto w = r.sizes();
            ASSERT_LE(w.size(), 2u);
            if (w.size() == 2) EXPECT_EQ(w[1] - w[0], 1);
        }
}

// every blockwise swap between consecutive rounds stays within three diagonals
TEST(BlockSwap, AtMostThreeDiagonals) {
    for (i64 d = 4; d <= 64; d *= 2) {
        std::vector<Permutation> levels = {build_ut(d, d * d).to_perm()};
        for (const auto& part : partition_rounds(d, ilog2(d) - 1))
            levels.push_back(blockwise(part, BlockOp::Transpose, d, d * d));
        for (size_t i = 0; i + 1 < levels.size(); ++i) {
            // swap = P_i * P_{i+1}^{-1}
            Permutation swap = levels[i].after(levels[i + 1].inverse());
            EXPECT_LE(perm_to_diag(swap).diags.size(), 3u) << "d=" << d << " round " << i;
        }
    }
}

TEST(BlockSwap, PositionIndependent) {
    for (BlockOp op : {BlockOp::Transpose, BlockOp::Sigma, BlockOp::Tau}) {
        for (i64 s : {2, 3, 4}) {
            const i64 d = 12;
            BlockPartition a, b;
            a.blocks = {{0, 0, s, s}};
            b.blocks = {{5, 5, s, s}};
            DiagMatrix pa = perm_to_diag(blockwise(a, op, d, d * d));
            DiagMatrix pb = perm_to_diag(blockwise(b, op, d, d * d));
            EXPECT_EQ(key_set(pa), key_set(pb)) << "size " << s;
        }
    }
}

TEST(DecomposeSigma, Structure) {
    DecompositionChain c = decompose_sigma(16, 1);
    ASSERT_EQ(c.factors.size(), 2u);
    const DiagMatrix& R = right_factor(c, 1);
    EXPECT_EQ(R.diags.size(), 3u);
    std::set<i64> s = signed_set(R);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_TRUE(s.count(0));
    i64 rc = *s.rbegin();
    EXPECT_EQ(*s.begin(), -rc);
    for (i64 d = 2; d <= 33; ++d)
        for (int l = 1; l <= (is_pow2(d) ? ilog2(d) - 1 : clog2(d) - 1); ++l) {
            DecompositionChain cs = decompose_sigma(d, l);
            if (is_pow2(d))
                for (int i = 1; i <= l; ++i) EXPECT_EQ(right_factor(cs, i).diags.size(), 3u) << "d=" << d;
            expect_chain_matches(cs, build_sigma(d, d * d), 3, 300 + (u64)d);
        }
}

TEST(DecomposeTau, Structure) {
    DecompositionChain c = decompose_tau(4, 1);
    EXPECT_EQ(key_set(right_factor(c, 1)), (std::set<i64>{0, 8}));
    expect_chain_matches(c, build_tau(4, 16), 100, 11);
    for (i64 d = 2; d <= 33; ++d)
        for (int l = 1; l <= (is_pow2(d) ? ilog2(d) - 1 : clog2(d) - 1); ++l) {
            DecompositionChain ct = decompose_tau(d, l);
            if (is_pow2(d))
                for (int i = 1; i <= l; ++i) EXPECT_EQ(right_factor(ct, i).diags.size(), 2u) << "d=" << d;
            expect_chain_matches(ct, build_tau(d, d * d), 3, 400 + (u64)d);
        }
}

TEST(GammaXi, DiagonalsForTwo) {
    GammaXi g = build_gamma_xi(2);
    EXPECT_EQ(g.gamma.n, 8);
    EXPECT_EQ(signed_set(g.gamma), (std::set<i64>{-3, 0}));
    EXPECT_EQ(signed_set(g.xi), (std::set<i64>{-2, 0}));
}

TEST(GammaXi, FullIsPermutation) {
    for (i64 d : {2, 4, 8}) {
        GammaXi g = build_gamma_xi_full(d);
        EXPECT_TRUE(g.gamma.is_permutation());
        EXPECT_TRUE(g.xi.is_permutation());
    }
}

TEST(PaddedGammaXi, MatchesReferenceWithDepthOne) {
    struct Case {
        i64 d;
        int l;
    };
    for (Case cs : {Case{2, 1}, Case{4, 1}, Case{4, 2}, Case{8, 2}, Case{8, 3}}) {
        const i64 d = cs.d;
        PaddedGammaXi pg = decompose_gamma_xi_pad(d, cs.l);
        GammaXi ref = build_gamma_xi(d);
        for (int t = 0; t < 20; ++t) {
            Vec v(d * d * d, 0);
            Vec a = random_vector(d * d, 500 + t);
            std::copy(a.begin(), a.end(), v.begin());
            SlotVector g = pg.gamma.apply(SlotVector(v));
            SlotVector x = pg.xi.apply(SlotVector(v));
            ASSERT_EQ(g.slots, ref.gamma.apply_plain(v)) << "d=" << d << " l=" << cs.l;
            ASSERT_EQ(x.slots, ref.xi.apply_plain(v)) << "d=" << d << " l=" << cs.l;
            EXPECT_EQ(g.depth_used, 1);
            EXPECT_EQ(x.depth_used, 1);
        }
    }
}

TEST(PaddedSum, AllOnesFactors) {
    for (i64 count : {2, 4, 8}) {
        auto fs = padded_sum_factors(64, -3, count, 1);
        for (const auto& f : fs) EXPECT_TRUE(f.all_ones());
        Vec v = random_vector(64, 77);
        // applying factors right to left sums the shifted copies
        Vec got = v;
        for (auto it = fs.rbegin(); it != fs.rend(); ++it) got = it->apply_plain(got);
        Vec want(64, 0);
        for (i64 j = 0; j < count; ++j) {
            Vec r = rot_plain(v, -3 * j);
            for (i64 i = 0; i < 64; ++i) want[i] += r[i];
        }
        EXPECT_EQ(got, want) << "count=" << count;
    }
}

TEST(Telescoping, ReproducesTopLevel) {
    const i64 d = 8;
    std::vector<Permutation> levels = {build_ut(d, d * d).to_perm()};
    for (const auto& part : partition_rounds(d, 2)) levels.push_back(blockwise(part, BlockOp::Transpose, d, d * d));
    DecompositionChain c = telescoping_chain(levels);
    EXPECT_EQ(c.product(), build_ut(d, d * d));
    EXPECT_EQ(c.depth, 2);
}
