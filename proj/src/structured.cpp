#include "structured.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hperm {

std::vector<i64> BlockPartition::sizes() const {
    std::set<i64> s;
    for (const auto& b : blocks) s.insert(std::max(b.h, b.w));
    return {s.begin(), s.end()};
}

namespace {

std::vector<Block> split_square(const Block& b, BlockOp op, std::vector<std::pair<i64, i64>>& overlaps) {
    const i64 s = b.h;
    if (s <= 1) return {b};
    if (s % 2 == 0) {
        i64 h = s / 2;
        return {{b.r0, b.c0, h, h}, {b.r0, b.c0 + h, h, h},
                {b.r0 + h, b.c0, h, h}, {b.r0 + h, b.c0 + h, h, h}};
    }
    const i64 dp = s / 2;
    Block b00{b.r0, b.c0, dp + 1, dp + 1};
    Block b11{b.r0 + dp, b.c0 + dp, dp + 1, dp + 1};
    Block b01{b.r0, b.c0 + dp + 1, dp, dp};
    Block b10{b.r0 + dp + 1, b.c0, dp, dp};
    overlaps.push_back({b.r0 + dp, b.c0 + dp});
    // the shared cell sits on the block diagonal: transposition leaves it in place,
    // so it is owned by B'11; diag-to-col moves it with B'00
    if (op == BlockOp::Sigma) return {b00, b11, b01, b10};
    return {b11, b00, b01, b10};
}

}  // namespace

std::vector<BlockPartition> partition_rounds(i64 d, int rounds, BlockOp op) {
    if (d < 1 || rounds < 0) throw Error(Err::Arg, "bad partition request");
    std::vector<BlockPartition> hist;
    std::vector<Block> cur = {{0, 0, d, d}};
    for (int r = 1; r <= rounds; ++r) {
        BlockPartition p;
        p.round = r;
        for (const auto& b : cur) {
            auto kids = split_square(b, op, p.overlaps);
            p.blocks.insert(p.blocks.end(), kids.begin(), kids.end());
        }
        cur = p.blocks;
        hist.push_back(std::move(p));
    }
    return hist;
}

std::vector<BlockPartition> column_rounds(i64 d, int rounds) {
    std::vector<BlockPartition> hist;
    std::vector<Block> cur = {{0, 0, d, d}};
    for (int r = 1; r <= rounds; ++r) {
        BlockPartition p;
        p.round = r;
        for (const auto& b : cur) {
            if (b.w <= 1) {
                p.blocks.push_back(b);
            } else if (b.w % 2 == 0) {
                p.blocks.push_back({b.r0, b.c0, b.h, b.w / 2});
                p.blocks.push_back({b.r0, b.c0 + b.w / 2, b.h, b.w / 2});
            } else {
                i64 dp = b.w / 2;
                p.blocks.push_back({b.r0, b.c0, b.h, dp});
                p.blocks.push_back({b.r0, b.c0 + dp, b.h, dp});
                p.blocks.push_back({b.r0, b.c0 + 2 * dp, b.h, 1});
            }
        }
        cur = p.blocks;
        hist.push_back(std::move(p));
    }
    return hist;
}

static std::pair<i64, i64> local_move(BlockOp op, i64 a, i64 b, i64 h, i64 w) {
    switch (op) {
        case BlockOp::Transpose: return {b, a};
        case BlockOp::Sigma: return {a, pmod(b - a, w)};
        case BlockOp::Tau: return {pmod(a - b, h), b};
    }
    return {a, b};
}

Permutation blockwise(const BlockPartition& part, BlockOp op, i64 d, i64 n) {
    if (d * d > n) throw Error(Err::Dim, "d*d exceeds slot count");
    Permutation p = Permutation::identity(n);
    std::vector<char> owned(d * d, 0);
    for (const auto& blk : part.blocks) {
        for (i64 a = 0; a < blk.h; ++a)
            for (i64 b = 0; b < blk.w; ++b) {
                i64 src = (blk.r0 + a) * d + blk.c0 + b;
                if (owned[src]) continue;
                owned[src] = 1;
                auto [da, db] = local_move(op, a, b, blk.h, blk.w);
                p.targets[src] = (blk.r0 + da) * d + blk.c0 + db;
            }
    }
    if (!p.valid()) throw Error(Err::Internal, "blockwise operation is not a bijection");
    return p;
}

static Permutation whole(BlockOp op, i64 d, i64 n) {
    BlockPartition p;
    p.blocks.push_back({0, 0, d, d});
    return blockwise(p, op, d, n);
}

DiagMatrix build_ut(i64 d, i64 n) {
    if (d < 1 || d * d > n) throw Error(Err::Dim, "transpose needs d*d <= n");
    return DiagMatrix::from_perm(whole(BlockOp::Transpose, d, n));
}

DiagMatrix build_sigma(i64 d, i64 n) {
    if (d < 1 || d * d > n) throw Error(Err::Dim, "diag-to-col needs d*d <= n");
    return DiagMatrix::from_perm(whole(BlockOp::Sigma, d, n));
}

DiagMatrix build_tau(i64 d, i64 n) {
    if (d < 1 || d * d > n) throw Error(Err::Dim, "diag-to-row needs d*d <= n");
    return DiagMatrix::from_perm(whole(BlockOp::Tau, d, n));
}

std::pair<i64, i64> choose_bsgs_split(i64 D, double ratio) {
    std::pair<i64, i64> best{D, 1};
    double best_err = 1e300;
    i64 best_cost = INT64_MAX;
    for (i64 d1 = 1; d1 <= D; ++d1) {
        if (D % d1) continue;
        i64 d2 = D / d1;
        double err = std::fabs(std::log2((double)d1 / (double)d2) - std::log2(ratio));
        i64 cost = d1 + 2 * d2;
        if (err < best_err - 1e-9 || (std::fabs(err - best_err) <= 1e-9 && cost < best_cost)) {
            best = {d1, d2};
            best_err = err;
            best_cost = cost;
        }
    }
    return best;
}

DecompositionChain telescoping_chain(const std::vector<Permutation>& levels) {
    DecompositionChain ch;
    ch.n = levels.front().size();
    ch.depth = (int)levels.size() - 1;
    ch.factors.push_back({DiagMatrix::from_perm(levels.back()), Strategy::Bsgs, 0});
    for (size_t i = levels.size() - 1; i >= 1; --i) {
        Permutation r = levels[i].inverse().after(levels[i - 1]);
        ch.factors.push_back({DiagMatrix::from_perm(r), Strategy::Direct, 0});
    }
    return ch;
}

DecompositionChain decompose_ut(const HmtSpec& spec) {
    i64 d = spec.d, n = spec.n ? spec.n : spec.d * spec.d;
    if (spec.pad && !is_pow2(d)) {
        i64 D = i64(1) << clog2(d);
        if (D * D <= n) d = D;
    }
    if (d < 2 || d * d > n) throw Error(Err::Dim, "transpose needs 2 <= d and d*d <= n");
    int lmax = is_pow2(d) ? ilog2(d - 1) : clog2(d) - 1;
    if (spec.l < 1 || spec.l > lmax)
        throw Error(Err::Arg, "depth " + std::to_string(spec.l) + " outside [1, " + std::to_string(lmax) + "]");
    std::vector<Permutation> levels = {whole(BlockOp::Transpose, d, n)};
    for (const auto& part : partition_rounds(d, spec.l, BlockOp::Transpose))
        levels.push_back(blockwise(part, BlockOp::Transpose, d, n));
    DecompositionChain ch = telescoping_chain(levels);
    if (is_pow2(d)) ch.factors[0].n1 = choose_bsgs_split(d >> spec.l, spec.ratio).first;
    return ch;
}

DecompositionChain decompose_sigma(i64 d, int l, i64 n) {
    if (n == 0) n = d * d;
    if (d < 2 || d * d > n) throw Error(Err::Dim, "diag-to-col needs 2 <= d and d*d <= n");
    int lmax = is_pow2(d) ? ilog2(d) - 1 : clog2(d) - 1;
    if (l < 1 || l > lmax) throw Error(Err::Arg, "depth out of range for diag-to-col");
    std::vector<Permutation> levels = {whole(BlockOp::Sigma, d, n)};
    for (const auto& part : partition_rounds(d, l, BlockOp::Sigma))
        levels.push_back(blockwise(part, BlockOp::Sigma, d, n));
    return telescoping_chain(levels);
}

DecompositionChain decompose_tau(i64 d, int l, i64 n) {
    if (n == 0) n = d * d;
    if (d < 2 || d * d > n) throw Error(Err::Dim, "diag-to-row needs 2 <= d and d*d <= n");
    int lmax = is_pow2(d) ? ilog2(d) - 1 : clog2(d) - 1;
    if (l < 1 || l > lmax) throw Error(Err::Arg, "depth out of range for diag-to-row");
    std::vector<Permutation> levels = {whole(BlockOp::Tau, d, n)};
    for (const auto& part : column_rounds(d, l)) levels.push_back(blockwise(part, BlockOp::Tau, d, n));
    return telescoping_chain(levels);
}

// ---- HMM permutations ------------------------------------------------------

GammaXi build_gamma_xi(i64 d) {
    const i64 n = d * d * d;
    GammaXi g{DiagMatrix(n), DiagMatrix(n)};
    for (i64 i = 0; i < d; ++i)
        for (i64 c = 0; c < d; ++c) {
            g.gamma.set(c * d * d + i * d, i * d + c, 1);  // column c of A -> unit column 0
            g.xi.set(c * d * d + i, c * d + i, 1);         // row c of B -> unit row c*d
        }
    return g;
}

GammaXi build_gamma_xi_full(i64 d) {
    const i64 n = d * d * d;
    GammaXi g{DiagMatrix(n), DiagMatrix(n)};
    for (i64 R = 0; R < d; ++R)
        for (i64 c = 0; c < d; ++c)
            for (i64 i = 0; i < d; ++i) {
                g.gamma.set((c * d + i) * d + R, (R * d + i) * d + c, 1);
                g.xi.set((c * d + R) * d + i, (R * d + c) * d + i, 1);
            }
    return g;
}

static DiagMatrix shift_sum(i64 n, const std::vector<i64>& steps) {
    DiagMatrix m(n);
    for (i64 s : steps)
        for (i64 l = 0; l < n; ++l) m.diags[pmod(s, n)][l] = 1;
    return m;
}

std::vector<DiagMatrix> padded_sum_factors(i64 n, i64 step, i64 count, int l) {
    if (!is_pow2(count) || l < 0 || (i64(1) << l) > count)
        throw Error(Err::Arg, "padded factorization needs a power-of-two count and l <= log count");
    std::vector<DiagMatrix> out;
    std::vector<i64> lsteps;
    for (i64 j = 0; j < (count >> l); ++j) lsteps.push_back(step * j);
    out.push_back(shift_sum(n, lsteps));
    for (int i = l; i >= 1; --i) out.push_back(shift_sum(n, {0, step * (count >> i)}));
    return out;
}

PaddedGammaXi decompose_gamma_xi_pad(i64 d, int l) {
    if (!is_pow2(d) || d < 2) throw Error(Err::Arg, "padded HMM permutations need a power-of-two d >= 2");
    if (l < 0 || l > ilog2(d)) throw Error(Err::Arg, "depth out of range for padded permutations");
    const i64 n = d * d * d;
    PaddedGammaXi out;
    auto fill = [&](DecompositionChain& ch, i64 step) {
        ch.n = n;
        ch.depth = l;
        for (auto& m : padded_sum_factors(n, step, d, l)) ch.factors.push_back({m, Strategy::Direct, 0});
    };
    fill(out.gamma, -(d * d - 1));
    fill(out.xi, -d * (d - 1));
    out.mask_gamma.assign(n, 0);
    out.mask_xi.assign(n, 0);
    for (i64 p = 0; p < n; ++p) {
        if (p % d == 0) out.mask_gamma[p] = 1;
        if (p % (d * d) < d) out.mask_xi[p] = 1;
    }
    out.gamma.final_mask = out.mask_gamma;
    out.xi.final_mask = out.mask_xi;
    return out;
}

}  // namespace hperm
