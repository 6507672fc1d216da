#pragma once

#include <functional>

#include "core.hpp"

namespace hperm {

struct Block {
    i64 r0 = 0, c0 = 0, h = 0, w = 0;
};

struct BlockPartition {
    int round = 0;
    std::vector<Block> blocks;                      // in ownership priority order
    std::vector<std::pair<i64, i64>> overlaps;      // shared cells (row, col)
    std::vector<i64> sizes() const;                 // distinct side lengths (square blocks)
};

enum class BlockOp { Transpose, Sigma, Tau };

// square splits: even blocks quartered, odd blocks split with a one-cell overlap
std::vector<BlockPartition> partition_rounds(i64 d, int rounds, BlockOp op = BlockOp::Transpose);
// column splits used by the diag-to-row transform
std::vector<BlockPartition> column_rounds(i64 d, int rounds);

// Permutation applying `op` inside every block of the partition; cells outside
// all blocks (and slots >= d*d) stay fixed.
Permutation blockwise(const BlockPartition& part, BlockOp op, i64 d, i64 n);

DiagMatrix build_ut(i64 d, i64 n);
DiagMatrix build_sigma(i64 d, i64 n);
DiagMatrix build_tau(i64 d, i64 n);

struct HmtSpec {
    i64 d = 0;
    i64 n = 0;
    int l = 1;
    bool pad = false;   // zero-pad d to a power of two when it fits
    double ratio = 4.0; // target d1/d2 for the left factor's BSGS split
};

// d1*d2 = D with d1/d2 closest to ratio (log scale), ties to the cheaper split
std::pair<i64, i64> choose_bsgs_split(i64 D, double ratio = 4.0);

DecompositionChain decompose_ut(const HmtSpec& spec);
DecompositionChain decompose_sigma(i64 d, int l, i64 n = 0);
DecompositionChain decompose_tau(i64 d, int l, i64 n = 0);

// Telescoping chain [L_l, R_l, ..., R_1] from a list of blockwise permutations
// P_0 = U, P_1, ..., P_l where P_i is blockwise on the round-i partition.
DecompositionChain telescoping_chain(const std::vector<Permutation>& levels);

// ---- HMM permutations ------------------------------------------------------

struct GammaXi {
    DiagMatrix gamma;
    DiagMatrix xi;
};

// Restricted to inputs whose rows d..d^2-1 are zero (only row-block 0 is routed).
GammaXi build_gamma_xi(i64 d);
// Full unit transpositions on d^3 slots.
GammaXi build_gamma_xi_full(i64 d);

// all-ones factors realizing sum_{j<count} Rot(x, step*j) as [L, R_l, ..., R_1]
std::vector<DiagMatrix> padded_sum_factors(i64 n, i64 step, i64 count, int l);

struct PaddedGammaXi {
    DecompositionChain gamma;  // final_mask keeps the first column of units
    DecompositionChain xi;
    Vec mask_gamma;
    Vec mask_xi;
};

PaddedGammaXi decompose_gamma_xi_pad(i64 d, int l);

}  // namespace hperm
