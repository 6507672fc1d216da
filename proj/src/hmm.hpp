#pragma once

#include "core.hpp"

namespace hperm {

// factors = [d_l, ..., d_1, d_0] with product d; empty means naive replication
struct Replication {
    std::vector<i64> factors;
    bool naive() const { return factors.empty(); }
    i64 d0() const { return factors.empty() ? 0 : factors.back(); }
};

struct HmmConfig {
    i64 d = 0;
    i64 d_prime = 0;
    i64 m = 1;
    i64 n = 0;  // 0: smallest power of two holding m*d*d*d'
    Replication replication;

    i64 span() const { return d * d * d_prime; }
    i64 slots() const;
    void validate() const;
};

// d x d row-major
using Matrix = Vec;

Matrix matmul(const Matrix& A, const Matrix& B, i64 d);

struct HmmRun {
    std::vector<Matrix> C;
    int depth = 0;
    i64 rotations = 0;
};

// Multiplies A[g] * B[g] for every group g. Records into the active ledger.
HmmRun hmm_multiply(const std::vector<Matrix>& A, const std::vector<Matrix>& B, const HmmConfig& cfg);

enum class Direction { Row, Column };

// units are rows (stride d) or columns (stride 1) of the d x d matrix in slots [0, d*d)
struct ReplicaLayout {
    i64 d = 0;
    Direction dir = Direction::Row;
};

SlotVector srep_replicate(const SlotVector& v, i64 k, const ReplicaLayout& layout);
std::vector<SlotVector> fast_replicate(const SlotVector& v, const HmmConfig& cfg, Direction dir);

// Rotations spent by the replication engine for the given unit set.
// cyclic: the unit ring wraps (rows filling the whole vector).
i64 replication_rotations(i64 d, const std::vector<i64>& factors, const std::vector<i64>& units, bool cyclic);

struct HmmBudget {
    i64 naive = 0;             // 3 log d' + 2 (d/d') log d
    double closed_form = 0;    // published fast-replication form (equals naive when naive)
    i64 expected = 0;          // exact count this implementation records
    double amortized = 0;      // naive / m
    i64 row_closed = 0;        // d/d0 + d log d0
    i64 col_closed = 0;        // 2d/d0 + d log d0
    i64 row_expected = 0;      // standalone fast_replicate, row units
    i64 col_expected = 0;
};

HmmBudget hmm_rotation_budget(const HmmConfig& cfg);

// "naive" or "d0=<k>[,<d1>,<d2>...]" (digits listed from d_0 upward)
Replication parse_replication(const std::string& s, i64 d);

}  // namespace hperm
