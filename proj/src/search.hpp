#pragma once

#include <functional>
#include <optional>

#include "core.hpp"

namespace hperm {

struct SearchParams {
    i64 n = 0;
    i64 a = 1;
    i64 r = 0;
    // right factor restricted to {0, +r_c}; left factor range [0, r - r_c]
    bool asymmetric = false;
};

SearchParams diag_profile(const DiagMatrix& U);

// r_c at depth i (1-based)
i64 rc_at(const SearchParams& p, int i);

struct Factorization {
    DiagMatrix L;
    DiagMatrix R;
};

std::optional<Factorization> search_depth1(const DiagMatrix& U, const SearchParams& p);
std::vector<Factorization> enumerate_depth1(const DiagMatrix& U, const SearchParams& p,
                                            size_t limit = SIZE_MAX);

struct MaxDepthResult {
    int depth = 0;
    DecompositionChain chain;
};

MaxDepthResult max_ideal_depth(const DiagMatrix& U);
MaxDepthResult max_ideal_depth(const DiagMatrix& U, const SearchParams& p);

struct ValidationReport {
    bool product = false;
    bool right_factors = false;
    bool left_bound = false;
    std::string detail;
    bool ok() const { return product && right_factors && left_bound; }
};

ValidationReport validate_ideal_chain(const DiagMatrix& U, const DecompositionChain& chain,
                                      const SearchParams& p);

// Exhaustive count of right factors supported on {0, +-rc} ({0, +rc} if asymmetric)
// whose left factor has diagonals in [lo, hi]. Stops at limit.
// Entry offsets are taken inside [ulo, uhi] (the declared range of U).
i64 oracle_depth1_count(const DiagMatrix& U, i64 ulo, i64 uhi, i64 rc, i64 lo, i64 hi, bool asymmetric,
                        i64 limit = INT64_MAX);

namespace detail {
// One step of the search with explicit routing diagonal and left bound.
// The callback receives each solution and returns true to stop.
bool search_step(const DiagMatrix& U, i64 ulo, i64 uhi, i64 rc, i64 lo, i64 hi, bool asymmetric,
                 const std::function<bool(const Factorization&)>& on_solution);
}  // namespace detail

}  // namespace hperm
