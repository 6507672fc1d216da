#pragma once

#include "core.hpp"

namespace hperm {

struct MultiGroupNetwork;
struct BenesChain;

struct CostParams {
    i64 N = i64(1) << 15;
    int L = 18;      // moduli in Q
    i64 alpha = 3;   // moduli in P
    int level = 17;  // operand level l

    int log_n() const { return ilog2(N); }
    i64 beta() const { return (level + 1 + alpha - 1) / alpha; }
    void validate() const;
};

enum class Submodule {
    Rescale,
    Decompose,
    MultSum,
    ModDown,
    RotationSeparate,  // rescale + decompose + multsum + moddown
    RotationMerged,    // decompose and multsum at l+2 width, moddown+rescale
    CMult,
};

Submodule parse_submodule(const std::string& s);
const char* submodule_name(Submodule k);

i64 submodule_cost(Submodule kind, const CostParams& cp);

// separate - merged, and whether it meets N (l log N + 3.5 log N - l + 8)
struct SavingCheck {
    i64 separate = 0;
    i64 merged = 0;
    i64 saving = 0;
    double bound = 0;
    bool holds = false;
};
SavingCheck merged_saving(const CostParams& cp);

struct CostBreakdown {
    i64 rescale = 0;
    i64 decompose = 0;
    i64 multsum = 0;
    i64 moddown = 0;
    i64 moddown_rescale = 0;
    i64 total() const { return rescale + decompose + multsum + moddown + moddown_rescale; }
    CostBreakdown& operator+=(const CostBreakdown& o);
};

struct CostReport {
    std::vector<i64> rotations_per_level;  // index 0 = level 1
    std::vector<i64> scalar_mult_per_level;
    std::set<i64> keys;
    int depth = 0;
    i64 rotations = 0;
    CostBreakdown breakdown;
    i64 total = 0;       // equals breakdown.total()
    i64 cmult = 0;       // masks, priced separately and excluded from total
    i64 cmult_count = 0;

    CostReport& operator+=(const CostReport& o);
};

// Level schedule: rotations at network level t act on ciphertexts at l = (L - 1) - t.
int scheduled_level(const CostParams& base, int t);

CostBreakdown rotation_breakdown(bool merged, const CostParams& cp);

// Rotation nodes priced in merged form at the scheduled level of their network level.
CostReport network_cost(const MultiGroupNetwork& net, const CostParams& base);
// Same counts priced with separate rescale and rotation.
CostReport network_cost_separate(const MultiGroupNetwork& net, const CostParams& base);
// BSGS rotations of each factor in separate form at the scheduled level of the factor.
CostReport benes_cost(const BenesChain& chain, const CostParams& base);
// Instrumented evaluation; each rotation priced at its operand level.
CostReport chain_cost(const DecompositionChain& chain, const CostParams& base);
// Per-level counts (possibly fractional means) priced at scheduled levels.
double profile_cost(const std::vector<double>& per_level, const CostParams& base, bool merged);

std::string cost_report_json(const CostReport& r);
std::string cost_report_csv(const CostReport& r, const std::string& scheme);

}  // namespace hperm
