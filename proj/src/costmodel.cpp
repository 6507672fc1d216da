#include "costmodel.hpp"

#include <sstream>

#include "benes.hpp"
#include "json.hpp"
#include "netperm.hpp"

namespace hperm {

void CostParams::validate() const {
    if (!is_pow2(N) || N < 2) throw Error(Err::Arg, "ring degree must be a power of two >= 2");
    if (alpha < 1) throw Error(Err::Arg, "alpha must be at least 1");
    if (L < 1) throw Error(Err::Arg, "modulus chain must be non-empty");
    if (level < 0 || level > L - 1) throw Error(Err::Depth, "level outside the modulus chain");
}

Submodule parse_submodule(const std::string& s) {
    static const std::map<std::string, Submodule> names = {
        {"rescale", Submodule::Rescale},
        {"decompose", Submodule::Decompose},
        {"multsum", Submodule::MultSum},
        {"moddown", Submodule::ModDown},
        {"rotation_separate", Submodule::RotationSeparate},
        {"rotation_merged", Submodule::RotationMerged},
        {"cmult", Submodule::CMult},
    };
    auto it = names.find(s);
    if (it == names.end()) throw Error(Err::Arg, "unknown submodule: " + s);
    return it->second;
}

const char* submodule_name(Submodule k) {
    switch (k) {
        case Submodule::Rescale: return "rescale";
        case Submodule::Decompose: return "decompose";
        case Submodule::MultSum: return "multsum";
        case Submodule::ModDown: return "moddown";
        case Submodule::RotationSeparate: return "rotation_separate";
        case Submodule::RotationMerged: return "rotation_merged";
        case Submodule::CMult: return "cmult";
    }
    return "?";
}

namespace {

i64 ceil_div(i64 a, i64 b) { return (a + b - 1) / b; }

i64 rescale_cost(i64 N, i64 lg, i64 l) { return 2 * N * ((l + 1) + (l + 2) * (lg + 1)); }

// width w = number of Q moduli entering the key switch
i64 decompose_cost(i64 N, i64 lg, i64 w, i64 a) {
    return N * lg * w + ceil_div(w, a) * N * (a + w * (lg + a));
}

i64 multsum_cost(i64 N, i64 w, i64 a) { return 2 * N * ceil_div(w, a) * (w + a); }

i64 moddown_cost(i64 N, i64 lg, i64 l, i64 a) {
    return 2 * N * ((l + 1) * (a + lg + 1) + a * (lg + 1));
}

i64 moddown_rescale_cost(i64 N, i64 lg, i64 l, i64 a) {
    return 2 * N * (l * ((a + 1) + lg + 1) + (a + 1) * (lg + 1));
}

}  // namespace

CostBreakdown rotation_breakdown(bool merged, const CostParams& cp) {
    cp.validate();
    const i64 N = cp.N, lg = cp.log_n(), l = cp.level, a = cp.alpha;
    CostBreakdown b;
    if (merged) {
        b.decompose = decompose_cost(N, lg, l + 2, a);
        b.multsum = multsum_cost(N, l + 2, a);
        b.moddown_rescale = moddown_rescale_cost(N, lg, l, a);
    } else {
        b.rescale = rescale_cost(N, lg, l);
        b.decompose = decompose_cost(N, lg, l + 1, a);
        b.multsum = multsum_cost(N, l + 1, a);
        b.moddown = moddown_cost(N, lg, l, a);
    }
    return b;
}

i64 submodule_cost(Submodule kind, const CostParams& cp) {
    cp.validate();
    const i64 N = cp.N, lg = cp.log_n(), l = cp.level, a = cp.alpha;
    switch (kind) {
        case Submodule::Rescale: return rescale_cost(N, lg, l);
        case Submodule::Decompose: return decompose_cost(N, lg, l + 1, a);
        case Submodule::MultSum: return multsum_cost(N, l + 1, a);
        case Submodule::ModDown: return moddown_cost(N, lg, l, a);
        case Submodule::RotationSeparate: return rotation_breakdown(false, cp).total();
        case Submodule::RotationMerged: return rotation_breakdown(true, cp).total();
        case Submodule::CMult: return 2 * N * (l + 1);
    }
    throw Error(Err::Arg, "unknown submodule");
}

SavingCheck merged_saving(const CostParams& cp) {
    SavingCheck s;
    s.separate = submodule_cost(Submodule::RotationSeparate, cp);
    s.merged = submodule_cost(Submodule::RotationMerged, cp);
    s.saving = s.separate - s.merged;
    const i64 lg = cp.log_n(), l = cp.level;
    // doubled to stay in integers: 2N(l lg + 3.5 lg - l + 8)
    const i64 twice = cp.N * (2 * l * lg + 7 * lg - 2 * l + 16);
    s.bound = double(twice) / 2.0;
    s.holds = 2 * s.saving >= twice;
    return s;
}

CostBreakdown& CostBreakdown::operator+=(const CostBreakdown& o) {
    rescale += o.rescale;
    decompose += o.decompose;
    multsum += o.multsum;
    moddown += o.moddown;
    moddown_rescale += o.moddown_rescale;
    return *this;
}

CostReport& CostReport::operator+=(const CostReport& o) {
    auto merge = [](std::vector<i64>& a, const std::vector<i64>& b) {
        if (a.size() < b.size()) a.resize(b.size(), 0);
        for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    };
    merge(rotations_per_level, o.rotations_per_level);
    merge(scalar_mult_per_level, o.scalar_mult_per_level);
    keys.insert(o.keys.begin(), o.keys.end());
    depth += o.depth;
    rotations += o.rotations;
    breakdown += o.breakdown;
    total = breakdown.total();
    cmult += o.cmult;
    cmult_count += o.cmult_count;
    return *this;
}

int scheduled_level(const CostParams& base, int t) {
    int l = base.L - 1 - t;
    if (l < 0) throw Error(Err::Depth, "network level exceeds the modulus chain");
    return l;
}

namespace {

CostReport from_counts(const std::vector<i64>& per_level, const CostParams& base, bool merged) {
    CostReport r;
    r.rotations_per_level = per_level;
    r.scalar_mult_per_level.assign(per_level.size(), 0);
    for (size_t i = 0; i < per_level.size(); ++i) {
        if (per_level[i] == 0) continue;
        CostParams cp = base;
        cp.level = scheduled_level(base, (int)i + 1);
        CostBreakdown b = rotation_breakdown(merged, cp);
        CostBreakdown scaled;
        scaled.rescale = b.rescale * per_level[i];
        scaled.decompose = b.decompose * per_level[i];
        scaled.multsum = b.multsum * per_level[i];
        scaled.moddown = b.moddown * per_level[i];
        scaled.moddown_rescale = b.moddown_rescale * per_level[i];
        r.breakdown += scaled;
        r.scalar_mult_per_level[i] = scaled.total();
        r.rotations += per_level[i];
    }
    r.total = r.breakdown.total();
    return r;
}

void add_masks(CostReport& r, const Ledger& led, const CostParams& base) {
    for (int lvl : led.cmult_levels) {
        CostParams cp = base;
        cp.level = std::min(lvl, base.L - 1);
        r.cmult += submodule_cost(Submodule::CMult, cp);
    }
    r.cmult_count = led.cmults;
}

CostReport network_cost_impl(const MultiGroupNetwork& net, const CostParams& base, bool merged) {
    RotationProfile prof = rotation_profile(net);
    CostReport r = from_counts(prof.per_level, base, merged);
    r.keys = prof.keys;
    r.depth = prof.depth;
    Ledger led;
    {
        LedgerScope scope(led);
        evaluate_network(net, SlotVector(Vec(net.n, 0), base.L - 1));
    }
    add_masks(r, led, base);
    return r;
}

}  // namespace

CostReport network_cost(const MultiGroupNetwork& net, const CostParams& base) {
    return network_cost_impl(net, base, true);
}

CostReport network_cost_separate(const MultiGroupNetwork& net, const CostParams& base) {
    return network_cost_impl(net, base, false);
}

CostReport benes_cost(const BenesChain& chain, const CostParams& base) {
    BenesStats st = benes_stats(chain);
    CostReport r = from_counts(st.per_level, base, false);
    r.keys = st.keys;
    r.depth = chain.depth();
    Ledger led;
    {
        LedgerScope scope(led);
        evaluate_benes(chain, SlotVector(Vec(chain.n, 0), base.L - 1));
    }
    add_masks(r, led, base);
    return r;
}

CostReport chain_cost(const DecompositionChain& chain, const CostParams& base) {
    Ledger led;
    SlotVector out;
    {
        LedgerScope scope(led);
        out = chain.apply(SlotVector(Vec(chain.n, 0), base.L - 1));
    }
    CostReport r;
    for (const auto& ev : led.rotations) {
        CostParams cp = base;
        // a merged rotation consumes the level it rescales away
        cp.level = ev.merged ? ev.level - 1 : ev.level;
        if (cp.level < 0) throw Error(Err::Depth, "rotation below level 0");
        r.breakdown += rotation_breakdown(ev.merged, cp);
        size_t idx = std::max(0, ev.tag - 1);
        if (r.rotations_per_level.size() <= idx) {
            r.rotations_per_level.resize(idx + 1, 0);
            r.scalar_mult_per_level.resize(idx + 1, 0);
        }
        r.rotations_per_level[idx]++;
        r.scalar_mult_per_level[idx] += rotation_breakdown(ev.merged, cp).total();
        r.rotations++;
    }
    r.total = r.breakdown.total();
    r.keys = led.keys();
    r.depth = out.depth_used;
    add_masks(r, led, base);
    return r;
}

double profile_cost(const std::vector<double>& per_level, const CostParams& base, bool merged) {
    double s = 0;
    for (size_t i = 0; i < per_level.size(); ++i) {
        if (per_level[i] == 0) continue;
        CostParams cp = base;
        cp.level = scheduled_level(base, (int)i + 1);
        s += per_level[i] * double(rotation_breakdown(merged, cp).total());
    }
    return s;
}

std::string cost_report_json(const CostReport& r) {
    nlohmann::ordered_json j;
    j["rotations_per_level"] = r.rotations_per_level;
    j["scalar_mult_per_level"] = r.scalar_mult_per_level;
    j["keys"] = std::vector<i64>(r.keys.begin(), r.keys.end());
    j["depth"] = r.depth;
    j["rotations"] = r.rotations;
    j["breakdown"] = {{"rescale", r.breakdown.rescale},
                      {"decompose", r.breakdown.decompose},
                      {"multsum", r.breakdown.multsum},
                      {"moddown", r.breakdown.moddown},
                      {"moddown_rescale", r.breakdown.moddown_rescale}};
    j["total_scalar_mult"] = r.total;
    j["cmult_count"] = r.cmult_count;
    j["cmult_scalar_mult"] = r.cmult;
    return j.dump(2);
}

std::string cost_report_csv(const CostReport& r, const std::string& scheme) {
    std::ostringstream os;
    os << "scheme,level,rotations,scalar_mult\n";
    for (size_t i = 0; i < r.rotations_per_level.size(); ++i)
        os << scheme << ',' << i + 1 << ',' << r.rotations_per_level[i] << ','
           << (i < r.scalar_mult_per_level.size() ? r.scalar_mult_per_level[i] : 0) << '\n';
    os << scheme << ",total," << r.rotations << ',' << r.total << '\n';
    return os.str();
}

}  // namespace hperm
