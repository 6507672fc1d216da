#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hperm {

using i64 = std::int64_t;
using Vec = std::vector<i64>;

enum class Err { Arg = 1, Dim, Depth, NotFound, IO, Verify, Internal };

struct Error : std::runtime_error {
    Err code;
    Error(Err c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

inline bool is_pow2(i64 x) { return x > 0 && (x & (x - 1)) == 0; }

// floor(log2(x)), x >= 1
inline int ilog2(i64 x) {
    int r = 0;
    while (x > 1) { x >>= 1; ++r; }
    return r;
}

inline int clog2(i64 x) {
    int r = ilog2(x);
    return (i64(1) << r) < x ? r + 1 : r;
}

inline i64 pmod(i64 a, i64 n) {
    i64 r = a % n;
    return r < 0 ? r + n : r;
}

// representative in (-n/2, n/2]
inline i64 smod(i64 a, i64 n) {
    i64 r = pmod(a, n);
    return r > n / 2 ? r - n : r;
}

inline i64 gcd64(i64 a, i64 b) {
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b) { i64 t = a % b; a = b; b = t; }
    return a;
}

// targets[i] = j: entry i moves to position j
struct Permutation {
    std::vector<i64> targets;

    Permutation() = default;
    explicit Permutation(std::vector<i64> t);
    static Permutation identity(i64 n);
    static Permutation rotation(i64 n, i64 k);  // output = Rot(input, k)

    i64 size() const { return (i64)targets.size(); }
    bool valid() const;
    Permutation inverse() const;
    // apply this after q
    Permutation after(const Permutation& q) const;
    Vec apply(const Vec& v) const;

    bool operator==(const Permutation&) const = default;
};

struct SlotVector {
    Vec slots;
    int level = 17;
    int depth_used = 0;

    SlotVector() = default;
    explicit SlotVector(Vec s, int lvl = 17) : slots(std::move(s)), level(lvl) {}
    i64 size() const { return (i64)slots.size(); }
};

constexpr int kDefaultLevel = 17;

// ---- cost ledger -----------------------------------------------------------

struct RotEvent {
    i64 step;         // normalized to [0, n)
    i64 signed_step;  // (-n/2, n/2]
    int level;        // operand level
    bool merged;      // rotation carried a pending rescale
    int tag;
};

struct Ledger {
    std::vector<RotEvent> rotations;
    i64 cmults = 0;
    i64 mults = 0;
    i64 adds = 0;
    i64 rescales = 0;
    std::vector<int> cmult_levels;
    std::vector<int> rescale_levels;

    i64 rotation_count() const { return (i64)rotations.size(); }
    std::set<i64> keys() const;
    std::map<int, i64> rotations_by_tag() const;
    void clear() { *this = Ledger{}; }
};

// Binds a ledger to the current thread for the lifetime of the scope.
class LedgerScope {
public:
    explicit LedgerScope(Ledger& l);
    ~LedgerScope();
    LedgerScope(const LedgerScope&) = delete;
    LedgerScope& operator=(const LedgerScope&) = delete;
private:
    Ledger* prev_;
};

class TagScope {
public:
    explicit TagScope(int tag);
    ~TagScope();
private:
    int prev_;
};

Ledger* active_ledger();
int active_tag();

// ---- slot operations -------------------------------------------------------

SlotVector rotate(const SlotVector& v, i64 k);
// rotation that absorbs a pending rescale
SlotVector rotate_rescale(const SlotVector& v, i64 k);
SlotVector cmult(const SlotVector& v, const Vec& mask);
SlotVector mult(const SlotVector& a, const SlotVector& b);
SlotVector add(const SlotVector& a, const SlotVector& b);
SlotVector rescale(const SlotVector& v);
Vec rot_plain(const Vec& v, i64 k);

// ---- diagonal matrices -----------------------------------------------------

// entry (k, l) is A[l][(l + k) mod n]
struct DiagMatrix {
    i64 n = 0;
    std::map<i64, std::map<i64, i64>> diags;

    DiagMatrix() = default;
    explicit DiagMatrix(i64 dim) : n(dim) {}

    static DiagMatrix identity(i64 n);
    static DiagMatrix from_perm(const Permutation& p);

    void set(i64 row, i64 col, i64 val);
    i64 get(i64 row, i64 col) const;
    std::vector<i64> keys() const;         // normalized [0, n)
    std::vector<i64> signed_keys() const;  // (-n/2, n/2], sorted
    i64 nnz() const;
    bool is_permutation() const;
    Permutation to_perm() const;  // requires is_permutation
    Vec diagonal(i64 k) const;    // dense u_k
    bool all_ones() const;        // every stored diagonal is dense and equal to 1
    DiagMatrix operator*(const DiagMatrix& rhs) const;
    bool operator==(const DiagMatrix& o) const { return n == o.n && diags == o.diags; }
    Vec apply_plain(const Vec& v) const;
};

DiagMatrix perm_to_diag(const Permutation& p);
i64 convert_r(i64 k, i64 l, i64 kR, i64 n);

SlotVector apply_hlt_direct(const DiagMatrix& U, const SlotVector& v);

struct BsgsPlan {
    i64 a = 1;
    i64 n1 = 1;
    i64 n2 = 1;
    i64 i0 = 0;  // diag index = a * (i0 + n1*g + b)
    i64 n = 0;
    // (g, b) -> pre-rotated diagonal Rot(u_k, -a*(i0 + n1*g))
    std::map<std::pair<i64, i64>, Vec> blocks;

    i64 rotation_count() const;
};

// Plan with an explicit baby-step count; throws if the diagonals are not on {a*i}.
BsgsPlan make_bsgs_plan(const DiagMatrix& U, i64 n1, i64 a = 0);
// Search n1 for the fewest rotations.
BsgsPlan best_bsgs_plan(const DiagMatrix& U);
SlotVector apply_hlt_bsgs(const DiagMatrix& U, const BsgsPlan& plan, const SlotVector& v);
// same, with every rotation routed through rot (e.g. composed from a restricted key set)
using RotateFn = std::function<SlotVector(const SlotVector&, i64)>;
SlotVector apply_hlt_bsgs(const DiagMatrix& U, const BsgsPlan& plan, const SlotVector& v, const RotateFn& rot);

// ---- decomposition chains --------------------------------------------------

enum class Strategy { Direct, Bsgs };

struct ChainFactor {
    DiagMatrix m;
    Strategy strategy = Strategy::Direct;
    i64 n1 = 0;  // 0 = planner picks
};

// factors[0] is applied last (U = F0 F1 ... Fk)
struct DecompositionChain {
    i64 n = 0;
    int depth = 0;
    std::vector<ChainFactor> factors;
    Vec final_mask;  // optional, applied after the last factor

    DiagMatrix product() const;
    SlotVector apply(const SlotVector& v) const;
};

}  // namespace hperm
