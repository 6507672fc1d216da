#pragma once

#include "bench.hpp"

namespace hperm {

struct VerifyConfig {
    i64 n_max = 1024;
    int instances = 100;  // per decomposition path
    u64 seed = 1;
    int threads = 0;
};

struct VerifyCheck {
    std::string name;
    int instances = 0;
    int failures = 0;
    std::string detail;  // first failure
    bool passed() const { return instances > 0 && failures == 0; }
};

// Oracle equivalence of every decomposition path on seeded random instances.
std::vector<VerifyCheck> run_verify(const VerifyConfig& cfg);
std::string verify_json(const std::vector<VerifyCheck>& checks);

}  // namespace hperm
