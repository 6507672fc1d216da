#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "hperm/hperm.h"
#include "json.hpp"

using nlohmann::json;

namespace {

json take_json(char* s) {
    json j = json::parse(s);
    hp_string_free(s);
    return j;
}

}  // namespace

TEST(CApi, StatusNamesAndVersion) {
    EXPECT_STREQ(hp_status_name(HP_OK), "ok");
    EXPECT_STRNE(hp_status_name(HP_ERR_DIM), hp_status_name(HP_ERR_ARG));
    EXPECT_NE(std::string(hp_version()), "");
}

TEST(CApi, PermutationLifecycle) {
    std::vector<int64_t> t{2, 0, 1, 3};
    hp_perm* p = nullptr;
    ASSERT_EQ(hp_perm_create(t.data(), 4, &p), HP_OK);
    int64_t n = 0;
    ASSERT_EQ(hp_perm_size(p, &n), HP_OK);
    EXPECT_EQ(n, 4);
    std::vector<int64_t> in{10, 20, 30, 40}, out(4);
    ASSERT_EQ(hp_perm_apply(p, in.data(), out.data(), 4), HP_OK);
    EXPECT_EQ(out, (std::vector<int64_t>{20, 30, 10, 40}));
    EXPECT_EQ(hp_perm_apply(p, in.data(), out.data(), 3), HP_ERR_DIM);
    EXPECT_NE(std::string(hp_last_error()), "");
    std::vector<int64_t> small(2);
    EXPECT_EQ(hp_perm_targets(p, small.data(), 2), HP_ERR_DIM);
    hp_perm_free(p);
}

TEST(CApi, ArgumentErrors) {
    hp_perm* p = nullptr;
    std::vector<int64_t> bad{0, 0};
    EXPECT_EQ(hp_perm_create(bad.data(), 2, &p), HP_ERR_ARG);
    EXPECT_EQ(p, nullptr);
    EXPECT_EQ(hp_perm_create(nullptr, 2, &p), HP_ERR_ARG);
    EXPECT_EQ(hp_perm_random(8, 1, nullptr), HP_ERR_ARG);
    EXPECT_EQ(hp_perm_load("/nonexistent/perm.json", &p), HP_ERR_IO);
    EXPECT_EQ(hp_perm_named("nope", 4, 16, &p), HP_ERR_ARG);
    hp_chain* c = nullptr;
    EXPECT_EQ(hp_decompose("ut", 4, 9, 16, &c), HP_ERR_ARG);
    EXPECT_NE(std::string(hp_last_error()), "");
    hp_perm_free(nullptr);
    hp_chain_free(nullptr);
}

TEST(CApi, DecomposeAndApply) {
    hp_chain* c = nullptr;
    ASSERT_EQ(hp_decompose("ut", 4, 1, 16, &c), HP_OK);
    int depth = 0;
    ASSERT_EQ(hp_chain_depth(c, &depth), HP_OK);
    EXPECT_EQ(depth, 1);
    hp_perm* p = nullptr;
    ASSERT_EQ(hp_perm_named("ut", 4, 16, &p), HP_OK);
    std::vector<int64_t> in(16), want(16), got(16);
    for (int i = 0; i < 16; ++i) in[i] = 3 * i + 1;
    ASSERT_EQ(hp_perm_apply(p, in.data(), want.data(), 16), HP_OK);
    int64_t rot = -1;
    ASSERT_EQ(hp_chain_apply(c, in.data(), got.data(), 16, &rot), HP_OK);
    EXPECT_EQ(got, want);
    EXPECT_GT(rot, 0);
    char* s = nullptr;
    ASSERT_EQ(hp_chain_json(c, &s), HP_OK);
    json j = take_json(s);
    EXPECT_EQ(j["n"], 16);
    hp_chain_free(c);
    hp_perm_free(p);
}

TEST(CApi, DecomposeReport) {
    char* s = nullptr;
    ASSERT_EQ(hp_decompose_report("sigma", 4, 1, 16, 5, 1, &s), HP_OK);
    json j = take_json(s);
    EXPECT_EQ(j["verify"]["passed"], true);
    EXPECT_EQ(j["kind"], "sigma");
}

TEST(CApi, Search) {
    hp_perm* p = nullptr;
    ASSERT_EQ(hp_perm_named("ut", 4, 16, &p), HP_OK);
    hp_chain* c = nullptr;
    char* s = nullptr;
    ASSERT_EQ(hp_search(p, &c, &s), HP_OK);
    json j = take_json(s);
    int depth = 0;
    hp_chain_depth(c, &depth);
    EXPECT_GE(depth, 1);
    hp_chain_free(c);
    hp_perm_free(p);
}

TEST(CApi, Hmm) {
    std::vector<int64_t> A{1, 2, 3, 4}, B{5, 6, 7, 8}, C(4);
    char* s = nullptr;
    ASSERT_EQ(hp_hmm_run(2, 2, 1, "naive", A.data(), B.data(), 0, C.data(), &s), HP_OK);
    EXPECT_EQ(C, (std::vector<int64_t>{19, 22, 43, 50}));
    json j = take_json(s);
    EXPECT_EQ(j["correct"], true);
    EXPECT_EQ(hp_hmm_run(6, 1, 1, "naive", nullptr, nullptr, 1, nullptr, nullptr), HP_ERR_ARG);
}

TEST(CApi, NetworkAndBenes) {
    hp_perm* p = nullptr;
    ASSERT_EQ(hp_perm_random(256, 3, &p), HP_OK);
    std::vector<int64_t> in(256), want(256), got(256);
    for (int i = 0; i < 256; ++i) in[i] = i * i % 97;
    hp_perm_apply(p, in.data(), want.data(), 256);

    hp_collapse col{2, 3, 4};
    hp_network* net = nullptr;
    ASSERT_EQ(hp_network_build(p, 1, &col, &net), HP_OK);
    ASSERT_EQ(hp_network_eval(net, in.data(), got.data(), 256), HP_OK);
    EXPECT_EQ(got, want);
    char* s = nullptr;
    ASSERT_EQ(hp_network_profile_json(net, &s), HP_OK);
    json prof = take_json(s);
    EXPECT_TRUE(prof.contains("profile"));
    hp_network_free(net);

    hp_collapse bad{1, 1, 3};
    EXPECT_EQ(hp_network_build(p, 0, &bad, &net), HP_ERR_ARG);

    hp_benes* b = nullptr;
    ASSERT_EQ(hp_benes_build(p, 0, 0, &b), HP_OK);
    std::fill(got.begin(), got.end(), 0);
    ASSERT_EQ(hp_benes_eval(b, in.data(), got.data(), 256), HP_OK);
    EXPECT_EQ(got, want);
    hp_benes_free(b);
    hp_perm_free(p);
}

TEST(CApi, CostAndBench) {
    int64_t v = 0;
    ASSERT_EQ(hp_submodule_cost("rescale", int64_t(1) << 15, 18, 3, 16, &v), HP_OK);
    EXPECT_EQ(v, 2 * (int64_t(1) << 15) * (17 + 18 * 16));
    EXPECT_EQ(hp_submodule_cost("permute", 1024, 18, 3, 1, &v), HP_ERR_ARG);
    int64_t saving = 0;
    int holds = -1;
    ASSERT_EQ(hp_merged_saving(int64_t(1) << 15, 3, 5, &saving, &holds), HP_OK);
    EXPECT_GT(saving, 0);
    EXPECT_TRUE(holds == 0 || holds == 1);

    int64_t sizes[] = {64};
    char* csv = nullptr;
    ASSERT_EQ(hp_bench_csv(sizes, 1, 2, 7, 1, nullptr, 0, &csv), HP_OK);
    std::string text(csv);
    hp_string_free(csv);
    EXPECT_EQ(text.rfind("scheme,n,samples,level,", 0), 0u);
}

TEST(CApi, VerifySmall) {
    char* s = nullptr;
    ASSERT_EQ(hp_verify_all(32, 3, 1, 1, &s), HP_OK);
    json j = take_json(s);
    EXPECT_FALSE(j.empty());
}
