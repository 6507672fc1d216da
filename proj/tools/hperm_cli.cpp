// hperm-cli: command-line front end over the hperm C API.

#include <hperm/hperm.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using ojson = nlohmann::ordered_json;

enum Exit { kOk = 0, kVerify = 1, kUsage = 2, kInternal = 3 };

struct Failure {
    int code;
    std::string msg;
};

int exit_for(hp_status s) {
    switch (s) {
        case HP_OK: return kOk;
        case HP_ERR_VERIFY: return kVerify;
        case HP_ERR_ARG:
        case HP_ERR_DIM:
        case HP_ERR_NOT_FOUND:
        case HP_ERR_IO: return kUsage;
        default: return kInternal;
    }
}

// throws unless s is OK; verification failures are returned so the report still gets written
hp_status check(hp_status s) {
    if (s == HP_OK || s == HP_ERR_VERIFY) return s;
    throw Failure{exit_for(s), std::string(hp_status_name(s)) + ": " + hp_last_error()};
}

struct CStr {
    char* p = nullptr;
    ~CStr() { hp_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

template <class T, void (*F)(T*)>
struct Handle {
    T* p = nullptr;
    ~Handle() { F(p); }
};
using Perm = Handle<hp_perm, hp_perm_free>;
using Network = Handle<hp_network, hp_network_free>;
using Benes = Handle<hp_benes, hp_benes_free>;

struct Common {
    std::string out;
    std::string format = "json";
};

struct Collapse {
    std::string spec;
    hp_collapse get() const {
        hp_collapse c{0, 0, 4};
        if (spec.empty()) return c;
        std::vector<long long> v;
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                v.push_back(std::stoll(tok));
            } catch (...) {
                throw Failure{kUsage, "--collapse expects t,b[,arity]"};
            }
        }
        if (v.size() < 2 || v.size() > 3) throw Failure{kUsage, "--collapse expects t,b[,arity]"};
        c.top = (int)v[0];
        c.bottom = (int)v[1];
        if (v.size() == 3) c.arity = v[2];
        return c;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{kUsage, "cannot read " + path};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// "a: 1" lines for scalars and scalar arrays at the top level
std::string json_to_text(const std::string& doc) {
    ojson j = ojson::parse(doc);
    std::ostringstream os;
    for (const auto& [k, v] : j.items()) {
        if (v.is_primitive()) {
            os << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
        } else if (v.is_array() && std::all_of(v.begin(), v.end(), [](const ojson& x) { return x.is_primitive(); })) {
            os << k << ":";
            for (const auto& x : v) os << ' ' << x.dump();
            os << '\n';
        } else if (v.is_object()) {
            for (const auto& [k2, v2] : v.items())
                if (v2.is_primitive()) os << k << '.' << k2 << ": " << v2.dump() << '\n';
        }
    }
    return os.str();
}

std::string csv_to_text(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::vector<size_t> width;
    std::stringstream ss(csv);
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        for (size_t i = 0; i < cells.size(); ++i) {
            if (width.size() <= i) width.push_back(0);
            width[i] = std::max(width[i], cells[i].size());
        }
        rows.push_back(cells);
    }
    std::ostringstream os;
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) {
            os << r[i];
            if (i + 1 < r.size()) os << std::string(width[i] - r[i].size() + 2, ' ');
        }
        os << '\n';
    }
    return os.str();
}

void emit(const Common& c, const std::string& name, const std::string& body, bool csv_body) {
    std::string data = body;
    std::string ext = csv_body ? "csv" : "json";
    if (c.format == "text") {
        data = csv_body ? csv_to_text(body) : json_to_text(body);
        ext = "txt";
    } else if (c.format == "csv" && !csv_body) {
        throw Failure{kUsage, "this command has no csv form; use --format json or text"};
    } else if (c.format == "json" && csv_body) {
        throw Failure{kUsage, "this command emits csv; use --format csv or text"};
    }
    std::string path = c.out;
    if (path.empty()) {
        const char* dir = std::getenv("HPERM_OUT_DIR");
        if (dir && *dir) path = (std::filesystem::path(dir) / (name + "." + ext)).string();
    }
    if (path.empty() || path == "-") {
        std::cout << data;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure{kUsage, "cannot write " + path};
    out << data;
    if (!out) throw Failure{kUsage, "write failed for " + path};
    std::cerr << "wrote " << path << '\n';
}

std::vector<int64_t> seeded_vector(int64_t n, uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0xA5A5A5A5ULL);
    std::vector<int64_t> v(n);
    for (auto& x : v) x = (int64_t)(rng() % 2001) - 1000;
    return v;
}

std::vector<int64_t> json_vector(const std::string& path) {
    try {
        return ojson::parse(slurp(path)).get<std::vector<int64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw Failure{kUsage, path + ": expected a JSON array of integers"};
    }
}

// m stacked d x d matrices, one row per line
std::vector<int64_t> read_matrices(const std::string& path, int64_t d, int64_t m) {
    std::vector<int64_t> out;
    std::stringstream ss(slurp(path));
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ls(line);
        std::string c;
        size_t before = out.size();
        while (std::getline(ls, c, ',')) {
            try {
                out.push_back(std::stoll(c));
            } catch (...) {
                throw Failure{kUsage, path + ": non-integer cell '" + c + "'"};
            }
        }
        if ((int64_t)(out.size() - before) != d) throw Failure{kUsage, path + ": every row needs d values"};
    }
    if ((int64_t)out.size() != m * d * d) throw Failure{kUsage, path + ": expected m*d rows"};
    return out;
}

void load_perm(Perm& p, const std::string& file, int64_t n, uint64_t seed) {
    if (!file.empty()) check(hp_perm_load(file.c_str(), &p.p));
    else check(hp_perm_random(n, seed, &p.p));
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-o,--out", c.out, "Report path ('-' for stdout; default $HPERM_OUT_DIR or stdout)");
    cmd->add_option("--format", c.format, "json | csv | text")->check(CLI::IsMember({"json", "csv", "text"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Permutation decomposition toolkit over a plaintext slot simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(hp_version()));

    Common common;
    std::function<int()> action;

    // search
    auto* search = app.add_subcommand("search", "Deepest ideal decomposition of a permutation");
    std::string s_perm, s_named;
    int64_t s_d = 4, s_n = 0;
    search->add_option("--perm", s_perm, "Permutation file (JSON array or .perm)");
    search->add_option("--named", s_named, "ut | sigma | tau")->excludes("--perm");
    search->add_option("--d", s_d, "Matrix dimension for --named");
    search->add_option("--n", s_n, "Slot count for --named (default d*d)");
    add_common(search, common);
    search->callback([&] {
        action = [&] {
            if (s_perm.empty() && s_named.empty()) throw Failure{kUsage, "search needs --perm or --named"};
            Perm p;
            if (!s_perm.empty()) check(hp_perm_load(s_perm.c_str(), &p.p));
            else check(hp_perm_named(s_named.c_str(), s_d, s_n, &p.p));
            CStr report;
            hp_status s = check(hp_search(p.p, nullptr, &report.p));
            emit(common, "search", report.str(), false);
            return exit_for(s);
        };
    });

    // decompose
    auto* decompose = app.add_subcommand("decompose", "Structured decompositions (ut, gamma, xi, sigma, tau)");
    std::string d_kind;
    int64_t d_d = 4, d_n = 0;
    int d_l = 1, d_trials = 20;
    uint64_t d_seed = 1;
    bool d_verify = false;
    decompose->add_option("kind", d_kind, "ut | gamma | xi | sigma | tau")
        ->required()
        ->check(CLI::IsMember({"ut", "gamma", "xi", "sigma", "tau"}));
    decompose->add_option("--d", d_d, "Matrix dimension");
    decompose->add_option("--l", d_l, "Decomposition depth");
    decompose->add_option("--n", d_n, "Slot count (default d*d, or d^3 for gamma/xi)");
    decompose->add_flag("--verify", d_verify, "Check against the reference on seeded vectors");
    decompose->add_option("--trials", d_trials, "Vectors checked by --verify");
    decompose->add_option("--seed", d_seed, "Seed for --verify");
    add_common(decompose, common);
    decompose->callback([&] {
        action = [&] {
            CStr report;
            hp_status s = check(hp_decompose_report(d_kind.c_str(), d_d, d_l, d_n, d_verify ? d_trials : 0,
                                                    d_seed, &report.p));
            emit(common, "decompose_" + d_kind, report.str(), false);
            return exit_for(s);
        };
    });

    // hmm
    auto* hmm = app.add_subcommand("hmm", "Matrix multiplication pipeline and rotation budget");
    int64_t h_d = 4, h_dp = 1, h_m = 1;
    std::string h_rep = "naive", h_a, h_b;
    uint64_t h_seed = 1;
    hmm->add_option("--d", h_d, "Matrix dimension");
    hmm->add_option("--dprime", h_dp, "Block width d' (divides d)");
    hmm->add_option("--m", h_m, "Matrix pairs multiplied in parallel");
    hmm->add_option("--replication", h_rep, "naive | d0=<k>[,d1,...]");
    hmm->add_option("--a", h_a, "CSV holding m stacked d x d matrices");
    hmm->add_option("--b", h_b, "CSV for the right operands");
    hmm->add_option("--seed", h_seed, "Seed for generated matrices");
    add_common(hmm, common);
    hmm->callback([&] {
        action = [&] {
            if (h_d < 1 || h_m < 1) throw Failure{kUsage, "--d and --m must be positive"};
            std::vector<int64_t> A, B;
            if (!h_a.empty()) A = read_matrices(h_a, h_d, h_m);
            if (!h_b.empty()) B = read_matrices(h_b, h_d, h_m);
            CStr report;
            hp_status s = check(hp_hmm_run(h_d, h_dp, h_m, h_rep.c_str(), A.empty() ? nullptr : A.data(),
                                           B.empty() ? nullptr : B.data(), h_seed, nullptr, &report.p));
            emit(common, "hmm", report.str(), false);
            return exit_for(s);
        };
    });

    // net
    auto* net = app.add_subcommand("net", "Multi-group rotation networks");
    net->require_subcommand(1);
    int64_t n_n = 1024;
    uint64_t n_seed = 7;
    int n_samples = 1, n_threads = 0;
    bool n_reduce = false;
    std::string n_perm, n_input;
    Collapse n_collapse;
    auto net_opts = [&](CLI::App* c) {
        c->add_option("--n", n_n, "Slot count (random permutation)");
        c->add_option("--seed", n_seed, "Permutation seed");
        c->add_option("--perm", n_perm, "Permutation file instead of a random one");
        c->add_flag("--reduce", n_reduce, "Apply mask reduction");
        c->add_option("--collapse", n_collapse.spec, "t,b[,arity] level collapsing (implies --reduce)");
        add_common(c, common);
    };
    auto* nbuild = net->add_subcommand("build", "Construct and serialize a network");
    net_opts(nbuild);
    nbuild->callback([&] {
        action = [&] {
            Perm p;
            load_perm(p, n_perm, n_n, n_seed);
            hp_collapse c = n_collapse.get();
            Network g;
            check(hp_network_build(p.p, n_reduce, &c, &g.p));
            CStr doc;
            check(hp_network_json(g.p, &doc.p));
            emit(common, "net_build", doc.str(), false);
            return kOk;
        };
    });
    auto* neval = net->add_subcommand("eval", "Evaluate a network and compare with the permutation");
    net_opts(neval);
    neval->add_option("--input", n_input, "JSON array input (default: seeded vector)");
    neval->callback([&] {
        action = [&] {
            Perm p;
            load_perm(p, n_perm, n_n, n_seed);
            int64_t n = 0;
            check(hp_perm_size(p.p, &n));
            hp_collapse c = n_collapse.get();
            Network g;
            check(hp_network_build(p.p, n_reduce, &c, &g.p));
            std::vector<int64_t> in = n_input.empty() ? seeded_vector(n, n_seed) : json_vector(n_input);
            if ((int64_t)in.size() != n) throw Failure{kUsage, "input length differs from the permutation"};
            std::vector<int64_t> got(n), want(n);
            check(hp_network_eval(g.p, in.data(), got.data(), n));
            check(hp_perm_apply(p.p, in.data(), want.data(), n));
            CStr prof;
            check(hp_network_profile_json(g.p, &prof.p));
            ojson j;
            j["n"] = n;
            j["output"] = got;
            j["matches"] = got == want;
            j["profile"] = ojson::parse(prof.str());
            emit(common, "net_eval", j.dump(2) + "\n", false);
            return got == want ? kOk : kVerify;
        };
    });
    auto* nprof = net->add_subcommand("profile", "Per-level rotation profile");
    net_opts(nprof);
    nprof->add_option("--samples", n_samples, "Random permutations averaged (ignored with --perm)");
    nprof->add_option("--threads", n_threads, "Worker threads (0: all cores)");
    nprof->callback([&] {
        action = [&] {
            hp_collapse c = n_collapse.get();
            CStr doc;
            if (!n_perm.empty() || n_reduce) {
                Perm p;
                load_perm(p, n_perm, n_n, n_seed);
                Network g;
                check(hp_network_build(p.p, n_reduce, &c, &g.p));
                check(hp_network_profile_json(g.p, &doc.p));
            } else {
                check(hp_network_sample_profile(n_n, n_samples, n_seed, n_threads, &c, &doc.p));
            }
            emit(common, "net_profile", doc.str(), false);
            return kOk;
        };
    });

    // benes
    auto* benes = app.add_subcommand("benes", "Benes-network baseline");
    int64_t b_n = 1024, b_keys = 0;
    uint64_t b_seed = 7;
    int b_depth = 0;
    std::string b_perm;
    benes->add_option("--n", b_n, "Slot count (random permutation)");
    benes->add_option("--seed", b_seed, "Permutation seed");
    benes->add_option("--perm", b_perm, "Permutation file instead of a random one");
    benes->add_option("--depth", b_depth, "Collapsed depth (default log n - 1)");
    benes->add_option("--keys", b_keys, "Rotation key budget (default log n, negative: unrestricted)");
    add_common(benes, common);
    benes->callback([&] {
        action = [&] {
            Perm p;
            load_perm(p, b_perm, b_n, b_seed);
            int64_t n = 0;
            check(hp_perm_size(p.p, &n));
            Benes b;
            check(hp_benes_build(p.p, b_depth, b_keys, &b.p));
            std::vector<int64_t> in = seeded_vector(n, b_seed), got(n), want(n);
            check(hp_benes_eval(b.p, in.data(), got.data(), n));
            check(hp_perm_apply(p.p, in.data(), want.data(), n));
            CStr doc;
            check(hp_benes_json(b.p, &doc.p));
            ojson j = ojson::parse(doc.str());
            j["matches"] = got == want;
            emit(common, "benes", j.dump(2) + "\n", false);
            return got == want ? kOk : kVerify;
        };
    });

    // bench
    auto* bench = app.add_subcommand("bench", "Per-level rotation and ScalarMult means over random permutations");
    std::vector<int64_t> k_sizes{1024, 2048, 4096};
    int k_samples = 20, k_threads = 0;
    uint64_t k_seed = 7;
    bool k_no_benes = false;
    Collapse k_collapse;
    bench->add_option("--sizes", k_sizes, "Slot counts")->delimiter(',');
    bench->add_option("--samples", k_samples, "Permutations per size");
    bench->add_option("--seed", k_seed, "Base seed");
    bench->add_option("--threads", k_threads, "Worker threads (0: all cores)");
    bench->add_option("--collapse", k_collapse.spec, "t,b[,arity] applied to our networks");
    bench->add_flag("--no-benes", k_no_benes, "Skip the Benes baseline");
    add_common(bench, common);
    bench->callback([&] {
        action = [&] {
            if (common.format == "json") common.format = "csv";
            hp_collapse c = k_collapse.get();
            CStr csv;
            check(hp_bench_csv(k_sizes.data(), (int)k_sizes.size(), k_samples, k_seed, k_threads, &c,
                               k_no_benes ? 0 : 1, &csv.p));
            emit(common, "bench", csv.str(), true);
            return kOk;
        };
    });

    // verify
    auto* verify = app.add_subcommand("verify", "Oracle-equivalence suite over every decomposition path");
    bool v_all = false;
    int64_t v_nmax = 1024;
    int v_instances = 100, v_threads = 0;
    uint64_t v_seed = 1;
    verify->add_flag("--all", v_all, "Run every check (the only suite)");
    verify->add_option("--n-max", v_nmax, "Largest slot count");
    verify->add_option("--instances", v_instances, "Seeded instances per path");
    verify->add_option("--seed", v_seed, "Base seed");
    verify->add_option("--threads", v_threads, "Worker threads (0: all cores)");
    add_common(verify, common);
    verify->callback([&] {
        action = [&] {
            CStr report;
            hp_status s = check(hp_verify_all(v_nmax, v_instances, v_seed, v_threads, &report.p));
            emit(common, "verify", report.str(), false);
            if (s != HP_OK) std::cerr << "verification failed: " << hp_last_error() << '\n';
            return exit_for(s);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    try {
        return action ? action() : kUsage;
    } catch (const Failure& f) {
        std::cerr << "error: " << f.msg << '\n';
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInternal;
    }
}
