#include "serialize.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "netperm.hpp"

namespace hperm {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Err::IO, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Err::IO, "cannot write " + path);
    out << data;
    if (!out) throw Error(Err::IO, "write failed: " + path);
}

Permutation parse_permutation(const std::string& text) {
    std::vector<i64> t;
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            t = json::parse(text).get<std::vector<i64>>();
        } catch (const json::exception& e) {
            throw Error(Err::Arg, std::string("bad permutation JSON: ") + e.what());
        }
    } else {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            auto b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos || line[b] == '#') continue;
            try {
                t.push_back(std::stoll(line.substr(b)));
            } catch (const std::exception&) {
                throw Error(Err::Arg, "bad permutation line: " + line);
            }
        }
    }
    Permutation p(std::move(t));
    if (!p.valid()) throw Error(Err::Arg, "targets do not form a permutation");
    return p;
}

Permutation load_permutation(const std::string& path) { return parse_permutation(read_file(path)); }

std::string permutation_json(const Permutation& p) { return json(p.targets).dump(); }

Vec parse_vector(const std::string& text) {
    try {
        return json::parse(text).get<Vec>();
    } catch (const json::exception& e) {
        throw Error(Err::Arg, std::string("bad vector JSON: ") + e.what());
    }
}

namespace {

ordered_json diag_json(const DiagMatrix& m) {
    ordered_json d = ordered_json::object();
    for (const auto& [k, rows] : m.diags) {
        bool unit = true;
        for (const auto& [r, v] : rows) unit &= v == 1;
        ordered_json arr = ordered_json::array();
        for (const auto& [r, v] : rows) {
            if (unit) arr.push_back(r);
            else arr.push_back({r, v});
        }
        d[std::to_string(k)] = arr;
    }
    return d;
}

}  // namespace

std::string chain_json(const DecompositionChain& chain) {
    ordered_json j;
    j["n"] = chain.n;
    j["depth"] = chain.depth;
    j["factors"] = ordered_json::array();
    for (const auto& f : chain.factors) {
        ordered_json o;
        o["diags"] = diag_json(f.m);
        if (f.strategy == Strategy::Bsgs) o["strategy"] = "bsgs";
        j["factors"].push_back(o);
    }
    if (!chain.final_mask.empty()) j["final_mask"] = chain.final_mask;
    return j.dump(2);
}

DecompositionChain parse_chain(const std::string& text) {
    DecompositionChain c;
    try {
        json j = json::parse(text);
        c.n = j.at("n").get<i64>();
        c.depth = j.value("depth", 0);
        for (const auto& f : j.at("factors")) {
            ChainFactor cf;
            cf.m = DiagMatrix(c.n);
            for (const auto& [key, rows] : f.at("diags").items()) {
                i64 k = std::stoll(key);
                for (const auto& r : rows) {
                    i64 row = r.is_array() ? r.at(0).get<i64>() : r.get<i64>();
                    i64 val = r.is_array() ? r.at(1).get<i64>() : 1;
                    if (row < 0 || row >= c.n) throw Error(Err::Dim, "row outside the chain dimension");
                    cf.m.set(row, pmod(row + k, c.n), val);
                }
            }
            if (f.value("strategy", std::string("direct")) == "bsgs") cf.strategy = Strategy::Bsgs;
            c.factors.push_back(std::move(cf));
        }
        if (j.contains("final_mask")) c.final_mask = j.at("final_mask").get<Vec>();
    } catch (const json::exception& e) {
        throw Error(Err::Arg, std::string("bad chain JSON: ") + e.what());
    }
    return c;
}

std::string network_json(const MultiGroupNetwork& net) {
    ordered_json j;
    j["n"] = net.n;
    j["reduced"] = net.reduced;
    j["collapse"] = {{"top", net.collapse.top}, {"bottom", net.collapse.bottom}, {"arity", net.collapse.arity}};
    std::vector<std::vector<int>> out_edges(net.nodes.size());
    for (size_t i = 0; i < net.edges.size(); ++i) out_edges[net.edges[i].src].push_back((int)i);
    j["input"] = {{"id", 0}, {"edges", ordered_json::array()}};
    auto edges_of = [&](int id) {
        ordered_json arr = ordered_json::array();
        for (int ei : out_edges[id]) {
            const NetEdge& e = net.edges[ei];
            ordered_json o;
            o["to"] = e.dst;
            if (e.copy) o["copy"] = true;
            else o["mask"] = e.positions;
            arr.push_back(o);
        }
        return arr;
    };
    j["input"]["edges"] = edges_of(0);
    j["groups"] = ordered_json::array();
    for (int g = 0; g < net.groups(); ++g) {
        ordered_json grp;
        grp["start"] = net.group_start[g];
        grp["bottom"] = net.group_bottom[g];
        grp["levels"] = ordered_json::array();
        for (int l = net.group_start[g] + 1; l <= net.group_bottom[g]; ++l) {
            ordered_json lv;
            lv["level"] = l;
            lv["nodes"] = ordered_json::array();
            for (size_t id = 1; id < net.nodes.size(); ++id) {
                const NetNode& nd = net.nodes[id];
                if (nd.group != g || nd.level != l) continue;
                ordered_json o;
                o["id"] = id;
                o["kind"] = nd.rotation ? "rotation" : "standby";
                if (nd.rotation) o["step"] = nd.step;
                else o["column"] = nd.column;
                o["edges"] = edges_of((int)id);
                lv["nodes"].push_back(o);
            }
            grp["levels"].push_back(lv);
        }
        j["groups"].push_back(grp);
    }
    j["outputs"] = net.outputs;
    return j.dump();
}

}  // namespace hperm
