#include "treelab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace treelab {

QuotientGraph::QuotientGraph(std::vector<std::string> vertex_names,
                             std::vector<std::pair<std::pair<int, int>, double>> undirected_edges,
                             int base_vertex)
    : vertex_names_(std::move(vertex_names)), base_vertex_(base_vertex) {
    const int n = static_cast<int>(vertex_names_.size());
    if (n == 0) throw ValidationError("graph has no vertices");
    if (base_vertex_ < 0 || base_vertex_ >= n) throw ValidationError("base_vertex out of range");

    for (const auto& [uv, len] : undirected_edges) {
        const auto [u, v] = uv;
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw DanglingEndpoint("edge endpoint not a declared vertex");
        if (!(len > 0.0) || !std::isfinite(len))
            throw NonPositiveLength("edge length must be positive and finite");
        const int id = static_cast<int>(edges_.size());
        edges_.push_back({id, id + 1, u, v, len});
        edges_.push_back({id + 1, id, v, u, len});
    }

    out_edges_.assign(n, {});
    for (const auto& e : edges_) out_edges_[e.origin].push_back(e.id);

    min_length_ = edges_.empty() ? 0.0 : edges_[0].length;
    max_length_ = min_length_;
    for (const auto& e : edges_) {
        min_length_ = std::min(min_length_, e.length);
        max_length_ = std::max(max_length_, e.length);
    }
    max_degree_ = 0;
    for (int v = 0; v < n; ++v) {
        const int deg = static_cast<int>(out_edges_[v].size());
        max_degree_ = std::max(max_degree_, deg);
        if (deg < 3)
            throw DegreeTooSmall("vertex '" + vertex_names_[v] + "' has degree " +
                                 std::to_string(deg) + " < 3");
    }

    successors_.assign(edges_.size(), {});
    for (const auto& e : edges_) {
        for (int f : out_edges_[e.terminus])
            if (f != e.reverse) successors_[e.id].push_back(f);
    }
}

namespace {

double parse_length(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "sqrt2") return 1.4142135623730951;
        if (s == "sqrt3") return 1.7320508075688772;
        if (s == "golden") return 1.6180339887498949;
        // decimal literal in string form
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw ValidationError("unrecognized length literal '" + s + "'");
        return v;
    }
    throw ValidationError("edge length must be a number or recognized string");
}

}  // namespace

QuotientGraph load_quotient_graph(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    if (!doc.contains("vertices") || !doc.contains("edges"))
        throw ValidationError("config must contain 'vertices' and 'edges'");

    std::vector<std::string> names;
    std::map<std::string, int> index;
    for (const auto& v : doc["vertices"]) {
        const std::string name = v.is_string() ? v.get<std::string>() : v.dump();
        if (index.count(name)) throw ValidationError("duplicate vertex '" + name + "'");
        index[name] = static_cast<int>(names.size());
        names.push_back(name);
    }

    auto vertex_id = [&](const nlohmann::json& v) -> int {
        const std::string name = v.is_string() ? v.get<std::string>() : v.dump();
        auto it = index.find(name);
        if (it == index.end()) throw DanglingEndpoint("unknown vertex '" + name + "'");
        return it->second;
    };

    std::vector<std::pair<std::pair<int, int>, double>> und;
    for (const auto& e : doc["edges"]) {
        und.push_back({{vertex_id(e.at("u")), vertex_id(e.at("v"))}, parse_length(e.at("length"))});
    }

    int base = 0;
    if (doc.contains("base_vertex")) base = vertex_id(doc["base_vertex"]);
    return QuotientGraph(std::move(names), std::move(und), base);
}

QuotientGraph load_quotient_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_quotient_graph(ss.str());
}

std::string theta_unit_config() {
    return R"({"vertices":["u","v"],
  "edges":[{"u":"u","v":"v","length":1},
           {"u":"u","v":"v","length":1},
           {"u":"u","v":"v","length":1}],
  "base_vertex":"u"})";
}

std::string theta_dio_config() {
    return R"({"vertices":["u","v"],
  "edges":[{"u":"u","v":"v","length":1},
           {"u":"u","v":"v","length":"sqrt2"},
           {"u":"u","v":"v","length":2}],
  "base_vertex":"u"})";
}

}  // namespace treelab
