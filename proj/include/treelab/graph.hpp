#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace treelab {

// Validation failure while ingesting a quotient-graph config.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class DegreeTooSmall : public ValidationError {
public:
    explicit DegreeTooSmall(const std::string& what) : ValidationError(what) {}
};

class NonPositiveLength : public ValidationError {
public:
    explicit NonPositiveLength(const std::string& what) : ValidationError(what) {}
};

class DanglingEndpoint : public ValidationError {
public:
    explicit DanglingEndpoint(const std::string& what) : ValidationError(what) {}
};

struct OrientedEdge {
    int id = -1;
    int reverse = -1;   // id of the opposite orientation
    int origin = -1;    // vertex id
    int terminus = -1;  // vertex id
    double length = 0.0;
};

// Finite metric graph presenting the quotient of a cocompact tree action.
// Undirected edges are stored as pairs of oriented edges; the universal
// cover is the tree of non-backtracking edge words.
class QuotientGraph {
public:
    QuotientGraph(std::vector<std::string> vertex_names,
                  std::vector<std::pair<std::pair<int, int>, double>> undirected_edges,
                  int base_vertex);

    int num_vertices() const { return static_cast<int>(vertex_names_.size()); }
    int num_oriented_edges() const { return static_cast<int>(edges_.size()); }
    const OrientedEdge& edge(int id) const { return edges_[id]; }
    const std::vector<OrientedEdge>& edges() const { return edges_; }
    int reverse(int id) const { return edges_[id].reverse; }
    int base_vertex() const { return base_vertex_; }
    const std::string& vertex_name(int v) const { return vertex_names_[v]; }

    // Oriented edges with origin v.
    const std::vector<int>& out_edges(int v) const { return out_edges_[v]; }
    int degree(int v) const { return static_cast<int>(out_edges_[v].size()); }

    double min_length() const { return min_length_; }
    double max_length() const { return max_length_; }
    int max_degree() const { return max_degree_; }

    // Non-backtracking successors of oriented edge e: edges out of t(e)
    // other than the reverse of e.
    const std::vector<int>& successors(int e) const { return successors_[e]; }

private:
    std::vector<std::string> vertex_names_;
    std::vector<OrientedEdge> edges_;
    std::vector<std::vector<int>> out_edges_;
    std::vector<std::vector<int>> successors_;
    int base_vertex_ = 0;
    double min_length_ = 0.0;
    double max_length_ = 0.0;
    int max_degree_ = 0;
};

// Parses the JSON config {vertices:[...], edges:[{u,v,length},...], base_vertex}.
// Lengths are decimal literals or the symbolic strings "sqrt2", "sqrt3", "golden".
QuotientGraph load_quotient_graph(const std::string& json_text);
QuotientGraph load_quotient_graph_file(const std::string& path);

// Built-in reference configs.
std::string theta_unit_config();
std::string theta_dio_config();

}  // namespace treelab
