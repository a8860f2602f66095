#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treelab/graph.hpp"

namespace treelab {

class EqualBoundaryPoints : public std::runtime_error {
public:
    explicit EqualBoundaryPoints(const std::string& what) : std::runtime_error(what) {}
};

// Vertex of the universal-cover tree: non-backtracking oriented-edge word
// starting at the lift of base_vertex. Empty word = the base lift itself.
struct TreeVertex {
    std::vector<int> word;

    bool operator==(const TreeVertex& o) const { return word == o.word; }
    bool operator<(const TreeVertex& o) const { return word < o.word; }
};

// Point of the tree. edge == -1 means the vertex given by `word`; otherwise
// the point sits at distance `offset` from that vertex along `edge` (an
// oriented quotient edge outgoing at the projected vertex). Canonical form:
// offset in (0, length) and `word` is the endpoint nearer the base, so edge
// never backtracks against the last letter of word.
struct TreePoint {
    std::vector<int> word;
    int edge = -1;
    double offset = 0.0;

    bool is_vertex() const { return edge < 0; }
    bool operator==(const TreePoint& o) const {
        return word == o.word && edge == o.edge && offset == o.offset;
    }
};

// Boundary point: the end of the geodesic ray (from the base lift) spelled by
// prefix followed by period repeated forever.
struct BoundaryRay {
    std::vector<int> prefix;
    std::vector<int> period;  // nonempty

    bool operator==(const BoundaryRay& o) const {
        return prefix == o.prefix && period == o.period;
    }
};

// One maximal run of a geodesic along a single oriented edge: travel in the
// direction of `edge` from arc-length parameter a to b (0 <= a < b <= length).
struct EdgeTraversal {
    int edge;
    double a;
    double b;
};

struct GeodesicSegment {
    TreePoint start;
    TreePoint end;
    double length = 0.0;
    std::vector<EdgeTraversal> steps;
};

TreePoint make_vertex_point(std::vector<int> word);
// Canonicalizes (word, edge, offset); offset may be 0 or full length, in which
// case a vertex point is returned.
TreePoint make_point(const QuotientGraph& G, std::vector<int> word, int edge, double offset);
// Quotient vertex under the covering projection.
int project(const QuotientGraph& G, const TreeVertex& v);
int project(const QuotientGraph& G, const TreePoint& p);
bool word_is_admissible(const QuotientGraph& G, const std::vector<int>& word);

BoundaryRay make_ray(const QuotientGraph& G, std::vector<int> prefix, std::vector<int> period);
// First n letters of the ray's infinite word.
std::vector<int> ray_word(const BoundaryRay& xi, std::size_t n);
TreeVertex ray_vertex(const BoundaryRay& xi, std::size_t n);
bool same_boundary_point(const BoundaryRay& xi, const BoundaryRay& zeta);

double tree_distance(const QuotientGraph& G, const TreePoint& x, const TreePoint& y);
GeodesicSegment geodesic(const QuotientGraph& G, const TreePoint& x, const TreePoint& y);
bool point_on_segment(const QuotientGraph& G, const TreePoint& y, const TreePoint& x,
                      const TreePoint& z, double tol = 1e-9);

// A ray vertex deep enough that every Gromov/Busemann/shadow query among the
// given points has stabilized.
TreeVertex deep_ray_point(const QuotientGraph& G, const BoundaryRay& xi, std::size_t extra_depth);

double gromov_product(const QuotientGraph& G, const TreePoint& x, const TreePoint& p,
                      const TreePoint& q);
double gromov_product(const QuotientGraph& G, const TreePoint& x, const BoundaryRay& p,
                      const TreePoint& q);
double gromov_product(const QuotientGraph& G, const TreePoint& x, const BoundaryRay& p,
                      const BoundaryRay& q);

double busemann(const QuotientGraph& G, const BoundaryRay& xi, const TreePoint& x,
                const TreePoint& y);

// True iff the ray from x to xi passes through y.
bool shadow_contains(const QuotientGraph& G, const TreePoint& x, const TreePoint& y,
                     const BoundaryRay& xi);

// All non-backtracking words from the base whose endpoint projects to
// qvertex and whose endpoint distance from the base is <= max_dist (the
// lifts of qvertex in the closed ball). Includes the empty word when the
// base projects to qvertex.
std::vector<std::vector<int>> lift_words(const QuotientGraph& G, int qvertex, double max_dist);

// Shortest word from the base to qvertex whose last letter is not the
// reverse of first_letter (so the concatenation stays non-backtracking);
// empty constraint when first_letter < 0.
std::vector<int> connector_word(const QuotientGraph& G, int qvertex, int first_letter = -1);

// Extends `word` (rooted at the base) to a boundary ray: repeats
// preferred_period when that is admissible after the word, else a greedy
// lexicographic admissible extension that settles into a cycle.
BoundaryRay deterministic_ray(const QuotientGraph& G, const std::vector<int>& word,
                              const std::vector<int>& preferred_period = {});

struct ClosedGeodesic {
    std::vector<int> word;  // cyclically reduced, canonical rotation
    double translation_length = 0.0;
};

struct LengthSpectrumReport {
    std::vector<ClosedGeodesic> cycles;
    bool lattice = false;            // all pairwise length ratios rational (small denominators)
    double lattice_generator = 0.0;  // approximate generator when lattice
    double diophantine_quality = 0.0;  // min over pairs of q^beta |l/l' - p/q|, q <= q_max
    double beta = 2.0;
};

// Enumerates cyclically-reduced non-backtracking closed edge words up to the
// given combinatorial length, deduplicated by cyclic rotation. The Diophantine
// figure is evidence from a finite continued-fraction scan, not a certificate.
LengthSpectrumReport length_spectrum(const QuotientGraph& G, int max_word_length,
                                     double beta = 2.0, long q_max = 10000);

}  // namespace treelab
