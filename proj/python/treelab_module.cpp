#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "treelab/graph.hpp"
#include "treelab/thermo.hpp"
#include "treelab/tree.hpp"
#include "treelab/weyl.hpp"

namespace py = pybind11;
using namespace treelab;

PYBIND11_MODULE(pytreelab, m) {
    m.doc() = "Green functions, spectra and pressure on cocompact metric trees";

    py::register_exception<ValidationError>(m, "ValidationError");

    py::class_<QuotientGraph>(m, "QuotientGraph")
        .def_property_readonly("num_vertices", &QuotientGraph::num_vertices)
        .def_property_readonly("num_oriented_edges", &QuotientGraph::num_oriented_edges)
        .def_property_readonly("base_vertex", &QuotientGraph::base_vertex)
        .def("degree", &QuotientGraph::degree)
        .def("out_edges", &QuotientGraph::out_edges, py::return_value_policy::copy)
        .def("edge_length", [](const QuotientGraph& g, int e) { return g.edge(e).length; });

    py::class_<TreePoint>(m, "TreePoint")
        .def_property_readonly("word", [](const TreePoint& p) { return p.word; })
        .def_property_readonly("edge", [](const TreePoint& p) { return p.edge; })
        .def_property_readonly("offset", [](const TreePoint& p) { return p.offset; });

    py::class_<WeylTable>(m, "WeylTable")
        .def_property_readonly("lambda_", [](const WeylTable& w) { return w.lambda; })
        .def_property_readonly("converged", [](const WeylTable& w) { return w.converged; })
        .def_property_readonly("residual", [](const WeylTable& w) { return w.residual; });

    m.def("load_graph", &load_quotient_graph, py::arg("json_text"));
    m.def("theta_unit_config", &theta_unit_config);
    m.def("theta_dio_config", &theta_dio_config);

    m.def("vertex_point", [](std::vector<int> word) { return make_vertex_point(std::move(word)); },
          py::arg("word"));
    m.def("point", &make_point, py::arg("graph"), py::arg("word"), py::arg("edge"),
          py::arg("offset"));
    m.def("distance", &tree_distance, py::arg("graph"), py::arg("x"), py::arg("y"));

    m.def("lambda0",
          [](const QuotientGraph& g, double tol) { return lambda0_resolvent(g, tol).value(); },
          py::arg("graph"), py::arg("tol") = 1e-9);
    m.def("solve_weyl", &solve_weyl, py::arg("graph"), py::arg("lambda_"), py::arg("tol") = 1e-13,
          py::arg("max_iter") = 5'000'000);
    m.def("green", &green, py::arg("graph"), py::arg("weyl"), py::arg("x"), py::arg("y"));
    m.def("hitting_transform", &hitting_transform, py::arg("graph"), py::arg("weyl"), py::arg("x"),
          py::arg("y"));
    m.def("delta_lambda", &delta_lambda, py::arg("graph"), py::arg("weyl"));
    m.def("pressure_root",
          [](const QuotientGraph& g, const WeylTable& w, int k) {
              const auto grid = potential_grid(g, w, k);
              const auto root = pressure_root(g, grid);
              return py::make_tuple(root.s_star, root.band);
          },
          py::arg("graph"), py::arg("weyl"), py::arg("k") = 6);
}
