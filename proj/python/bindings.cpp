#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gtl/assignment.hpp"
#include "gtl/error.hpp"
#include "gtl/geometry.hpp"
#include "gtl/io.hpp"
#include "gtl/network.hpp"

namespace py = pybind11;
using namespace gtl;

namespace {

using Rows = std::vector<std::vector<double>>;

Matrix to_matrix(const Rows& rows) {
    if (rows.empty()) return {};
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) throw DimensionError("ragged rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), rows.front().size(), std::move(flat));
}

std::vector<Vector> to_vectors(const Rows& rows) {
    std::vector<Vector> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.emplace_back(r);
    return out;
}

EmpiricalMeasure to_measure(const Rows& rows) { return EmpiricalMeasure(to_vectors(rows)); }

Track to_track(const Rows& rows) { return Track(to_vectors(rows)); }

py::dict assignment_dict(const AssignmentResult& r) {
    py::dict d;
    d["permutation"] = r.permutation;
    d["total_cost"] = r.total_cost;
    return d;
}

// Opaque handle; Python code only builds, runs and inspects it.
struct PyNetwork {
    Network net;
};

}  // namespace

PYBIND11_MODULE(geotrack, m) {
    m.doc() = "Transport and track geometry of residual networks";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<NonFiniteError>(m, "NonFiniteError", base.ptr());
    py::register_exception<RangeError>(m, "RangeError", base.ptr());
    py::register_exception<SizeError>(m, "SizeError", base.ptr());
    py::register_exception<DegenerateTrackError>(m, "DegenerateTrackError", base.ptr());
    py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    m.def("solve_lap", [](const Rows& c) { return assignment_dict(solve_lap(CostMatrix(to_matrix(c)))); },
          py::arg("costs"));
    m.def("brute_force_lap",
          [](const Rows& c) { return assignment_dict(brute_force_lap(CostMatrix(to_matrix(c)))); },
          py::arg("costs"));
    m.def("wasserstein2", [](const Rows& a, const Rows& b) { return wasserstein2(to_measure(a), to_measure(b)); },
          py::arg("a"), py::arg("b"));
    m.def("ots", [](const Rows& x, const Rows& y) { return ots(to_measure(x), to_measure(y)); },
          py::arg("inputs"), py::arg("outputs"));

    m.def("lss", [](const Rows& t) { return lss(to_track(t)); }, py::arg("track"));
    m.def("lsr", [](const Rows& t) { return lsr(to_track(t)); }, py::arg("track"));
    m.def("theorem1_bound",
          [](const std::vector<double>& xp, const std::vector<double>& xq, const std::vector<double>& txp,
             const std::vector<double>& txq) {
              return theorem1_bound(Vector(xp), Vector(xq), Vector(txp), Vector(txq));
          },
          py::arg("xp"), py::arg("xq"), py::arg("txp"), py::arg("txq"));

    py::class_<PyNetwork>(m, "Network")
        .def_property_readonly("input_dim", [](const PyNetwork& n) { return n.net.input_dim(); })
        .def_property_readonly("output_dim", [](const PyNetwork& n) { return n.net.output_dim(); })
        // One sample per row in and out.
        .def("forward",
             [](const PyNetwork& n, const Rows& x) {
                 const std::vector<Vector> samples = to_vectors(x);
                 const Matrix out = forward_batch(n.net, Matrix::from_columns(samples));
                 Rows rows(out.cols(), std::vector<double>(out.rows()));
                 for (std::size_t r = 0; r < out.rows(); ++r)
                     for (std::size_t c = 0; c < out.cols(); ++c) rows[c][r] = out(r, c);
                 return rows;
             },
             py::arg("inputs"))
        // One track per stage, each a list of states.
        .def("tracks",
             [](const PyNetwork& n, const std::vector<double>& x) {
                 std::vector<Rows> out;
                 for (const Track& t : forward_with_track(n.net, Vector(x)).tracks) {
                     Rows states;
                     for (const Vector& s : t.states()) states.push_back(s.values());
                     out.push_back(std::move(states));
                 }
                 return out;
             },
             py::arg("x"))
        .def("checksum", [](const PyNetwork& n) { return model_checksum(n.net); })
        .def("weight_decay_energy", [](const PyNetwork& n) { return weight_decay_energy(n.net); });

    m.def("build_network",
          [](const std::string& type, std::size_t input_dim, const std::vector<std::size_t>& widths,
             std::size_t blocks, std::size_t output_dim, std::uint64_t seed) {
              Architecture a;
              a.type = arch_type_from_string(type);
              a.input_dim = input_dim;
              a.stage_widths = widths;
              a.blocks_per_stage = blocks;
              a.output_dim = output_dim;
              return PyNetwork{build_network(a, seed)};
          },
          py::arg("type"), py::arg("input_dim"), py::arg("stage_widths"), py::arg("blocks_per_stage"),
          py::arg("output_dim"), py::arg("seed"));
    m.def("load_checkpoint", [](const std::string& path) { return PyNetwork{load_checkpoint(path).model}; },
          py::arg("path"));

    // Parses a run config given as JSON text; raises ConfigError naming the field.
    m.def("validate_config",
          [](const std::string& text, const std::string& base_dir) {
              nlohmann::json j;
              try {
                  j = nlohmann::json::parse(text);
              } catch (const nlohmann::json::parse_error& e) {
                  throw ConfigError("$", e.what());
              }
              const RunConfig rc = parse_run_config(j, base_dir);
              py::dict d;
              d["dataset"] = to_string(rc.dataset.kind);
              d["arch"] = to_string(rc.arch.type);
              d["stage_widths"] = rc.arch.stage_widths;
              d["epochs"] = rc.train.epochs;
              d["lr"] = rc.train.lr;
              d["seed"] = rc.train.seed;
              d["gammas"] = rc.gammas;
              return d;
          },
          py::arg("text"), py::arg("base_dir") = ".");
}
