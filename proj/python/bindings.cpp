#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "sgdlab/accel.hpp"
#include "sgdlab/experiment.hpp"
#include "sgdlab/objective.hpp"
#include "sgdlab/optimizer.hpp"
#include "sgdlab/rng.hpp"
#include "sgdlab/stats.hpp"
#include "sgdlab/svg_plot.hpp"
#include "sgdlab/theory.hpp"
#include "sgdlab/vec.hpp"

namespace py = pybind11;
using namespace sgdlab;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic-optimizer acceleration laboratory (C++ core)";

  // core
  py::class_<RandomStream>(m, "RandomStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("fork", &RandomStream::fork, py::arg("stream_id"))
      .def("uniform", &RandomStream::uniform)
      .def("gaussian", &RandomStream::gaussian)
      .def("uniform_index", &RandomStream::uniform_index, py::arg("n"))
      .def_property_readonly("seed", &RandomStream::seed);
  m.def("dot", &dot);
  m.def("norm_sq", &norm_sq);
  m.def("sample_gaussian", &sample_gaussian, py::arg("rng"), py::arg("d"), py::arg("b"));

  // objectives
  py::class_<Objective>(m, "Objective")
      .def("component_value", &Objective::component_value)
      .def("component_gradient", &Objective::component_gradient)
      .def("full_value", &Objective::full_value)
      .def("full_gradient", &Objective::full_gradient)
      .def("sample_component", &Objective::sample_component)
      .def("estimate_L", &Objective::estimate_L, py::arg("rng"), py::arg("num_pairs"))
      .def("estimate_sigma", &Objective::estimate_sigma, py::arg("rng"),
           py::arg("num_probes"))
      .def_property_readonly("name", &Objective::name)
      .def_property_readonly("d", &Objective::dim)
      .def_property_readonly("n", &Objective::num_components)
      .def_property_readonly("L_ref", &Objective::L_ref)
      .def_property_readonly("sigma_ref", &Objective::sigma_ref)
      .def_property_readonly("f_star_ref", &Objective::f_star_ref)
      .def_property_readonly("f_star_exact", &Objective::f_star_exact)
      .def_property_readonly("x0", &Objective::x0)
      .def("to_json", [](const Objective& o) { return o.to_json().dump(); })
      .def_static("from_json", [](const std::string& s) {
        return Objective::from_json(nlohmann::json::parse(s));
      });
  m.def(
      "make_objective",
      [](const std::string& kind, std::size_t d, std::size_t n, std::uint64_t seed,
         const std::string& options_json) {
        const ObjectiveKind k = objective_kind_from_string(kind);
        const auto opts =
            ObjectiveOptions::from_json(nlohmann::json::parse(options_json), k);
        return Objective::make(k, d, n, seed, opts);
      },
      py::arg("kind"), py::arg("d"), py::arg("n"), py::arg("seed"),
      py::arg("options_json") = "{}");
  m.def("quadratic_from", &Objective::quadratic_from, py::arg("rows"), py::arg("targets"),
        py::arg("box_halfwidth"), py::arg("f_star") = std::nullopt);

  // optimizers
  py::class_<Optimizer>(m, "Optimizer")
      .def(py::init([](const std::string& kind, std::size_t d) {
             return Optimizer::make(optimizer_kind_from_string(kind), d);
           }),
           py::arg("kind"), py::arg("d"))
      .def(py::init([](const std::string& kind, std::size_t d, double mu, double beta1,
                       double beta2, double eps) {
             OptimizerHyper h{mu, beta1, beta2, eps};
             return Optimizer(optimizer_kind_from_string(kind), d, h);
           }),
           py::arg("kind"), py::arg("d"), py::arg("mu"), py::arg("beta1"),
           py::arg("beta2"), py::arg("eps"))
      .def("propose_direction", &Optimizer::propose_direction)
      .def_property_readonly("step_count", &Optimizer::step_count);

  // accel
  py::class_<ConsistencyRecord>(m, "ConsistencyRecord")
      .def_readonly("inner", &ConsistencyRecord::inner)
      .def_readonly("gamma_k", &ConsistencyRecord::gamma_k)
      .def_readonly("gamma_l", &ConsistencyRecord::gamma_l)
      .def_readonly("residual_norm_sq", &ConsistencyRecord::residual_norm_sq)
      .def_readonly("coord_accepts", &ConsistencyRecord::coord_accepts)
      .def_readonly("coord_slots", &ConsistencyRecord::coord_slots);
  m.def("residual", &residual);
  m.def("classify", &classify);
  m.def("reject_filter", &reject_filter);
  m.def("rva_apply_full", &rva_apply_full);
  m.def("rva_apply_elementwise", &rva_apply_elementwise);
  m.def(
      "rva_wrap",
      [](const Vec& base, RandomStream& rng, const std::string& mode) {
        const RvaMode mm = mode == "full" ? RvaMode::full : RvaMode::elementwise;
        RvaResult r = rva_wrap(base, rng, mm);
        return py::make_tuple(r.direction, r.record);
      },
      py::arg("base"), py::arg("rng"), py::arg("mode") = "full");

  // theory
  auto theory = m.def_submodule("theory");
  theory.def("unified_rate", &theory::unified_rate);
  theory.def("unified_bound", &theory::unified_bound);
  theory.def("optimal_alpha", &theory::optimal_alpha);
  theory.def("reject_rate", &theory::reject_rate);
  theory.def("rva_rate", &theory::rva_rate);
  theory.def("rva_alpha", &theory::rva_alpha);
  theory.def("binom_pmf", &theory::binom_pmf);
  theory.def("binom_tail_geq", &theory::binom_tail_geq);
  theory.def("check_k_lemma", [](int T) {
    const auto r = theory::check_k_lemma(T);
    py::dict d;
    d["T"] = r.T;
    d["tail"] = r.tail;
    d["threshold"] = r.threshold;
    d["in_scope"] = r.in_scope;
    d["holds"] = r.holds;
    return d;
  });

  // stats
  m.def(
      "verify_expectation",
      [](const std::string& part, std::size_t d, double b, std::optional<Vec> x,
         std::size_t n_samples, std::uint64_t seed) {
        stats::LemmaPart p;
        if (part == "P1") p = stats::LemmaPart::P1;
        else if (part == "P2") p = stats::LemmaPart::P2;
        else if (part == "P3") p = stats::LemmaPart::P3;
        else if (part == "P4") p = stats::LemmaPart::P4;
        else if (part == "P5") p = stats::LemmaPart::P5;
        else if (part == "P6") p = stats::LemmaPart::P6;
        else throw std::invalid_argument("unknown part: " + part);
        RandomStream rng(seed);
        return stats::verify_expectation(p, d, b, x, n_samples, rng).to_json().dump();
      },
      py::arg("part"), py::arg("d"), py::arg("b"), py::arg("x"), py::arg("n_samples"),
      py::arg("seed"));
  m.def("run_lemma_suite", [](std::size_t n_samples, std::uint64_t seed) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : stats::run_lemma_suite(n_samples, seed)) arr.push_back(r.to_json());
    return arr.dump();
  });

  // harness
  m.def("run_experiment", [](const std::string& config_json, const std::string& out_dir) {
    const auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
    const RunSummary s = run_experiment(cfg);
    if (!out_dir.empty()) write_artifacts(s, out_dir);
    return s.to_json().dump();
  }, py::arg("config_json"), py::arg("out_dir") = "");
  m.def("auto_alpha", [](const std::string& config_json, std::size_t pilot_T) {
    const auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
    return auto_alpha(cfg, pilot_T).to_json().dump();
  });
  m.def("compare", [](const std::vector<std::string>& config_jsons) {
    std::vector<ExperimentConfig> cfgs;
    for (const auto& s : config_jsons) {
      cfgs.push_back(ExperimentConfig::from_json(nlohmann::json::parse(s)));
    }
    return compare(cfgs).to_json().dump();
  });
  m.def("emit_plot", [](const std::vector<std::string>& inputs, const std::string& out,
                        const std::string& column) {
    std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
    PlotOptions opts;
    opts.column = column;
    emit_plot(paths, out, opts);
  }, py::arg("inputs"), py::arg("out"), py::arg("column") = "f");
}
