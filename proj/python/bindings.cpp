#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "indy/bench.hpp"
#include "indy/ctc.hpp"
#include "indy/data.hpp"
#include "indy/network.hpp"
#include "indy/training.hpp"

namespace py = pybind11;
using namespace indy;

namespace {

Architecture make_arch(const std::string& cell, std::size_t depth, std::size_t width,
                       std::size_t input_dim, std::size_t num_classes, double dropout) {
    Architecture a;
    a.kind = cell_kind_from_string(cell);
    a.depth = depth;
    a.width = width;
    a.input_dim = input_dim;
    a.num_classes = num_classes;
    a.dropout = dropout;
    return a;
}

}  // namespace

PYBIND11_MODULE(_indy, m) {
    m.doc() = "IndyLSTM sequence-recognition toolkit (C++ core)";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ParamError>(m, "ParamError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

    py::class_<Architecture>(m, "Architecture")
        .def(py::init(&make_arch), py::arg("cell"), py::arg("depth"), py::arg("width"),
             py::arg("input_dim"), py::arg("num_classes"), py::arg("dropout") = 0.0)
        .def_property_readonly("cell", [](const Architecture& a) { return to_string(a.kind); })
        .def_readonly("depth", &Architecture::depth)
        .def_readonly("width", &Architecture::width)
        .def_readonly("input_dim", &Architecture::input_dim)
        .def_readonly("num_classes", &Architecture::num_classes)
        .def_readonly("dropout", &Architecture::dropout);

    py::class_<Model>(m, "Model")
        .def_property_readonly("arch", [](const Model& mod) { return mod.arch; })
        .def_property_readonly("param_count", [](const Model& mod) { return enumerate_params(mod); });

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("dim", [](const Dataset& ds) { return ds.dim; })
        .def("__len__", [](const Dataset& ds) { return ds.size(); })
        .def("label", [](const Dataset& ds, std::size_t i) { return ds.samples.at(i).label; })
        .def("features", [](const Dataset& ds, std::size_t i) { return ds.samples.at(i).features; })
        .def_property_readonly("alphabet", [](const Dataset& ds) {
            std::vector<std::string> out;
            for (auto cp : ds.alphabet.symbols()) out.push_back(encode_utf8(cp));
            return out;
        });

    m.def("param_count",
          [](const std::string& kind, std::uint64_t n, std::uint64_t mm) {
              return param_count(cell_kind_from_string(kind), n, mm);
          },
          py::arg("kind"), py::arg("n"), py::arg("m"));
    m.def("model_param_count", &model_param_count, py::arg("arch"));
    m.def("layer_madds",
          [](const std::string& kind, std::uint64_t n, std::uint64_t mm) {
              return layer_madds(cell_kind_from_string(kind), n, mm);
          },
          py::arg("kind"), py::arg("n"), py::arg("m"));
    m.def("madds_per_step", &madds_per_step, py::arg("arch"));

    m.def("ctc_loss",
          [](const std::vector<Vector>& logprobs, const Labeling& label) {
              CtcResult r = ctc_loss(logprobs, label);
              return py::make_tuple(r.loss, r.grad);
          },
          py::arg("logprobs"), py::arg("label"));
    m.def("greedy_decode", &greedy_decode, py::arg("logprobs"));
    m.def("cer", &cer, py::arg("reference"), py::arg("hypothesis"));
    m.def("corpus_cer", &corpus_cer, py::arg("pairs"));

    m.def("init_model", &init_model, py::arg("arch"), py::arg("seed"));
    m.def("model_forward",
          [](const Model& model, const std::vector<Vector>& inputs) {
              return model_forward(model, inputs);
          },
          py::arg("model"), py::arg("inputs"));

    m.def("generate_dataset",
          [](std::size_t alphabet_size, std::size_t dim, double noise, std::size_t train_n,
             std::size_t val_n, std::size_t test_n, std::uint64_t seed, std::size_t label_min,
             std::size_t label_max) {
              SynthConfig cfg;
              cfg.alphabet_size = alphabet_size;
              cfg.dim = dim;
              cfg.noise_stddev = noise;
              cfg.train_count = train_n;
              cfg.val_count = val_n;
              cfg.test_count = test_n;
              cfg.seed = seed;
              cfg.label_len_min = label_min;
              cfg.label_len_max = label_max;
              SynthSplits s = generate(cfg);
              return py::make_tuple(s.train, s.validation, s.test);
          },
          py::arg("alphabet_size") = 8, py::arg("dim") = 10, py::arg("noise") = 0.05,
          py::arg("train_n") = 2000, py::arg("val_n") = 200, py::arg("test_n") = 200,
          py::arg("seed") = 0, py::arg("label_min") = 1, py::arg("label_max") = 6);
    m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));
    m.def("load_dataset", &load_dataset, py::arg("path"));

    m.def("train",
          [](const Architecture& arch, const Dataset& train_ds, const Dataset& val_ds,
             std::size_t max_steps, std::size_t eval_every, std::size_t patience,
             std::size_t batch_size, double lr, std::uint64_t seed) {
              TrainConfig cfg;
              cfg.max_steps = max_steps;
              cfg.eval_every_steps = eval_every;
              cfg.patience_steps = patience;
              cfg.batch_size = batch_size;
              cfg.learning_rate = lr;
              cfg.seed = seed;
              TrainResult r = train(init_model(arch, seed), train_ds, val_ds, nullptr, cfg);
              std::vector<py::tuple> trace;
              for (const TraceRow& row : r.trace.rows)
                  trace.push_back(py::make_tuple(row.step, row.train_loss, row.val_cer));
              return py::make_tuple(r.best.best_val_cer, r.best.best_step, r.best.model, trace);
          },
          py::arg("arch"), py::arg("train_ds"), py::arg("val_ds"), py::arg("max_steps") = 1000,
          py::arg("eval_every") = 100, py::arg("patience") = 1000, py::arg("batch_size") = 8,
          py::arg("lr") = 1e-4, py::arg("seed") = 0);
    m.def("evaluate", &evaluate, py::arg("model"), py::arg("dataset"));

    m.def("pareto_front",
          [](const std::vector<std::pair<std::uint64_t, double>>& points) {
              std::vector<SweepRow> rows;
              for (const auto& [params, cer_val] : points) {
                  SweepRow r;
                  r.param_count = params;
                  r.test_cer = cer_val;
                  rows.push_back(r);
              }
              std::vector<std::pair<std::uint64_t, double>> out;
              for (const SweepRow& r : pareto_front(rows)) out.emplace_back(r.param_count, r.test_cer);
              return out;
          },
          py::arg("points"));

    m.def("time_inference",
          [](const Model& model, std::size_t seq_len, std::size_t reps) {
              InferenceTiming t = time_inference(model, seq_len, reps);
              return py::make_tuple(t.median_us_per_step, t.p90_us_per_step, t.total_us);
          },
          py::arg("model"), py::arg("seq_len") = 32, py::arg("reps") = 5);
}
