#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "snnts/datagen.hpp"
#include "snnts/encoders.hpp"
#include "snnts/ensemble.hpp"
#include "snnts/errors.hpp"
#include "snnts/evolution.hpp"
#include "snnts/inference.hpp"
#include "snnts/metrics.hpp"
#include "snnts/persistence.hpp"
#include "snnts/simulator.hpp"

namespace py = pybind11;
using namespace snnts;

namespace {

std::vector<int> ids(const std::vector<NeuronId>& v) {
    std::vector<int> out;
    for (auto id : v) out.push_back(id.value);
    return out;
}

std::vector<LabeledTrace> to_traces(const std::vector<std::vector<int>>& z,
                                    const std::vector<std::vector<std::uint8_t>>& labels, double stride) {
    if (z.size() != labels.size()) throw std::invalid_argument("z and labels must have the same number of runs");
    std::vector<LabeledTrace> out;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i].size() != labels[i].size()) throw std::invalid_argument("z and labels differ in length");
        out.push_back({z[i], labels[i], stride});
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_snnts, m) {
    m.doc() = "Spiking neural network time-series classifiers";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", m.attr("DataError").ptr());

    m.attr("MAX_NEURONS") = kMaxNeurons;
    m.attr("MAX_SYNAPSES") = kMaxSynapses;

    // ---- network -----------------------------------------------------------
    py::enum_<NeuronKind>(m, "NeuronKind")
        .value("input", NeuronKind::input)
        .value("hidden", NeuronKind::hidden)
        .value("output", NeuronKind::output);

    py::class_<Neuron>(m, "Neuron")
        .def(py::init([](int id, int threshold, int axon_delay, NeuronKind kind) {
                 return Neuron{NeuronId{id}, threshold, axon_delay, kind};
             }),
             py::arg("id"), py::arg("threshold") = 0, py::arg("axon_delay") = 0, py::arg("kind") = NeuronKind::hidden)
        .def_property(
            "id", [](const Neuron& n) { return n.id.value; }, [](Neuron& n, int v) { n.id = NeuronId{v}; })
        .def_readwrite("threshold", &Neuron::threshold)
        .def_readwrite("axon_delay", &Neuron::axon_delay)
        .def_readwrite("kind", &Neuron::kind)
        .def("__eq__", [](const Neuron& a, const Neuron& b) { return a == b; })
        .def("__repr__", [](const Neuron& n) {
            return "Neuron(id=" + std::to_string(n.id.value) + ", threshold=" + std::to_string(n.threshold) +
                   ", axon_delay=" + std::to_string(n.axon_delay) + ", kind=" + to_string(n.kind) + ")";
        });

    py::class_<Synapse>(m, "Synapse")
        .def(py::init([](int pre, int post, int weight) { return Synapse{NeuronId{pre}, NeuronId{post}, weight}; }),
             py::arg("pre"), py::arg("post"), py::arg("weight"))
        .def_property(
            "pre", [](const Synapse& s) { return s.pre.value; }, [](Synapse& s, int v) { s.pre = NeuronId{v}; })
        .def_property(
            "post", [](const Synapse& s) { return s.post.value; }, [](Synapse& s, int v) { s.post = NeuronId{v}; })
        .def_readwrite("weight", &Synapse::weight)
        .def("__eq__", [](const Synapse& a, const Synapse& b) { return a == b; });

    py::class_<Network>(m, "Network")
        .def(py::init<>())
        .def_readwrite("neurons", &Network::neurons)
        .def_readwrite("synapses", &Network::synapses)
        .def_property(
            "input_order", [](const Network& n) { return ids(n.input_order); },
            [](Network& n, const std::vector<int>& v) {
                n.input_order.clear();
                for (int id : v) n.input_order.push_back(NeuronId{id});
            })
        .def_property(
            "output", [](const Network& n) { return n.output.value; }, [](Network& n, int v) { n.output = NeuronId{v}; })
        .def("canonicalize", &Network::canonicalize)
        .def("validate", [](const Network& n) { return validate(n); })
        .def("__eq__", [](const Network& a, const Network& b) { return a == b; });

    m.def("validate", &validate, py::arg("network"));

    // ---- simulator ---------------------------------------------------------
    py::class_<SimulatorState>(m, "SimulatorState")
        .def(py::init<>())
        .def("reset", &SimulatorState::reset)
        .def("charge", [](const SimulatorState& s, int id) { return static_cast<int>(s.charge(NeuronId{id})); })
        .def_property_readonly("cycle", &SimulatorState::cycle)
        .def("__eq__", [](const SimulatorState& a, const SimulatorState& b) { return a == b; });

    m.def(
        "run_window",
        [](const Network& net, SimulatorState& state, const SpikeTrain& inputs, int tau) {
            auto res = run_window(net, state, inputs, tau);
            return py::make_tuple(res.z, res.raster.fired);
        },
        py::arg("network"), py::arg("state"), py::arg("inputs"), py::arg("tau"),
        "Advance the state by tau cycles; returns (output spike count, {neuron id: fired cycles}).");

    // ---- encoders ----------------------------------------------------------
    py::enum_<EncoderScheme>(m, "EncoderScheme").value("rate", EncoderScheme::rate).value("spikes", EncoderScheme::spikes);

    py::class_<VariableRange>(m, "VariableRange")
        .def(py::init([](double lo, double hi) { return VariableRange{lo, hi}; }), py::arg("min"), py::arg("max"))
        .def_readwrite("min", &VariableRange::min)
        .def_readwrite("max", &VariableRange::max);

    py::class_<EncoderSpec>(m, "EncoderSpec")
        .def(py::init([](EncoderScheme scheme, int tau, int bins, bool flip_flop, std::vector<VariableRange> ranges) {
                 EncoderSpec s{scheme, tau, bins, flip_flop, std::move(ranges)};
                 s.check();
                 return s;
             }),
             py::arg("scheme") = EncoderScheme::spikes, py::arg("tau") = 16, py::arg("bins") = 1,
             py::arg("flip_flop") = false, py::arg("ranges") = std::vector<VariableRange>{})
        .def_readwrite("scheme", &EncoderSpec::scheme)
        .def_readwrite("tau", &EncoderSpec::tau)
        .def_readwrite("bins", &EncoderSpec::bins)
        .def_readwrite("flip_flop", &EncoderSpec::flip_flop)
        .def_readwrite("ranges", &EncoderSpec::ranges)
        .def_property_readonly("input_count", &EncoderSpec::input_count);

    m.def("normalize", &normalize, py::arg("x"), py::arg("range"));
    m.def("encode_rate", &encode_rate, py::arg("xn"), py::arg("tau"));
    m.def("encode_spikes", &encode_spikes, py::arg("xn"), py::arg("tau"));
    m.def(
        "encode_observation", [](const std::vector<double>& x, const EncoderSpec& spec) { return encode_observation(x, spec); },
        py::arg("x"), py::arg("spec"));

    // ---- data --------------------------------------------------------------
    py::class_<Run>(m, "Run")
        .def(py::init<>())
        .def_readwrite("id", &Run::id)
        .def_readwrite("variables", &Run::variables)
        .def_readwrite("observations", &Run::observations)
        .def_readwrite("labels", &Run::labels)
        .def_readwrite("stride_seconds", &Run::stride_seconds)
        .def_readwrite("snr", &Run::snr)
        .def_property_readonly("steps", &Run::steps)
        .def("row", [](const Run& r, std::size_t t) {
            if (t >= r.steps()) throw py::index_error("step out of range");
            auto row = r.row(t);
            return std::vector<double>(row.begin(), row.end());
        });

    py::class_<Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_readwrite("ranges", &Dataset::ranges)
        .def_readwrite("stride_seconds", &Dataset::stride_seconds)
        .def_readwrite("runs", &Dataset::runs)
        .def_property_readonly("variables", &Dataset::variables);

    m.def(
        "build_dataset",
        [](const std::string& preset, std::size_t background, std::size_t source, std::uint64_t seed) {
            return build_dataset(parse_preset(preset), {background, source}, seed);
        },
        py::arg("preset") = "easy", py::arg("background") = 10, py::arg("source") = 20, py::arg("seed") = 0);
    m.def("source_counts_for_snr", &source_counts_for_snr, py::arg("snr"), py::arg("background_counts"));
    m.def("save_dataset", &save_dataset, py::arg("dir"), py::arg("dataset"));
    m.def("load_dataset", &load_dataset, py::arg("dir"));

    // ---- inference and metrics ---------------------------------------------
    py::class_<StepTrace>(m, "StepTrace").def_readonly("z", &StepTrace::z).def_readonly("y", &StepTrace::y);

    m.def(
        "classify_run",
        [](const Network& net, const EncoderSpec& spec, const Run& run, int theta, int window) {
            return classify_run(net, spec, run, {theta, window});
        },
        py::arg("network"), py::arg("spec"), py::arg("run"), py::arg("theta") = 0, py::arg("window") = 0);
    m.def("window_steps", &window_steps, py::arg("window_seconds"), py::arg("stride_seconds"));

    py::enum_<ScoringMode>(m, "ScoringMode").value("sample", ScoringMode::sample).value("event", ScoringMode::event);

    py::class_<ConfusionMatrix>(m, "ConfusionMatrix")
        .def(py::init([](std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) {
                 ConfusionMatrix cm;
                 cm.tp = tp;
                 cm.tn = tn;
                 cm.fp = fp;
                 cm.fn = fn;
                 return cm;
             }),
             py::arg("tp") = 0, py::arg("tn") = 0, py::arg("fp") = 0, py::arg("fn") = 0)
        .def_readwrite("tp", &ConfusionMatrix::tp)
        .def_readwrite("tn", &ConfusionMatrix::tn)
        .def_readwrite("fp", &ConfusionMatrix::fp)
        .def_readwrite("fn", &ConfusionMatrix::fn)
        .def("__eq__", [](const ConfusionMatrix& a, const ConfusionMatrix& b) { return a == b; });

    m.def("mcc", &mcc, py::arg("cm"));
    m.def("f1", &f1, py::arg("cm"));
    m.def("precision", &precision, py::arg("cm"));
    m.def("recall", &recall, py::arg("cm"));
    m.def("false_positive_rate", &false_positive_rate, py::arg("cm"));
    m.def(
        "confusion",
        [](const std::vector<std::uint8_t>& y, const std::vector<std::uint8_t>& labels, ScoringMode mode) {
            if (y.size() != labels.size()) throw std::invalid_argument("y and labels differ in length");
            return confusion(y, labels, mode);
        },
        py::arg("y"), py::arg("labels"), py::arg("mode") = ScoringMode::sample);
    m.def(
        "roc_sweep",
        [](const std::vector<std::vector<int>>& z, const std::vector<std::vector<std::uint8_t>>& labels,
           double stride_seconds, ScoringMode mode, int window) {
            std::vector<std::tuple<int, double, double>> out;
            for (const auto& p : roc_sweep(to_traces(z, labels, stride_seconds), mode, window).points)
                out.emplace_back(p.theta, p.far_per_hour, p.tpr);
            return out;
        },
        py::arg("z"), py::arg("labels"), py::arg("stride_seconds"), py::arg("mode") = ScoringMode::sample,
        py::arg("window") = 0, "List of (theta, false alarms per hour, TPR).");
    m.def(
        "best_mcc_threshold",
        [](const std::vector<std::vector<int>>& z, const std::vector<std::vector<std::uint8_t>>& labels,
           ScoringMode mode, int window) {
            const auto c = best_mcc_threshold(to_traces(z, labels, 1.0), mode, window);
            return py::make_tuple(c.theta, c.mcc);
        },
        py::arg("z"), py::arg("labels"), py::arg("mode") = ScoringMode::sample, py::arg("window") = 0);

    // ---- evolution ---------------------------------------------------------
    py::enum_<FitnessKind>(m, "FitnessKind")
        .value("mcc", FitnessKind::mcc)
        .value("f1_tpr0sq", FitnessKind::f1_plus_tpr0sq);

    py::class_<EonsParams>(m, "EonsParams")
        .def(py::init<>())
        .def_readwrite("starting_nodes", &EonsParams::starting_nodes)
        .def_readwrite("starting_edges", &EonsParams::starting_edges)
        .def_readwrite("population_size", &EonsParams::population_size)
        .def_readwrite("crossover_rate", &EonsParams::crossover_rate)
        .def_readwrite("mutation_rate", &EonsParams::mutation_rate)
        .def_readwrite("tournament_size_factor", &EonsParams::tournament_size_factor)
        .def_readwrite("tournament_best_net_factor", &EonsParams::tournament_best_net_factor)
        .def_readwrite("random_factor", &EonsParams::random_factor)
        .def_readwrite("num_mutations", &EonsParams::num_mutations)
        .def_readwrite("num_best", &EonsParams::num_best);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_fraction", &TrainConfig::batch_fraction)
        .def_readwrite("snr_gamma0", &TrainConfig::snr_gamma0)
        .def_readwrite("snr_ramp_fraction", &TrainConfig::snr_ramp_fraction)
        .def_readwrite("fitness", &TrainConfig::fitness)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("mode", &TrainConfig::mode)
        .def_readwrite("jobs", &TrainConfig::jobs);

    py::class_<ScoredNetwork>(m, "ScoredNetwork")
        .def_readonly("network", &ScoredNetwork::network)
        .def_readonly("fitness", &ScoredNetwork::fitness)
        .def_readonly("cm", &ScoredNetwork::cm);

    py::class_<EpochRecord>(m, "EpochRecord")
        .def_readonly("epoch", &EpochRecord::epoch)
        .def_readonly("best_fitness", &EpochRecord::best_fitness)
        .def_readonly("mean_fitness", &EpochRecord::mean_fitness);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("population", &TrainResult::population)
        .def_readonly("best", &TrainResult::best)
        .def_readonly("history", &TrainResult::history);

    m.def("init_population", &init_population, py::arg("params"), py::arg("n_inputs"), py::arg("seed"));
    m.def(
        "train",
        [](const Dataset& data, const EncoderSpec& spec, const EonsParams& params, const TrainConfig& cfg) {
            py::gil_scoped_release release;
            return train(data, spec, params, cfg);
        },
        py::arg("dataset"), py::arg("spec"), py::arg("params"), py::arg("config"));

    // ---- ensembles ---------------------------------------------------------
    py::enum_<Vote>(m, "Vote").value("any", Vote::any).value("majority", Vote::majority).value("unanimous", Vote::unanimous);
    m.def(
        "vote_combine", [](const std::vector<std::uint8_t>& v, Vote vote) { return vote_combine(v, vote); },
        py::arg("predictions"), py::arg("vote"));
    m.def(
        "enumerate_ensembles",
        [](std::size_t count) {
            std::vector<std::pair<std::vector<std::size_t>, Vote>> out;
            for (auto& c : enumerate_ensembles(count)) out.emplace_back(std::move(c.members), c.vote);
            return out;
        },
        py::arg("count"));

    // ---- persistence -------------------------------------------------------
    m.def(
        "format_network",
        [](const Network& net, std::optional<EncoderSpec> spec) { return format_network({net, std::move(spec), {}}); },
        py::arg("network"), py::arg("spec") = std::nullopt);
    m.def(
        "parse_network",
        [](const std::string& text) {
            auto f = parse_network(text);
            return py::make_tuple(f.network, f.encoder);
        },
        py::arg("text"), "Returns (network, encoder spec or None).");
    m.def(
        "save_network",
        [](const std::filesystem::path& path, const Network& net, std::optional<EncoderSpec> spec) {
            save_network(path, {net, std::move(spec), {}});
        },
        py::arg("path"), py::arg("network"), py::arg("spec") = std::nullopt);
    m.def(
        "load_network",
        [](const std::filesystem::path& path) {
            auto f = load_network(path);
            return py::make_tuple(f.network, f.encoder);
        },
        py::arg("path"));
}
