#include "snnts/inference.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "snnts/errors.hpp"
#include "snnts/parallel.hpp"

namespace snnts {

EncodedRun encode_run(const Run& run, const EncoderSpec& spec) {
    if (run.variables != spec.variables()) {
        throw DataError("run '" + run.id + "' has " + std::to_string(run.variables) +
                        " variables, encoder expects " + std::to_string(spec.variables()));
    }
    EncodedRun out;
    out.steps.reserve(run.steps());
    for (std::size_t t = 0; t < run.steps(); ++t) out.steps.push_back(encode_observation(run.row(t), spec));
    return out;
}

std::vector<int> output_counts(const Simulator& sim, const EncodedRun& run, int tau) {
    SimulatorState state;
    std::vector<int> z;
    z.reserve(run.steps.size());
    for (const auto& train : run.steps) z.push_back(sim.run_window(state, train, tau));
    return z;
}

std::vector<long> rolling_sum(std::span<const int> z, int window) {
    std::vector<long> out(z.size());
    long sum = 0;
    const auto w = static_cast<std::size_t>(std::max(window, 1));
    for (std::size_t t = 0; t < z.size(); ++t) {
        sum += z[t];
        if (t >= w) sum -= z[t - w];
        out[t] = sum;
    }
    return out;
}

std::vector<std::uint8_t> threshold(std::span<const long> windowed, int theta) {
    std::vector<std::uint8_t> y(windowed.size());
    for (std::size_t t = 0; t < windowed.size(); ++t) y[t] = windowed[t] > theta ? 1 : 0;
    return y;
}

int window_steps(double window_seconds, double stride_seconds) {
    if (!(stride_seconds > 0.0)) throw std::invalid_argument("stride must be positive");
    if (window_seconds < 0.0) throw std::invalid_argument("window must be non-negative");
    return static_cast<int>(std::lround(window_seconds / stride_seconds));
}

namespace {

void check_interface(const Network& network, const EncoderSpec& spec) {
    if (network.input_order.size() != spec.input_count()) {
        throw DataError("network has " + std::to_string(network.input_order.size()) +
                        " input neurons, encoder produces " + std::to_string(spec.input_count()));
    }
}

StepTrace classify_encoded(const Simulator& sim, const EncodedRun& encoded, int tau, const ClassifierConfig& cfg) {
    StepTrace trace;
    trace.z = output_counts(sim, encoded, tau);
    trace.y = threshold(rolling_sum(trace.z, cfg.window), cfg.theta);
    return trace;
}

}  // namespace

StepTrace classify_run(const Network& network, const EncoderSpec& spec, const Run& run,
                       const ClassifierConfig& cfg) {
    check_interface(network, spec);
    const Simulator sim(network);
    return classify_encoded(sim, encode_run(run, spec), spec.tau, cfg);
}

std::vector<StepTrace> classify_dataset(const Network& network, const EncoderSpec& spec, std::span<const Run> runs,
                                        const ClassifierConfig& cfg, unsigned jobs) {
    check_interface(network, spec);
    const Simulator sim(network);
    std::vector<StepTrace> out(runs.size());
    parallel_for(runs.size(), jobs,
                 [&](std::size_t i) { out[i] = classify_encoded(sim, encode_run(runs[i], spec), spec.tau, cfg); });
    return out;
}

}  // namespace snnts
