#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snnts/dataset.hpp"
#include "snnts/encoders.hpp"
#include "snnts/network.hpp"
#include "snnts/simulator.hpp"

namespace snnts {

/// theta: a step is class 1 when the (windowed) output spike count exceeds it.
/// window: rolling-sum length in steps; 0 and 1 both mean no windowing.
struct ClassifierConfig {
    int theta = 0;
    int window = 0;
};

struct StepTrace {
    std::vector<int> z;
    std::vector<std::uint8_t> y;

    friend bool operator==(const StepTrace&, const StepTrace&) = default;
};

/// A run pre-encoded into one spike train per step. Encoding depends only on
/// the encoder, so a batch is encoded once and replayed through many networks.
struct EncodedRun {
    std::vector<SpikeTrain> steps;
};

EncodedRun encode_run(const Run& run, const EncoderSpec& spec);

/// Output spike count per step, starting from a reset state and carrying it
/// across every step of the run.
std::vector<int> output_counts(const Simulator& sim, const EncodedRun& run, int tau);

/// Sum of the last `window` entries ending at each step (shorter prefix at the
/// start). window <= 1 returns z unchanged.
std::vector<long> rolling_sum(std::span<const int> z, int window);

std::vector<std::uint8_t> threshold(std::span<const long> windowed, int theta);

/// Rolling-window length in steps for a window given in seconds (rounded to
/// the nearest whole step).
int window_steps(double window_seconds, double stride_seconds);

StepTrace classify_run(const Network& network, const EncoderSpec& spec, const Run& run,
                       const ClassifierConfig& cfg);

/// classify_run over every run, each from a fresh state; results are in input
/// order regardless of `jobs`.
std::vector<StepTrace> classify_dataset(const Network& network, const EncoderSpec& spec, std::span<const Run> runs,
                                        const ClassifierConfig& cfg, unsigned jobs = 1);

}  // namespace snnts
