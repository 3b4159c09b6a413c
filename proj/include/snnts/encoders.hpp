#pragma once

#include <span>
#include <string>
#include <vector>

#include "snnts/simulator.hpp"

namespace snnts {

struct VariableRange {
    double min = 0.0;
    double max = 1.0;

    friend bool operator==(const VariableRange&, const VariableRange&) = default;
};

enum class EncoderScheme { rate, spikes };

std::string to_string(EncoderScheme scheme);
EncoderScheme parse_encoder_scheme(const std::string& text);

/// How an observation vector becomes input spikes. The maximum firing rate
/// equals tau: a full-scale value yields one spike per cycle.
struct EncoderSpec {
    EncoderScheme scheme = EncoderScheme::rate;
    int tau = 16;
    int bins = 1;
    bool flip_flop = false;
    std::vector<VariableRange> ranges;

    std::size_t variables() const { return ranges.size(); }
    std::size_t input_count() const { return ranges.size() * static_cast<std::size_t>(bins); }

    /// Throws std::invalid_argument on tau < 1, bins < 1, or a range with
    /// max <= min.
    void check() const;

    friend bool operator==(const EncoderSpec&, const EncoderSpec&) = default;
};

/// (x - min) / (max - min) clamped to [0, 1]. Throws on non-finite x.
double normalize(double x, const VariableRange& range);

/// Number of spikes for a normalized amplitude: round-half-away(xn * tau).
int spike_count(double xn, int tau);

/// round(xn * tau) spikes spread evenly over the window at floor(j * tau / k).
std::vector<int> encode_rate(double xn, int tau);

/// round(xn * tau) spikes packed at cycles 0..k-1.
std::vector<int> encode_spikes(double xn, int tau);

/// Encodes one observation into n * bins spike rows, variable-major. Bin i of
/// a variable covers [min + i/b * span, min + (i+1)/b * span]; with flip-flop,
/// even bins map amplitude 1 - xn instead of xn.
SpikeTrain encode_observation(std::span<const double> x, const EncoderSpec& spec);

}  // namespace snnts
