#include "snnts/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snnts {

std::string to_string(EncoderScheme scheme) {
    return scheme == EncoderScheme::rate ? "rate" : "spikes";
}

EncoderScheme parse_encoder_scheme(const std::string& text) {
    if (text == "rate") return EncoderScheme::rate;
    if (text == "spikes") return EncoderScheme::spikes;
    throw std::invalid_argument("unknown encoder scheme '" + text + "'");
}

void EncoderSpec::check() const {
    if (tau < 1) throw std::invalid_argument("encoder tau must be >= 1");
    if (bins < 1) throw std::invalid_argument("encoder bins must be >= 1");
    if (ranges.empty()) throw std::invalid_argument("encoder has no variable ranges");
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        if (!(ranges[i].max > ranges[i].min) || !std::isfinite(ranges[i].min) || !std::isfinite(ranges[i].max))
            throw std::invalid_argument("variable " + std::to_string(i) + " has an empty or non-finite range");
    }
}

double normalize(double x, const VariableRange& range) {
    if (!std::isfinite(x)) throw std::invalid_argument("cannot normalize a non-finite value");
    return std::clamp((x - range.min) / (range.max - range.min), 0.0, 1.0);
}

int spike_count(double xn, int tau) {
    return static_cast<int>(std::lround(std::clamp(xn, 0.0, 1.0) * tau));
}

std::vector<int> encode_rate(double xn, int tau) {
    const int k = spike_count(xn, tau);
    std::vector<int> cycles(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) cycles[static_cast<std::size_t>(j)] = j * tau / k;
    return cycles;
}

std::vector<int> encode_spikes(double xn, int tau) {
    const int k = spike_count(xn, tau);
    std::vector<int> cycles(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) cycles[static_cast<std::size_t>(j)] = j;
    return cycles;
}

SpikeTrain encode_observation(std::span<const double> x, const EncoderSpec& spec) {
    if (x.size() != spec.variables()) {
        throw std::invalid_argument("observation has " + std::to_string(x.size()) + " variables, encoder expects " +
                                    std::to_string(spec.variables()));
    }
    SpikeTrain train;
    train.reserve(spec.input_count());
    const double b = spec.bins;
    for (std::size_t v = 0; v < x.size(); ++v) {
        if (!std::isfinite(x[v])) throw std::invalid_argument("non-finite observation value");
        const auto& r = spec.ranges[v];
        const double span = r.max - r.min;
        for (int i = 0; i < spec.bins; ++i) {
            const VariableRange bin{r.min + i / b * span, r.min + (i + 1) / b * span};
            double xn = normalize(x[v], bin);
            if (spec.flip_flop && i % 2 == 0) xn = 1.0 - xn;
            train.push_back(spec.scheme == EncoderScheme::rate ? encode_rate(xn, spec.tau)
                                                               : encode_spikes(xn, spec.tau));
        }
    }
    return train;
}

}  // namespace snnts
