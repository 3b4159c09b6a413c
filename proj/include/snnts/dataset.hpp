#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snnts/encoders.hpp"

namespace snnts {

/// One labeled recording: T observations of n variables, one binary label per
/// step. Observations are stored raw (unnormalized), row-major.
struct Run {
    std::string id;
    std::size_t variables = 0;
    std::vector<double> observations;
    std::vector<std::uint8_t> labels;
    double stride_seconds = 1.0;
    std::optional<double> snr;

    std::size_t steps() const { return labels.size(); }

    std::span<const double> row(std::size_t t) const {
        return {observations.data() + t * variables, variables};
    }

    std::size_t positives() const;

    /// Throws DataError if the shape is inconsistent, a value is non-finite,
    /// or a label is not 0/1.
    void check() const;

    friend bool operator==(const Run&, const Run&) = default;
};

struct Dataset {
    std::vector<VariableRange> ranges;
    double stride_seconds = 1.0;
    std::vector<Run> runs;

    std::size_t variables() const { return ranges.size(); }

    /// Per-variable [min, max] over every observation. Degenerate variables
    /// get max = min + 1 so the range stays usable for encoding.
    static std::vector<VariableRange> observed_ranges(std::span<const Run> runs);

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace snnts
