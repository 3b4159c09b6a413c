#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snnts/dataset.hpp"

namespace snnts {

/// Poisson counts per channel with a slow sinusoidal drift in the mean.
struct BackgroundModel {
    std::vector<double> base_rate;  // mean counts per step, one per channel
    double drift_amplitude = 0.0;   // fractional
    double drift_period = 100.0;    // steps

    std::size_t channels() const { return base_rate.size(); }
};

/// Spectral shape and duration of an injected source encounter. The temporal
/// envelope is a Gaussian centred in the window with standard deviation
/// sigma_fraction * duration.
struct SourceTemplate {
    std::vector<double> channel_profile;  // sums to 1
    int duration = 8;
    double sigma_fraction = 0.5;
};

struct InjectionSpec {
    double snr = 1.0;
    std::size_t start = 0;
};

/// Source counts S such that S / sqrt(S + B) = snr.
double source_counts_for_snr(double snr, double background_counts);

/// Expected background counts over `duration` steps (drift is zero-mean over a
/// period and is ignored).
double expected_background(const BackgroundModel& model, int duration);

/// All-background run; channel c at step t ~ Poisson(base_c * (1 + a sin(2 pi t / P + phi_c))),
/// with phases drawn from the seed.
Run gen_background(const BackgroundModel& model, std::size_t steps, double stride_seconds, std::uint64_t seed);

/// Adds a source encounter to `run` and labels the window 1. Throws
/// std::invalid_argument if the window does not fit in the run.
Run inject_source(const Run& run, const BackgroundModel& model, const SourceTemplate& source,
                  const InjectionSpec& spec, std::uint64_t seed);

enum class Preset { easy, hard };

Preset parse_preset(const std::string& text);
std::string to_string(Preset preset);

struct DatasetCounts {
    std::size_t background = 10;
    std::size_t source = 20;
};

struct PresetConfig {
    BackgroundModel background;
    std::vector<SourceTemplate> sources;
    std::vector<double> snr_grid;
    std::size_t steps = 64;
    double stride_seconds = 0.5;
};

PresetConfig preset_config(Preset preset);

/// Background-only runs followed by source runs (SNR and template drawn per
/// run); ranges are the observed per-variable min/max.
Dataset build_dataset(Preset preset, const DatasetCounts& counts, std::uint64_t seed);
Dataset build_dataset(const PresetConfig& config, const DatasetCounts& counts, std::uint64_t seed);

}  // namespace snnts
