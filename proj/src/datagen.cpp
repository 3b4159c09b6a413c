#include "snnts/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "snnts/random.hpp"

namespace snnts {

namespace {

constexpr std::uint64_t kBackgroundStream = 11;
constexpr std::uint64_t kSourceStream = 12;
constexpr std::uint64_t kChoiceStream = 13;

double poisson(Rng& rng, double mean) {
    if (!(mean > 0.0)) return 0.0;
    return static_cast<double>(std::poisson_distribution<long>(mean)(rng));
}

std::vector<double> envelope(const SourceTemplate& source) {
    std::vector<double> e(static_cast<std::size_t>(source.duration));
    const double center = (source.duration - 1) / 2.0;
    const double sigma = source.sigma_fraction * source.duration;
    for (std::size_t t = 0; t < e.size(); ++t) {
        const double u = (static_cast<double>(t) - center) / sigma;
        e[t] = std::exp(-0.5 * u * u);
    }
    const double sum = std::accumulate(e.begin(), e.end(), 0.0);
    for (auto& v : e) v /= sum;
    return e;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
}

}  // namespace

double source_counts_for_snr(double snr, double background_counts) {
    if (snr < 0.0 || background_counts < 0.0) throw std::invalid_argument("snr and background must be non-negative");
    return (snr * snr + snr * std::sqrt(snr * snr + 4.0 * background_counts)) / 2.0;
}

double expected_background(const BackgroundModel& model, int duration) {
    return std::accumulate(model.base_rate.begin(), model.base_rate.end(), 0.0) * duration;
}

Run gen_background(const BackgroundModel& model, std::size_t steps, double stride_seconds, std::uint64_t seed) {
    if (steps == 0) throw std::invalid_argument("a run needs at least one step");
    if (model.base_rate.empty()) throw std::invalid_argument("background model has no channels");
    for (double r : model.base_rate)
        if (!(r > 0.0)) throw std::invalid_argument("background rates must be positive");

    Rng rng(derive_seed(seed, {kBackgroundStream}));
    const auto n = model.channels();
    std::vector<double> phase(n);
    for (auto& p : phase) p = uniform01(rng) * 2.0 * std::numbers::pi;

    Run run;
    run.variables = n;
    run.stride_seconds = stride_seconds;
    run.labels.assign(steps, 0);
    run.observations.resize(steps * n);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t c = 0; c < n; ++c) {
            const double drift =
                1.0 + model.drift_amplitude *
                          std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / model.drift_period + phase[c]);
            run.observations[t * n + c] = poisson(rng, model.base_rate[c] * std::max(0.0, drift));
        }
    }
    return run;
}

Run inject_source(const Run& run, const BackgroundModel& model, const SourceTemplate& source,
                  const InjectionSpec& spec, std::uint64_t seed) {
    if (source.duration < 1) throw std::invalid_argument("source duration must be >= 1");
    if (spec.start + static_cast<std::size_t>(source.duration) > run.steps())
        throw std::invalid_argument("injection window overflows the run");
    if (source.channel_profile.size() != run.variables)
        throw std::invalid_argument("source profile does not match the run's channel count");

    const double total = source_counts_for_snr(spec.snr, expected_background(model, source.duration));
    const double profile_sum = std::accumulate(source.channel_profile.begin(), source.channel_profile.end(), 0.0);
    const auto e = envelope(source);

    Rng rng(derive_seed(seed, {kSourceStream}));
    Run out = run;
    out.snr = spec.snr;
    const auto n = run.variables;
    for (std::size_t k = 0; k < e.size(); ++k) {
        const auto t = spec.start + k;
        out.labels[t] = 1;
        for (std::size_t c = 0; c < n; ++c)
            out.observations[t * n + c] += poisson(rng, total * e[k] * source.channel_profile[c] / profile_sum);
    }
    return out;
}

Preset parse_preset(const std::string& text) {
    if (text == "easy") return Preset::easy;
    if (text == "hard") return Preset::hard;
    throw std::invalid_argument("unknown preset '" + text + "'");
}

std::string to_string(Preset preset) { return preset == Preset::easy ? "easy" : "hard"; }

PresetConfig preset_config(Preset preset) {
    PresetConfig cfg;
    cfg.background.base_rate = {12.0, 10.0, 9.0, 8.0, 7.0, 6.0, 5.0, 4.0};
    cfg.steps = 64;
    cfg.stride_seconds = 0.5;
    if (preset == Preset::easy) {
        cfg.background.drift_amplitude = 0.05;
        cfg.background.drift_period = 200.0;
        cfg.sources = {
            {{0.05, 0.7, 0.2, 0.05, 0.0, 0.0, 0.0, 0.0}, 8, 0.5},
            {{0.0, 0.0, 0.0, 0.05, 0.2, 0.7, 0.05, 0.0}, 8, 0.5},
        };
        cfg.snr_grid = linspace(8.0, 16.0, 8);
    } else {
        cfg.background.drift_amplitude = 0.3;
        cfg.background.drift_period = 120.0;
        cfg.sources = {
            {{0.1, 0.4, 0.3, 0.1, 0.05, 0.05, 0.0, 0.0}, 10, 0.35},
            {{0.0, 0.05, 0.1, 0.2, 0.3, 0.2, 0.1, 0.05}, 10, 0.35},
            {{0.3, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1}, 12, 0.35},
        };
        cfg.snr_grid = linspace(2.0, 16.0, 8);
    }
    return cfg;
}

Dataset build_dataset(Preset preset, const DatasetCounts& counts, std::uint64_t seed) {
    return build_dataset(preset_config(preset), counts, seed);
}

Dataset build_dataset(const PresetConfig& config, const DatasetCounts& counts, std::uint64_t seed) {
    Dataset data;
    data.stride_seconds = config.stride_seconds;
    char id[32];
    for (std::size_t i = 0; i < counts.background; ++i) {
        auto run = gen_background(config.background, config.steps, config.stride_seconds, derive_seed(seed, {0, i}));
        std::snprintf(id, sizeof id, "bg-%03zu", i);
        run.id = id;
        data.runs.push_back(std::move(run));
    }
    for (std::size_t i = 0; i < counts.source; ++i) {
        Rng choice(derive_seed(seed, {kChoiceStream, i}));
        const auto& source = config.sources[static_cast<std::size_t>(
            uniform_int(choice, 0, static_cast<int>(config.sources.size()) - 1))];
        const double snr =
            config.snr_grid[static_cast<std::size_t>(uniform_int(choice, 0, static_cast<int>(config.snr_grid.size()) - 1))];
        const auto margin = config.steps / 8;
        const auto latest = config.steps - margin - static_cast<std::size_t>(source.duration);
        const auto start = static_cast<std::size_t>(uniform_int(choice, static_cast<int>(margin), static_cast<int>(latest)));

        auto run = gen_background(config.background, config.steps, config.stride_seconds, derive_seed(seed, {1, i}));
        run = inject_source(run, config.background, source, {snr, start}, derive_seed(seed, {2, i}));
        std::snprintf(id, sizeof id, "src-%03zu", i);
        run.id = id;
        data.runs.push_back(std::move(run));
    }
    data.ranges = Dataset::observed_ranges(data.runs);
    return data;
}

}  // namespace snnts
