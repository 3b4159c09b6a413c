#include <cmath>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "snnts/datagen.hpp"

using namespace snnts;
using doctest::Approx;

TEST_CASE("source counts solve the SNR equation") {
    CHECK(source_counts_for_snr(2.0, 100.0) == Approx((4.0 + 2.0 * std::sqrt(404.0)) / 2.0));
    CHECK(source_counts_for_snr(2.0, 100.0) == Approx(22.1).epsilon(0.002));
    CHECK(source_counts_for_snr(0.0, 50.0) == 0.0);
    for (double snr : {0.1, 1.0, 3.0, 8.0, 16.0, 40.0}) {
        for (double b : {0.0, 1.0, 37.5, 488.0, 1e5}) {
            const double s = source_counts_for_snr(snr, b);
            CHECK(std::abs(s - snr * std::sqrt(s + b)) <= 1e-9 * std::max(1.0, s));
        }
    }
    CHECK_THROWS(source_counts_for_snr(-1.0, 1.0));
}

TEST_CASE("gen_background") {
    BackgroundModel model;
    model.base_rate = {3.0, 11.0};
    model.drift_amplitude = 0.0;

    const auto run = gen_background(model, 10000, 0.5, 42);
    CHECK(run.steps() == 10000);
    CHECK(run.variables == 2);
    CHECK(run.positives() == 0);
    for (std::size_t c = 0; c < 2; ++c) {
        double sum = 0.0;
        for (std::size_t t = 0; t < run.steps(); ++t) sum += run.row(t)[c];
        const double mean = sum / 10000.0;
        const double sigma = std::sqrt(model.base_rate[c] / 10000.0);
        CHECK(std::abs(mean - model.base_rate[c]) < 3.0 * sigma);
    }
    CHECK(gen_background(model, 50, 0.5, 42) == gen_background(model, 50, 0.5, 42));
    CHECK(gen_background(model, 50, 0.5, 42) != gen_background(model, 50, 0.5, 43));
    CHECK_THROWS(gen_background(model, 0, 0.5, 1));
    model.base_rate = {1.0, 0.0};
    CHECK_THROWS(gen_background(model, 5, 0.5, 1));
}

TEST_CASE("drift modulates the mean") {
    BackgroundModel model;
    model.base_rate = {200.0};
    model.drift_amplitude = 0.5;
    model.drift_period = 40.0;
    const auto run = gen_background(model, 4000, 1.0, 9);
    double lo = 1e9, hi = 0.0;
    for (std::size_t p = 0; p < 40; ++p) {
        double s = 0.0;
        for (std::size_t k = p; k < run.steps(); k += 40) s += run.row(k)[0];
        lo = std::min(lo, s / 100.0);
        hi = std::max(hi, s / 100.0);
    }
    CHECK(hi > 250.0);
    CHECK(lo < 150.0);
}

TEST_CASE("inject_source") {
    BackgroundModel model;
    model.base_rate = {4.0, 6.0};
    const SourceTemplate source{{0.25, 0.75}, 10, 0.4};
    const auto bg = gen_background(model, 40, 0.5, 1);

    SUBCASE("labels exactly the window and leaves other steps alone") {
        const auto run = inject_source(bg, model, source, {5.0, 12}, 2);
        for (std::size_t t = 0; t < run.steps(); ++t) {
            const bool inside = t >= 12 && t < 22;
            CHECK(run.labels[t] == (inside ? 1 : 0));
            if (!inside) CHECK(run.observations[t * 2] == bg.observations[t * 2]);
            for (std::size_t c = 0; c < 2; ++c) CHECK(run.row(t)[c] >= bg.row(t)[c]);
        }
        CHECK(run.snr == 5.0);
    }
    SUBCASE("window overflow and profile mismatch") {
        CHECK_THROWS_AS(inject_source(bg, model, source, {5.0, 31}, 2), std::invalid_argument);
        const SourceTemplate wrong{{1.0}, 10, 0.4};
        CHECK_THROWS_AS(inject_source(bg, model, wrong, {5.0, 0}, 2), std::invalid_argument);
    }
    SUBCASE("realized SNR over many seeds matches the request") {
        const double snr = 4.0;
        const double b = expected_background(model, source.duration);
        CHECK(b == 100.0);
        double injected = 0.0;
        const int seeds = 1000;
        for (int s = 0; s < seeds; ++s) {
            const auto run = inject_source(bg, model, source, {snr, 5}, static_cast<std::uint64_t>(s));
            for (std::size_t k = 0; k < run.observations.size(); ++k) injected += run.observations[k] - bg.observations[k];
        }
        const double s_hat = injected / seeds;
        CHECK(s_hat / std::sqrt(s_hat + b) == Approx(snr).epsilon(0.05));
    }
    SUBCASE("vanishing snr injects nothing") {
        const auto run = inject_source(bg, model, source, {1e-9, 5}, 3);
        CHECK(run.observations == bg.observations);
        CHECK(run.positives() == 10);
    }
}

TEST_CASE("build_dataset") {
    const auto data = build_dataset(Preset::easy, {10, 20}, 77);
    REQUIRE(data.runs.size() == 30);
    CHECK(data.variables() == 8);
    std::size_t with_source = 0;
    for (const auto& run : data.runs) {
        with_source += run.positives() > 0;
        CHECK(run.snr.has_value() == (run.positives() > 0));
        if (run.snr) CHECK((*run.snr >= 8.0 && *run.snr <= 16.0));
        for (std::size_t t = 0; t < run.steps(); ++t)
            for (std::size_t c = 0; c < 8; ++c) {
                CHECK(run.row(t)[c] >= data.ranges[c].min);
                CHECK(run.row(t)[c] <= data.ranges[c].max);
            }
    }
    CHECK(with_source == 20);
    CHECK(build_dataset(Preset::easy, {10, 20}, 77) == data);
    CHECK(build_dataset(Preset::easy, {10, 20}, 78) != data);

    const auto hard = preset_config(Preset::hard);
    const auto easy = preset_config(Preset::easy);
    CHECK(hard.background.drift_amplitude > easy.background.drift_amplitude);
    CHECK(hard.snr_grid.front() < easy.snr_grid.front());
    for (const auto& cfg : {easy, hard})
        for (const auto& s : cfg.sources)
            CHECK(std::accumulate(s.channel_profile.begin(), s.channel_profile.end(), 0.0) == Approx(1.0));
    CHECK(parse_preset("hard") == Preset::hard);
    CHECK_THROWS(parse_preset("medium"));
}
