// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// restrict the run to the named criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "snnts/datagen.hpp"
#include "snnts/encoders.hpp"
#include "snnts/ensemble.hpp"
#include "snnts/evolution.hpp"
#include "snnts/inference.hpp"
#include "snnts/metrics.hpp"
#include "snnts/persistence.hpp"

using namespace snnts;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

// ---------------------------------------------------------------------------

Outcome simulator_equivalence() {
    std::mt19937_64 rng(20240611);
    auto uni = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const auto t0 = Clock::now();
    int identical = 0, total = 0;
    for (int k = 0; k < 1000; ++k) {
        const int neurons = uni(2, 32);
        const int synapses = uni(0, std::min(128, neurons * neurons));
        const int inputs = uni(1, std::min(8, neurons - 1));
        const auto net = oracle::random_network(rng, neurons, synapses, inputs);
        const int tau = uni(1, 64);
        const double density = std::uniform_real_distribution<double>(0.02, 0.6)(rng);

        const Simulator sim(net);
        oracle::DenseSimulator dense(net);
        SimulatorState state;
        bool same = true;
        // two consecutive windows so that carried charge and in-flight spikes are covered
        for (int w = 0; w < 2; ++w) {
            const auto spikes = oracle::random_spikes(rng, static_cast<std::size_t>(inputs), tau, density);
            SpikeRaster raster;
            const int z = sim.run_window(state, spikes, tau, &raster);
            const auto expected = dense.run(spikes, tau);
            auto it = expected.fired.find(net.output.value);
            const int expected_z = it == expected.fired.end() ? 0 : static_cast<int>(it->second.size());
            same = same && raster == expected && z == expected_z;
        }
        for (const auto& n : net.neurons) same = same && state.charge(n.id) == dense.charge(n.id);
        identical += same;
        ++total;
    }
    const double secs = seconds_since(t0);
    return {identical == total && secs < 30.0,
            fmt("%d/%d networks identical to the dense reference, %.2f s (limit 30 s)", identical, total, secs)};
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
    std::mt19937_64 rng(77);
    int mismatches = 0;
    for (int k = 0; k < 10000; ++k) {
        LabeledTrace tr;
        tr.stride_seconds = 0.5 * (1 + static_cast<int>(rng() % 4));
        const std::size_t n = 1 + rng() % 40;
        bool label = rng() % 2;
        for (std::size_t t = 0; t < n; ++t) {
            if (rng() % 5 == 0) label = !label;
            tr.labels.push_back(label);
            tr.z.push_back(static_cast<int>(rng() % (label ? 7 : 4)));
        }
        const std::vector<LabeledTrace> traces{tr};
        const int window = static_cast<int>(rng() % 4);
        long bg_steps = 0;
        for (auto l : tr.labels) bg_steps += l == 0;
        const double hours = static_cast<double>(bg_steps) * tr.stride_seconds / 3600.0;

        for (auto mode : {ScoringMode::sample, ScoringMode::event}) {
            const auto cms = sweep_confusion(traces, mode, window);
            std::optional<RocCurve> roc;
            if (hours > 0) roc = roc_sweep(traces, mode, window);
            for (std::size_t theta = 0; theta < cms.size(); ++theta) {
                ConfusionMatrix ref;
                if (mode == ScoringMode::sample) {
                    ref = oracle::sample_confusion(traces, static_cast<int>(theta), window);
                } else {
                    std::vector<std::uint8_t> y;
                    for (std::size_t t = 0; t < n; ++t) y.push_back(oracle::windowed(tr.z, t, window) > static_cast<long>(theta));
                    ref = oracle::event_confusion(y, tr.labels);
                }
                bool ok = cms[theta] == ref;
                const auto d = [](std::uint64_t v) { return static_cast<double>(v); };
                ok = ok && close(mcc(cms[theta]), oracle::mcc(d(ref.tp), d(ref.tn), d(ref.fp), d(ref.fn)));
                ok = ok && close(f1(cms[theta]), oracle::f1(d(ref.tp), d(ref.fp), d(ref.fn)));
                if (roc) {
                    const auto& p = roc->points[theta];
                    const double tpr = ref.tp + ref.fn ? d(ref.tp) / d(ref.tp + ref.fn) : 0.0;
                    ok = ok && p.theta == static_cast<int>(theta) && close(p.far_per_hour, d(ref.fp) / hours) &&
                         close(p.tpr, tpr);
                }
                mismatches += !ok;
            }
        }
    }
    ConfusionMatrix t3;
    t3.tp = 70;
    t3.tn = 184;
    t3.fp = 36;
    t3.fn = 4;
    const double m = mcc(t3), tpr = recall(t3), fpr = false_positive_rate(t3);
    const bool table_ok = std::abs(m - 0.707) <= 0.005 && std::abs(tpr - 0.946) <= 0.001 && std::abs(fpr - 0.164) <= 0.001;
    return {mismatches == 0 && table_ok,
            fmt("10000 traces, %d mismatches against the naive reference; (70,184,36,4) gives MCC %.4f TPR %.4f FPR %.4f",
                mismatches, m, tpr, fpr)};
}

// ---------------------------------------------------------------------------

Outcome encoder_laws() {
    const int tau = 10;
    bool full = encode_rate(1.0, tau).size() == 10 && encode_spikes(1.0, tau).size() == 10;

    EncoderSpec plain;
    plain.tau = tau;
    plain.ranges = {{0.0, 1.0}};
    bool monotone = true;
    for (auto scheme : {EncoderScheme::rate, EncoderScheme::spikes}) {
        plain.scheme = scheme;
        std::size_t previous = 0;
        for (int i = 0; i <= 10000; ++i) {
            const double x[] = {i / 10000.0};
            const auto count = encode_observation(x, plain).front().size();
            monotone = monotone && count >= previous;
            previous = count;
        }
        const double top[] = {1.0};
        full = full && encode_observation(top, plain).front().size() == 10;
    }

    int checked = 0, violations = 0;
    for (auto scheme : {EncoderScheme::rate, EncoderScheme::spikes}) {
        for (int bins : {1, 2, 4}) {
            EncoderSpec ff;
            ff.scheme = scheme;
            ff.tau = tau;
            ff.bins = bins;
            ff.flip_flop = true;
            ff.ranges = {{0.0, 1.0}};
            auto noflip = ff;
            noflip.flip_flop = false;
            for (int i = 0; i <= 100; ++i) {
                const double xv[] = {i / 100.0};
                const auto flipped = encode_observation(xv, ff);
                const auto straight = encode_observation(xv, noflip);
                for (int b = 0; b < bins; ++b) {
                    const auto idx = static_cast<std::size_t>(b);
                    if (b % 2 == 1) {
                        violations += flipped[idx] != straight[idx];
                        continue;
                    }
                    const double span = 1.0 / bins;
                    const VariableRange bin{b * span, (b + 1) * span};
                    const double xn = normalize(xv[0], bin);
                    const auto expected = scheme == EncoderScheme::rate ? encode_rate(1.0 - xn, tau) : encode_spikes(1.0 - xn, tau);
                    violations += flipped[idx] != expected;
                    ++checked;
                }
                // one bin, unit range: the inverted amplitude is an exact grid point too
                if (bins == 1) {
                    const double mirrored[] = {(100 - i) / 100.0};
                    violations += flipped.front().size() != encode_observation(mirrored, noflip).front().size();
                }
            }
        }
    }
    return {full && monotone && violations == 0,
            fmt("full scale %s, monotone %s, flip-flop complement %d even-bin checks with %d violations",
                full ? "10 spikes" : "WRONG", monotone ? "yes" : "NO", checked, violations)};
}

// ---------------------------------------------------------------------------

// Shared setup for the end-to-end evolution runs.
struct EasyTask {
    Dataset train_set;
    Dataset validation;
    EncoderSpec spec;
};

EasyTask easy_task(int seed) {
    EasyTask t;
    t.train_set = build_dataset(Preset::easy, {10, 20}, 1000 + static_cast<std::uint64_t>(seed));
    t.validation = build_dataset(Preset::easy, {10, 20}, 5000 + static_cast<std::uint64_t>(seed));
    t.spec.scheme = EncoderScheme::spikes;
    t.spec.tau = 16;
    t.spec.bins = 4;
    t.spec.ranges = t.train_set.ranges;
    return t;
}

std::vector<LabeledTrace> traces_of(const Network& net, const EncoderSpec& spec, const Dataset& data) {
    std::vector<LabeledTrace> out;
    for (const auto& r : data.runs) out.push_back({classify_run(net, spec, r, {}).z, r.labels, r.stride_seconds});
    return out;
}

// Validation MCC with the threshold chosen on the training set.
double validation_mcc(const Network& net, const EasyTask& t) {
    const int theta = best_mcc_threshold(traces_of(net, t.spec, t.train_set), ScoringMode::sample).theta;
    ConfusionMatrix cm;
    for (const auto& r : t.validation.runs) {
        const auto trace = classify_run(net, t.spec, r, {theta, 0});
        cm += confusion(trace.y, r.labels, ScoringMode::sample);
    }
    return mcc(cm);
}

std::size_t best_index(std::span<const ScoredNetwork> pop) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop[i].fitness > pop[b].fitness) b = i;
    return b;
}

constexpr int kSeeds = 10;
constexpr int kCheckEvery = 5;

struct ElitismLog {
    long epochs = 0;
    long decreases = 0;
};

ElitismLog g_elitism;  // filled by the evolution runs, reported by the determinism criterion

Outcome evolution_end_to_end() {
    int passed = 0;
    double worst_secs = 0.0;
    std::string per_seed;
    for (int seed = 0; seed < kSeeds; ++seed) {
        const auto t0 = Clock::now();
        const auto task = easy_task(seed);
        EonsParams params;
        TrainConfig cfg;
        cfg.epochs = 100;
        cfg.batch_fraction = 1.0;
        cfg.fitness = FitnessKind::mcc;
        cfg.seed = static_cast<std::uint64_t>(seed);
        double best_val = -1.0;
        double last_best = -2.0;
        train(task.train_set, task.spec, params, cfg, [&](const EpochRecord& r, std::span<const ScoredNetwork> pop) {
            ++g_elitism.epochs;
            g_elitism.decreases += r.best_fitness < last_best;
            last_best = r.best_fitness;
            if ((r.epoch + 1) % kCheckEvery != 0 && r.epoch + 1 != cfg.epochs) return true;
            best_val = std::max(best_val, validation_mcc(pop[best_index(pop)].network, task));
            return best_val < 0.8;
        });
        const double secs = seconds_since(t0);
        worst_secs = std::max(worst_secs, secs);
        const bool ok = best_val >= 0.8 && secs <= 600.0;
        passed += ok;
        per_seed += fmt(" %.2f", best_val);
        std::printf("  evolution seed %d: best validation MCC %.3f in %.1f s\n", seed, best_val, secs);
        std::fflush(stdout);
    }
    return {passed >= 7, fmt("%d/%d seeds reached validation MCC >= 0.8 (need 7); MCC by seed:%s; slowest seed %.1f s",
                             passed, kSeeds, per_seed.c_str(), worst_secs)};
}

// ---------------------------------------------------------------------------

Outcome low_far_fitness() {
    int passed = 0;
    std::string per_seed;
    for (int seed = 0; seed < kSeeds; ++seed) {
        const auto t0 = Clock::now();
        const auto task = easy_task(seed);
        EonsParams params;
        TrainConfig cfg;
        cfg.epochs = 100;
        cfg.batch_fraction = 1.0;
        cfg.fitness = FitnessKind::f1_plus_tpr0sq;
        cfg.seed = static_cast<std::uint64_t>(seed);
        double tpr0 = 0.0;
        double last_best = -2.0;
        train(task.train_set, task.spec, params, cfg, [&](const EpochRecord& r, std::span<const ScoredNetwork> pop) {
            ++g_elitism.epochs;
            g_elitism.decreases += r.best_fitness < last_best;
            last_best = r.best_fitness;
            if ((r.epoch + 1) % kCheckEvery != 0 && r.epoch + 1 != cfg.epochs) return true;
            const auto traces = traces_of(pop[best_index(pop)].network, task.spec, task.validation);
            tpr0 = tpr_at_far(roc_sweep(traces, ScoringMode::sample, 0), 0.0);
            return !(tpr0 > 0.0);
        });
        passed += tpr0 > 0.0;
        per_seed += fmt(" %.2f", tpr0);
        std::printf("  low-far seed %d: TPR at zero FAR %.3f in %.1f s\n", seed, tpr0, seconds_since(t0));
        std::fflush(stdout);
    }
    return {passed >= 7, fmt("%d/%d seeds with TPR > 0 at FAR = 0 on the calibration set (need 7); TPR by seed:%s",
                             passed, kSeeds, per_seed.c_str())};
}

// ---------------------------------------------------------------------------

Outcome ensemble_algebra() {
    std::mt19937_64 rng(99);
    long superset_checks = 0, superset_violations = 0;
    long calibrations = 0, successes = 0, far_violations = 0;

    auto check_set = [&](const MemberTraces& all) {
        const auto count = all.per_member.size();
        std::vector<std::vector<std::vector<std::uint8_t>>> member_y(count);  // [member][run][t]
        std::vector<int> thetas(count);
        for (std::size_t m = 0; m < count; ++m) {
            thetas[m] = static_cast<int>(rng() % 3);
            for (const auto& tr : all.per_member[m]) {
                const auto w = rolling_sum(tr.z, 0);
                member_y[m].push_back(threshold(w, thetas[m]));
            }
        }
        for (const auto& cand : enumerate_ensembles(count)) {
            MemberTraces sub;
            std::vector<int> sub_thetas;
            for (auto k : cand.members) {
                sub.per_member.push_back(all.per_member[k]);
                sub_thetas.push_back(thetas[k]);
            }
            const auto y = ensemble_predictions(sub, sub_thetas, cand.vote, 0);
            if (cand.vote != Vote::majority) {
                for (auto k : cand.members) {
                    for (std::size_t r = 0; r < y.size(); ++r) {
                        for (std::size_t t = 0; t < y[r].size(); ++t) {
                            ++superset_checks;
                            const bool member = member_y[k][r][t], ens = y[r][t];
                            if (cand.vote == Vote::any && member && !ens) ++superset_violations;
                            if (cand.vote == Vote::unanimous && ens && !member) ++superset_violations;
                        }
                    }
                }
            }
            for (double target : {0.0, 1.0, 5.0, 50.0}) {
                const auto cal = calibrate_far(sub, sub_thetas, cand.vote, 0, target, ScoringMode::sample);
                ++calibrations;
                if (!cal.reached) continue;
                ++successes;
                // independent re-score of the calibrated thresholds
                const auto cy = ensemble_predictions(sub, cal.thetas, cand.vote, 0);
                std::uint64_t fp = 0;
                double bg_seconds = 0.0;
                for (std::size_t r = 0; r < cy.size(); ++r) {
                    const auto& tr = sub.per_member.front()[r];
                    for (std::size_t t = 0; t < cy[r].size(); ++t) {
                        fp += cy[r][t] && !tr.labels[t];
                        bg_seconds += tr.labels[t] ? 0.0 : tr.stride_seconds;
                    }
                }
                far_violations += static_cast<double>(fp) / (bg_seconds / 3600.0) > target;
            }
        }
    };

    // synthetic member outputs
    for (int k = 0; k < 40; ++k) {
        MemberTraces all;
        const std::size_t members = 2 + rng() % 3;
        std::vector<std::vector<std::uint8_t>> labels;
        for (int r = 0; r < 3; ++r) {
            std::vector<std::uint8_t> l(20 + rng() % 40);
            for (auto& v : l) v = rng() % 4 == 0;
            labels.push_back(l);
        }
        for (std::size_t m = 0; m < members; ++m) {
            std::vector<LabeledTrace> runs;
            for (const auto& l : labels) {
                LabeledTrace tr{{}, l, 30.0};
                for (auto v : l) tr.z.push_back(static_cast<int>(rng() % (v ? 6 : 4)));
                runs.push_back(std::move(tr));
            }
            all.per_member.push_back(std::move(runs));
        }
        check_set(all);
    }

    // real networks on generated data
    const auto data = build_dataset(Preset::easy, {4, 8}, 31);
    EncoderSpec spec;
    spec.scheme = EncoderScheme::spikes;
    spec.tau = 16;
    spec.bins = 4;
    spec.ranges = data.ranges;
    EonsParams params;
    params.population_size = 5;
    params.starting_edges = 400;
    auto pop = init_population(params, spec.input_count(), 8);
    for (auto& n : pop)
        for (auto& neuron : n.neurons)
            if (neuron.kind != NeuronKind::input) neuron.threshold %= 8;
    check_set(member_traces(pop, spec, data.runs));

    return {superset_violations == 0 && far_violations == 0 && successes > 0,
            fmt("%ld dominance checks, %ld violations; %ld/%ld calibrations succeeded, %ld exceeded the FAR target",
                superset_checks, superset_violations, successes, calibrations, far_violations)};
}

// ---------------------------------------------------------------------------

Outcome determinism_and_elitism() {
    const auto data = build_dataset(Preset::easy, {10, 20}, 4242);
    EncoderSpec spec;
    spec.scheme = EncoderScheme::spikes;
    spec.tau = 16;
    spec.bins = 4;
    spec.ranges = data.ranges;
    EonsParams params;
    params.population_size = 30;
    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.batch_fraction = 0.2;
    int identical = 0, pairs = 0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        std::string first;
        for (unsigned jobs : {1u, 2u, 4u}) {
            cfg.seed = seed;
            cfg.jobs = jobs;
            const auto res = train(data, spec, params, cfg);
            const auto bytes = format_network({res.best.network, spec, {seed, res.history.back().epoch, res.best.fitness}});
            if (first.empty()) {
                first = bytes;
                continue;
            }
            ++pairs;
            identical += bytes == first;
        }
    }

    // fixed batch: elites are re-scored on the same runs every epoch
    cfg.batch_fraction = 1.0;
    cfg.epochs = 30;
    cfg.jobs = 1;
    long local_epochs = 0, local_decreases = 0;
    for (std::uint64_t seed : {5u, 6u}) {
        cfg.seed = seed;
        double last = -2.0;
        train(data, spec, params, cfg, [&](const EpochRecord& r, auto) {
            ++local_epochs;
            local_decreases += r.best_fitness < last;
            last = r.best_fitness;
            return true;
        });
    }
    const long epochs = local_epochs + g_elitism.epochs;
    const long decreases = local_decreases + g_elitism.decreases;
    return {identical == pairs && decreases == 0,
            fmt("%d/%d repeated trainings byte-identical; best fitness decreased in %ld of %ld logged fixed-batch epochs",
                identical, pairs, decreases, epochs)};
}

// ---------------------------------------------------------------------------

Outcome hardware_envelope() {
    auto base = [] {
        Network net;
        net.neurons = {{NeuronId{0}, 0, 0, NeuronKind::input}, {NeuronId{1}, 1, 0, NeuronKind::output}};
        net.synapses = {{NeuronId{0}, NeuronId{1}, 1}};
        net.input_order = {NeuronId{0}};
        net.output = NeuronId{1};
        return net;
    };
    int rejected = 0;
    const int cases = 6;
    {
        auto net = base();
        for (int i = 2; i < 257; ++i) net.neurons.push_back({NeuronId{i % 256}, 0, 0, NeuronKind::hidden});
        rejected += !validate(net).empty();
    }
    {
        auto net = base();
        for (int i = 2; i < 65; ++i) net.neurons.push_back({NeuronId{i}, 0, 0, NeuronKind::hidden});
        net.synapses.clear();
        for (int a = 0; a < 65; ++a)
            for (int b = 0; b < 65 && net.synapses.size() < 4097; ++b) net.synapses.push_back({NeuronId{a}, NeuronId{b}, 1});
        rejected += !validate(net).empty();
    }
    {
        auto net = base();
        net.neurons[1].threshold = 256;
        rejected += !validate(net).empty();
    }
    for (int w : {129, -129}) {
        auto net = base();
        net.synapses[0].weight = w;
        rejected += !validate(net).empty();
    }
    {
        auto net = base();
        net.neurons[0].axon_delay = 16;
        rejected += !validate(net).empty();
    }

    // 100 lineages x 1000 single mutation operations, validated after each
    EonsParams single;
    single.num_mutations = 1;
    EonsParams growth = single;  // drives some lineages into the neuron and synapse caps
    growth.add_node_rate = 5.0;
    growth.add_edge_rate = 40.0;
    long operations = 0, invalid = 0;
    for (int lineage = 0; lineage < 100; ++lineage) {
        Rng rng(derive_seed(555, {static_cast<std::uint64_t>(lineage)}));
        const auto& params = lineage % 10 == 0 ? growth : single;
        auto net = random_network(EonsParams{}, 32, rng);
        for (int op = 0; op < 1000; ++op) {
            net = mutate(net, params, rng);
            ++operations;
            invalid += !validate(net).empty();
        }
    }
    return {rejected == cases && invalid == 0,
            fmt("%d/%d out-of-envelope networks rejected; %ld mutation operations produced %ld invalid networks",
                rejected, cases, operations, invalid)};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    // determinism runs last so that it can include the elitism log of the
    // evolution runs
    const std::vector<Criterion> criteria{
        {"simulator-oracle-equivalence", simulator_equivalence},
        {"metric-oracle", metric_oracle},
        {"encoder-laws", encoder_laws},
        {"evolution-end-to-end", evolution_end_to_end},
        {"low-far-fitness", low_far_fitness},
        {"ensemble-algebra", ensemble_algebra},
        {"hardware-envelope", hardware_envelope},
        {"determinism-and-elitism", determinism_and_elitism},
    };
    std::set<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.name)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
