// snnts: command-line front end for data generation, training, evaluation and
// ensembling.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "snnts/datagen.hpp"
#include "snnts/ensemble.hpp"
#include "snnts/errors.hpp"
#include "snnts/evolution.hpp"
#include "snnts/inference.hpp"
#include "snnts/metrics.hpp"
#include "snnts/parallel.hpp"
#include "snnts/persistence.hpp"

namespace fs = std::filesystem;
using namespace snnts;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kThreshold = 3 };

// Raised for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    unsigned jobs = 0;
};

void banner(const std::string& command, std::optional<std::uint64_t> seed) {
    std::cout << "snnts " << kVersion << " command=" << command;
    if (seed) std::cout << " seed=" << *seed;
    std::cout << " network-format=" << kNetworkFormatVersion << " population-format=" << kPopulationFormatVersion
              << " ensemble-format=" << kEnsembleFormatVersion << " dataset-format=" << kDatasetFormatVersion << '\n';
}

std::string default_data_dir() {
    const char* env = std::getenv("SNNTS_DATA");
    return env ? env : "";
}

fs::path require_data(const std::string& data) {
    if (data.empty()) throw UsageError("--data is required (or set SNNTS_DATA)");
    return data;
}

NetworkFile load_with_encoder(const fs::path& path) {
    auto file = load_network(path);
    if (!file.encoder) throw DataError(path.string() + ": network file has no encoder record");
    return file;
}

void check_interface(const EncoderSpec& spec, const Dataset& data) {
    if (spec.variables() != data.variables()) {
        throw DataError("network encoder expects " + std::to_string(spec.variables()) + " variables, dataset has " +
                        std::to_string(data.variables()));
    }
}

std::vector<LabeledTrace> labeled_traces(const Network& net, const EncoderSpec& spec, const Dataset& data,
                                         unsigned jobs) {
    const auto traces = classify_dataset(net, spec, data.runs, {0, 0}, jobs);
    std::vector<LabeledTrace> out;
    for (std::size_t i = 0; i < traces.size(); ++i)
        out.push_back({traces[i].z, data.runs[i].labels, data.runs[i].stride_seconds});
    return out;
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

// ---- datagen ---------------------------------------------------------------

struct DatagenOpts {
    std::string preset;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t background = 10;
    std::size_t source = 20;
};

int cmd_datagen(const DatagenOpts& o) {
    banner("datagen", o.seed);
    const auto data = build_dataset(parse_preset(o.preset), {o.background, o.source}, o.seed);
    save_dataset(o.out, data);
    std::cout << "wrote " << data.runs.size() << " runs (" << o.source << " with sources) to " << o.out << '\n';
    return kOk;
}

// ---- train -----------------------------------------------------------------

struct TrainOpts {
    std::string data;
    std::string out;
    int epochs = 100;
    std::uint64_t seed = 0;
    std::string fitness = "mcc";
    std::string encoder = "spikes";
    int tau = 16;
    int bins = 4;
    bool flip_flop = false;
    int population = 100;
    double batch_fraction = 0.01;
    std::string mode = "sample";
    int checkpoint_every = 0;
};

int cmd_train(const TrainOpts& o, const Common& c) {
    banner("train", o.seed);
    const auto data = load_dataset(require_data(o.data));

    EncoderSpec spec;
    spec.scheme = parse_encoder_scheme(o.encoder);
    spec.tau = o.tau;
    spec.bins = o.bins;
    spec.flip_flop = o.flip_flop;
    spec.ranges = data.ranges;
    spec.check();

    EonsParams params;
    params.population_size = o.population;
    TrainConfig cfg;
    cfg.epochs = o.epochs;
    cfg.batch_fraction = o.batch_fraction;
    cfg.fitness = parse_fitness_kind(o.fitness);
    cfg.seed = o.seed;
    cfg.mode = parse_scoring_mode(o.mode);
    cfg.jobs = c.jobs;

    const fs::path out = o.out;
    fs::create_directories(out);
    auto snapshot = [&](std::span<const ScoredNetwork> pop, int epoch) {
        std::vector<NetworkFile> files;
        for (const auto& s : pop) files.push_back({s.network, spec, {o.seed, epoch, s.fitness}});
        return files;
    };

    const auto result = train(data, spec, params, cfg, [&](const EpochRecord& r, std::span<const ScoredNetwork> pop) {
        std::cout << "epoch " << r.epoch << " best " << fixed(r.best_fitness) << " mean " << fixed(r.mean_fitness)
                  << " neurons " << r.best_neurons << " synapses " << r.best_synapses << '\n';
        if (o.checkpoint_every > 0 && (r.epoch + 1) % o.checkpoint_every == 0) {
            char name[40];
            std::snprintf(name, sizeof name, "checkpoint-%04d.pop", r.epoch);
            save_population(out / name, snapshot(pop, r.epoch));
        }
        return true;
    });

    const int last = result.history.back().epoch;
    save_network(out / "best.net", {result.best.network, spec, {o.seed, last, result.best.fitness}});
    save_population(out / "population.pop", snapshot(result.population, last));
    write_text(out / "history.csv", format_history_csv(result.history));
    std::cout << "best fitness " << format_real(result.best.fitness) << '\n';
    return kOk;
}

// ---- eval / roc / predict --------------------------------------------------

struct EvalOpts {
    std::string network;
    std::string data;
    std::optional<int> theta;
    bool auto_theta = false;
    double window_seconds = 0.0;
    std::string mode = "sample";
    std::optional<double> min_mcc;
    std::string report;
};

int cmd_eval(const EvalOpts& o, const Common& c) {
    banner("eval", std::nullopt);
    if (o.theta && o.auto_theta) throw UsageError("--theta and --auto-theta are mutually exclusive");
    const auto file = load_with_encoder(o.network);
    const auto data = load_dataset(require_data(o.data));
    check_interface(*file.encoder, data);
    const auto mode = parse_scoring_mode(o.mode);
    const int window = window_steps(o.window_seconds, data.stride_seconds);

    int theta = o.theta.value_or(0);
    const auto traces = labeled_traces(file.network, *file.encoder, data, c.jobs);
    if (o.auto_theta) theta = best_mcc_threshold(traces, mode, window).theta;

    std::vector<std::vector<std::uint8_t>> preds;
    for (const auto& tr : traces) {
        const auto w = rolling_sum(tr.z, window);
        preds.push_back(threshold(w, theta));
    }
    std::vector<PredictionView> views;
    for (std::size_t i = 0; i < traces.size(); ++i) views.push_back({preds[i], traces[i].labels, traces[i].stride_seconds});
    const auto rep = evaluate(views, mode);

    std::cout << "window_steps " << window << '\n' << "theta " << theta << '\n';
    const auto json = format_report(rep, fs::path(o.network).filename().string(), theta, window);
    std::cout << json;
    if (!o.report.empty()) write_text(o.report, json);
    if (o.min_mcc && rep.mcc < *o.min_mcc) {
        std::cout << "mcc " << fixed(rep.mcc) << " below required " << fixed(*o.min_mcc) << '\n';
        return kThreshold;
    }
    return kOk;
}

struct RocOpts {
    std::string network;
    std::string data;
    std::string out;
    double window_seconds = 0.0;
    std::string mode = "sample";
};

int cmd_roc(const RocOpts& o, const Common& c) {
    banner("roc", std::nullopt);
    const auto file = load_with_encoder(o.network);
    const auto data = load_dataset(require_data(o.data));
    check_interface(*file.encoder, data);
    const int window = window_steps(o.window_seconds, data.stride_seconds);
    const auto traces = labeled_traces(file.network, *file.encoder, data, c.jobs);
    const auto roc = roc_sweep(traces, parse_scoring_mode(o.mode), window);
    const auto csv = format_roc_csv(roc);
    if (o.out.empty()) std::cout << csv;
    else write_text(o.out, csv);
    std::cout << "window_steps " << window << " points " << roc.points.size() << " tpr_at_far_1 "
              << fixed(tpr_at_far(roc, 1.0)) << " tpr_at_far_0 " << fixed(tpr_at_far(roc, 0.0)) << '\n';
    return kOk;
}

struct PredictOpts {
    std::string network;
    std::string run;
    int theta = 0;
    double window_seconds = 0.0;
    double stride_seconds = 1.0;
    std::string out;
    std::string raster;
};

int cmd_predict(const PredictOpts& o) {
    banner("predict", std::nullopt);
    const auto file = load_with_encoder(o.network);
    const fs::path path = o.run;
    Run run;
    try {
        run = parse_run_csv(read_text(path), file.encoder->variables(), o.stride_seconds, path.stem().string());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    run.check();
    const int window = window_steps(o.window_seconds, o.stride_seconds);
    const auto trace = classify_run(file.network, *file.encoder, run, {o.theta, window});
    const auto csv = format_trace_csv(run.id, trace, run.labels);
    if (o.out.empty()) std::cout << csv;
    else write_text(o.out, csv);

    if (!o.raster.empty()) {
        // raster of the whole run, cycles numbered from the start of the run
        const Simulator sim(file.network);
        SimulatorState state;
        SpikeRaster all;
        const auto encoded = encode_run(run, *file.encoder);
        for (std::size_t t = 0; t < encoded.steps.size(); ++t) {
            SpikeRaster step;
            sim.run_window(state, encoded.steps[t], file.encoder->tau, &step);
            for (const auto& [id, cycles] : step.fired)
                for (int cyc : cycles) all.fired[id].push_back(cyc + static_cast<int>(t) * file.encoder->tau);
        }
        write_text(o.raster, format_raster_csv(all));
    }
    const auto alarms = std::count(trace.y.begin(), trace.y.end(), std::uint8_t{1});
    std::cerr << "steps " << trace.y.size() << " window_steps " << window << " alarms " << alarms << '\n';
    return kOk;
}

// ---- ensemble-search -------------------------------------------------------

struct EnsembleOpts {
    std::string population;
    std::string data;
    double top_fraction = 0.1;
    double far_target = 1.0;
    double window_seconds = 0.0;
    std::string mode = "sample";
    std::string out;
};

struct Ranked {
    std::size_t index = 0;  // position in the population file
    int theta = 0;          // best-MCC threshold on the search data
    double mcc = 0.0;
};

int cmd_ensemble_search(const EnsembleOpts& o, const Common& c) {
    banner("ensemble-search", std::nullopt);
    const auto pop = load_population(o.population);
    if (pop.size() < 2) throw DataError("ensemble search needs at least two networks, population has " +
                                        std::to_string(pop.size()));
    for (const auto& f : pop)
        if (!f.encoder || !(*f.encoder == *pop.front().encoder))
            throw DataError("population networks must share one encoder record");
    const auto& spec = *pop.front().encoder;
    const auto data = load_dataset(require_data(o.data));
    check_interface(spec, data);
    const auto mode = parse_scoring_mode(o.mode);
    const int window = window_steps(o.window_seconds, data.stride_seconds);
    if (!(o.top_fraction > 0.0 && o.top_fraction <= 1.0)) throw UsageError("--top-fraction must be in (0, 1]");

    std::vector<Network> nets;
    for (const auto& f : pop) nets.push_back(f.network);
    const auto all = member_traces(nets, spec, data.runs, c.jobs);

    std::vector<Ranked> ranked;
    for (std::size_t i = 0; i < nets.size(); ++i) {
        const auto best = best_mcc_threshold(all.per_member[i], mode, window);
        ranked.push_back({i, best.theta, best.mcc});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.mcc > b.mcc; });
    const auto n = pop.size();
    const auto top = std::max(std::min<std::size_t>(n, 3),
                              static_cast<std::size_t>(std::ceil(o.top_fraction * static_cast<double>(n) - 1e-9)));
    ranked.resize(std::min(top, n));

    std::ostringstream table;
    table << "rank,kind,members,vote,thetas,far_per_hour,tpr,mcc,reached\n";
    struct Row {
        std::string kind;
        std::vector<std::size_t> members;  // population indices
        Vote vote = Vote::any;
        CalibrationResult cal;
        double mcc = 0.0;
    };
    std::vector<Row> rows;

    // single networks, thresholds raised until the FAR target holds
    for (const auto& r : ranked) {
        const auto roc = roc_sweep(all.per_member[r.index], mode, window);
        Row row{"single", {r.index}, Vote::any, {}, 0.0};
        row.cal.reached = false;
        for (const auto& p : roc.points) {
            if (p.theta >= r.theta && p.far_per_hour <= o.far_target) {
                row.cal = {{p.theta}, p.far_per_hour, p.tpr, true};
                break;
            }
        }
        if (!row.cal.reached) row.cal = {{roc.points.back().theta}, roc.points.back().far_per_hour, roc.points.back().tpr, false};
        const auto cms = sweep_confusion(all.per_member[r.index], mode, window);
        row.mcc = mcc(cms[static_cast<std::size_t>(row.cal.thetas.front())]);
        rows.push_back(std::move(row));
    }

    for (const auto& cand : enumerate_ensembles(ranked.size())) {
        MemberTraces sub;
        std::vector<int> start;
        Row row{"ensemble", {}, cand.vote, {}, 0.0};
        for (auto k : cand.members) {
            sub.per_member.push_back(all.per_member[ranked[k].index]);
            start.push_back(ranked[k].theta);
            row.members.push_back(ranked[k].index);
        }
        row.cal = calibrate_far(sub, start, cand.vote, window, o.far_target, mode);
        row.mcc = evaluate_ensemble(sub, row.cal.thetas, cand.vote, window, mode).mcc;
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows[a].cal.reached != rows[b].cal.reached) return rows[a].cal.reached;
        if (rows[a].cal.tpr != rows[b].cal.tpr) return rows[a].cal.tpr > rows[b].cal.tpr;
        return rows[a].mcc > rows[b].mcc;
    });

    auto join = [](const auto& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
        return s;
    };
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const auto& r = rows[order[rank]];
        table << rank + 1 << ',' << r.kind << ',' << join(r.members) << ','
              << (r.kind == "single" ? "-" : to_string(r.vote)) << ',' << join(r.cal.thetas) << ','
              << format_real(r.cal.far_per_hour) << ',' << format_real(r.cal.tpr) << ',' << format_real(r.mcc) << ','
              << (r.cal.reached ? 1 : 0) << '\n';
    }

    const Row* best_single = nullptr;
    const Row* best_ensemble = nullptr;
    for (auto i : order) {
        const auto& r = rows[i];
        if (!r.cal.reached) continue;
        if (r.kind == "single" && !best_single) best_single = &r;
        if (r.kind == "ensemble" && !best_ensemble) best_ensemble = &r;
    }

    const fs::path out = o.out;
    fs::create_directories(out);
    write_text(out / "ranking.csv", table.str());
    std::cout << "candidates " << rows.size() - ranked.size() << " ensembles over top " << ranked.size()
              << " networks, far_target " << format_real(o.far_target) << "/h, window_steps " << window << '\n';
    if (best_single)
        std::cout << "best single  tpr " << fixed(best_single->cal.tpr) << " far " << fixed(best_single->cal.far_per_hour)
                  << " network " << best_single->members.front() << '\n';
    if (best_ensemble) {
        Ensemble ens;
        ens.vote = best_ensemble->vote;
        ens.window = window;
        for (std::size_t k = 0; k < best_ensemble->members.size(); ++k)
            ens.members.push_back({nets[best_ensemble->members[k]], best_ensemble->cal.thetas[k]});
        save_ensemble(out / "best.ens", {ens, spec});
        std::cout << "best ensemble tpr " << fixed(best_ensemble->cal.tpr) << " far "
                  << fixed(best_ensemble->cal.far_per_hour) << " vote " << to_string(ens.vote) << " members "
                  << join(best_ensemble->members) << '\n';
    }
    const bool ensemble_wins = best_ensemble && (!best_single || best_ensemble->cal.tpr >= best_single->cal.tpr);
    if (!ensemble_wins && best_single) {
        const auto idx = best_single->members.front();
        save_network(out / "best-single.net", {nets[idx], spec, pop[idx].provenance});
    }
    std::cout << "winner " << (ensemble_wins ? "ensemble" : "single") << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spiking neural network time-series classifier toolkit"};
    app.set_version_flag("--version", std::string("snnts ") + kVersion);
    app.require_subcommand(1);
    Common common;

    const std::vector<std::string> modes{"sample", "event"};

    DatagenOpts dg;
    auto* datagen = app.add_subcommand("datagen", "Generate a synthetic labeled dataset");
    datagen->add_option("--preset", dg.preset, "easy or hard")->required()->check(CLI::IsMember({"easy", "hard"}));
    datagen->add_option("--out", dg.out, "Output directory")->required();
    datagen->add_option("--seed", dg.seed)->capture_default_str();
    datagen->add_option("--background", dg.background, "Background-only runs")->capture_default_str();
    datagen->add_option("--source", dg.source, "Runs with a source")->capture_default_str();

    TrainOpts tr;
    tr.data = default_data_dir();
    auto* train_cmd = app.add_subcommand("train", "Evolve a network population");
    train_cmd->add_option("--data", tr.data, "Dataset directory (default $SNNTS_DATA)");
    train_cmd->add_option("--out", tr.out, "Output directory")->required();
    train_cmd->add_option("--epochs", tr.epochs)->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", tr.seed)->capture_default_str();
    train_cmd->add_option("--fitness", tr.fitness)->capture_default_str()->check(CLI::IsMember({"mcc", "f1_tpr0sq"}));
    train_cmd->add_option("--encoder", tr.encoder)->capture_default_str()->check(CLI::IsMember({"rate", "spikes"}));
    train_cmd->add_option("--tau", tr.tau, "Cycles per inference window")->capture_default_str()->check(CLI::Range(1, 4096));
    train_cmd->add_option("--bins", tr.bins)->capture_default_str()->check(CLI::Range(1, 255));
    train_cmd->add_flag("--flip-flop", tr.flip_flop);
    train_cmd->add_option("--population", tr.population)->capture_default_str()->check(CLI::Range(2, 100000));
    train_cmd->add_option("--batch-fraction", tr.batch_fraction)->capture_default_str()->check(CLI::Range(1e-9, 1.0));
    train_cmd->add_option("--mode", tr.mode)->capture_default_str()->check(CLI::IsMember(modes));
    train_cmd->add_option("--checkpoint-every", tr.checkpoint_every, "Population snapshot period in epochs (0 = off)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);

    EvalOpts ev;
    ev.data = default_data_dir();
    auto* eval_cmd = app.add_subcommand("eval", "Score a network on a dataset");
    eval_cmd->add_option("--network", ev.network)->required();
    eval_cmd->add_option("--data", ev.data);
    eval_cmd->add_option("--theta", ev.theta)->check(CLI::NonNegativeNumber);
    eval_cmd->add_flag("--auto-theta", ev.auto_theta, "Use the threshold with the best MCC");
    eval_cmd->add_option("--window-seconds", ev.window_seconds)->capture_default_str()->check(CLI::NonNegativeNumber);
    eval_cmd->add_option("--mode", ev.mode)->capture_default_str()->check(CLI::IsMember(modes));
    eval_cmd->add_option("--min-mcc", ev.min_mcc, "Exit with code 3 when MCC is below this");
    eval_cmd->add_option("--report", ev.report, "Also write the JSON report here");

    RocOpts ro;
    ro.data = default_data_dir();
    auto* roc_cmd = app.add_subcommand("roc", "Threshold sweep as CSV");
    roc_cmd->add_option("--network", ro.network)->required();
    roc_cmd->add_option("--data", ro.data);
    roc_cmd->add_option("--out", ro.out, "CSV path (default stdout)");
    roc_cmd->add_option("--window-seconds", ro.window_seconds)->capture_default_str()->check(CLI::NonNegativeNumber);
    roc_cmd->add_option("--mode", ro.mode)->capture_default_str()->check(CLI::IsMember(modes));

    PredictOpts pr;
    auto* predict_cmd = app.add_subcommand("predict", "Per-step output for one run CSV");
    predict_cmd->add_option("--network", pr.network)->required();
    predict_cmd->add_option("--run", pr.run)->required();
    predict_cmd->add_option("--theta", pr.theta)->capture_default_str()->check(CLI::NonNegativeNumber);
    predict_cmd->add_option("--window-seconds", pr.window_seconds)->capture_default_str()->check(CLI::NonNegativeNumber);
    predict_cmd->add_option("--stride-seconds", pr.stride_seconds)->capture_default_str()->check(CLI::PositiveNumber);
    predict_cmd->add_option("--out", pr.out, "Trace CSV path (default stdout)");
    predict_cmd->add_option("--raster", pr.raster, "Also write the spike raster CSV here");

    EnsembleOpts en;
    en.data = default_data_dir();
    auto* ens_cmd = app.add_subcommand("ensemble-search", "Rank pairs and trios from a population");
    ens_cmd->add_option("--population", en.population)->required();
    ens_cmd->add_option("--data", en.data);
    ens_cmd->add_option("--top-fraction", en.top_fraction)->capture_default_str();
    ens_cmd->add_option("--far-target", en.far_target, "False alarms per hour")->capture_default_str()->check(CLI::NonNegativeNumber);
    ens_cmd->add_option("--window-seconds", en.window_seconds)->capture_default_str()->check(CLI::NonNegativeNumber);
    ens_cmd->add_option("--mode", en.mode)->capture_default_str()->check(CLI::IsMember(modes));
    ens_cmd->add_option("--out", en.out)->required();

    for (auto* sub : {train_cmd, eval_cmd, roc_cmd, ens_cmd})
        sub->add_option("-j,--jobs", common.jobs, "Worker threads (0 = all cores)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*datagen) return cmd_datagen(dg);
        if (*train_cmd) return cmd_train(tr, common);
        if (*eval_cmd) return cmd_eval(ev, common);
        if (*roc_cmd) return cmd_roc(ro, common);
        if (*predict_cmd) return cmd_predict(pr);
        if (*ens_cmd) return cmd_ensemble_search(en, common);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        // data, format and I/O problems
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
