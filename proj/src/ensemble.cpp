#include "snnts/ensemble.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "snnts/inference.hpp"
#include "snnts/parallel.hpp"

namespace snnts {

std::string to_string(Vote vote) {
    switch (vote) {
    case Vote::any: return "any";
    case Vote::majority: return "majority";
    case Vote::unanimous: return "unanimous";
    }
    return "?";
}

Vote parse_vote(const std::string& text) {
    if (text == "any") return Vote::any;
    if (text == "majority") return Vote::majority;
    if (text == "unanimous") return Vote::unanimous;
    throw std::invalid_argument("unknown vote '" + text + "'");
}

namespace {

void check_arity(std::size_t members, Vote vote) {
    const bool ok = vote == Vote::majority ? members == 3 : (members == 2 || members == 3);
    if (!ok) {
        throw std::invalid_argument(to_string(vote) + " vote cannot combine " + std::to_string(members) +
                                    " members");
    }
}

}  // namespace

bool vote_combine(std::span<const std::uint8_t> member_predictions, Vote vote) {
    check_arity(member_predictions.size(), vote);
    const auto yes = std::count_if(member_predictions.begin(), member_predictions.end(), [](auto v) { return v != 0; });
    switch (vote) {
    case Vote::any: return yes > 0;
    case Vote::majority: return yes >= 2;
    case Vote::unanimous: return static_cast<std::size_t>(yes) == member_predictions.size();
    }
    return false;
}

void Ensemble::check() const {
    check_arity(members.size(), vote);
    if (window < 0) throw std::invalid_argument("ensemble window must be non-negative");
    for (const auto& m : members) {
        require_valid(m.network);
        if (m.theta < 0) throw std::invalid_argument("ensemble thresholds must be non-negative");
    }
}

std::vector<EnsembleCandidate> enumerate_ensembles(std::size_t count) {
    if (count < 2) throw std::invalid_argument("ensembles need at least two networks");
    std::vector<EnsembleCandidate> out;
    for (std::size_t a = 0; a < count; ++a)
        for (std::size_t b = a + 1; b < count; ++b)
            for (auto v : {Vote::any, Vote::unanimous}) out.push_back({{a, b}, v});
    for (std::size_t a = 0; a < count; ++a)
        for (std::size_t b = a + 1; b < count; ++b)
            for (std::size_t c = b + 1; c < count; ++c)
                for (auto v : {Vote::any, Vote::majority, Vote::unanimous}) out.push_back({{a, b, c}, v});
    return out;
}

MemberTraces member_traces(std::span<const Network> members, const EncoderSpec& spec, std::span<const Run> runs,
                           unsigned jobs) {
    std::vector<EncodedRun> encoded(runs.size());
    parallel_for(runs.size(), jobs, [&](std::size_t r) { encoded[r] = encode_run(runs[r], spec); });

    std::vector<Simulator> sims;
    sims.reserve(members.size());
    for (const auto& m : members) {
        if (m.input_order.size() != spec.input_count())
            throw std::invalid_argument("ensemble member does not match the encoder's input count");
        sims.emplace_back(m);
    }

    MemberTraces out;
    out.per_member.assign(members.size(), std::vector<LabeledTrace>(runs.size()));
    parallel_for(members.size() * runs.size(), jobs, [&](std::size_t k) {
        const auto m = k / runs.size(), r = k % runs.size();
        out.per_member[m][r] = {output_counts(sims[m], encoded[r], spec.tau), runs[r].labels, runs[r].stride_seconds};
    });
    return out;
}

namespace {

using Windowed = std::vector<std::vector<std::vector<long>>>;  // [member][run][step]

Windowed window_all(const MemberTraces& traces, int window) {
    Windowed out(traces.per_member.size());
    for (std::size_t m = 0; m < traces.per_member.size(); ++m)
        for (const auto& tr : traces.per_member[m]) out[m].push_back(rolling_sum(tr.z, window));
    return out;
}

std::vector<std::vector<std::uint8_t>> combine(const Windowed& windowed, std::span<const int> thetas, Vote vote) {
    const auto members = windowed.size();
    check_arity(members, vote);
    if (thetas.size() != members) throw std::invalid_argument("one threshold per member required");
    const auto runs = windowed.front().size();
    std::vector<std::vector<std::uint8_t>> out(runs);
    std::vector<std::uint8_t> votes(members);
    for (std::size_t r = 0; r < runs; ++r) {
        const auto steps = windowed.front()[r].size();
        out[r].resize(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t m = 0; m < members; ++m) votes[m] = windowed[m][r][t] > thetas[m];
            out[r][t] = vote_combine(votes, vote);
        }
    }
    return out;
}

EvalReport score(const MemberTraces& traces, const std::vector<std::vector<std::uint8_t>>& y, ScoringMode mode) {
    const auto& ref = traces.per_member.front();
    std::vector<PredictionView> views;
    views.reserve(y.size());
    for (std::size_t r = 0; r < y.size(); ++r) views.push_back({y[r], ref[r].labels, ref[r].stride_seconds});
    return evaluate(views, mode);
}

}  // namespace

std::vector<std::vector<std::uint8_t>> ensemble_predictions(const MemberTraces& traces, std::span<const int> thetas,
                                                            Vote vote, int window) {
    return combine(window_all(traces, window), thetas, vote);
}

EvalReport evaluate_ensemble(const MemberTraces& traces, std::span<const int> thetas, Vote vote, int window,
                             ScoringMode mode) {
    return score(traces, ensemble_predictions(traces, thetas, vote, window), mode);
}

EvalReport evaluate_ensemble(const Ensemble& ensemble, const EncoderSpec& spec, std::span<const Run> runs,
                             ScoringMode mode, unsigned jobs) {
    ensemble.check();
    std::vector<Network> nets;
    std::vector<int> thetas;
    for (const auto& m : ensemble.members) {
        nets.push_back(m.network);
        thetas.push_back(m.theta);
    }
    return evaluate_ensemble(member_traces(nets, spec, runs, jobs), thetas, ensemble.vote, ensemble.window, mode);
}

CalibrationResult calibrate_far(const MemberTraces& traces, std::span<const int> start, Vote vote, int window,
                                double far_target, ScoringMode mode) {
    const auto windowed = window_all(traces, window);
    const auto members = windowed.size();
    check_arity(members, vote);
    if (start.size() != members) throw std::invalid_argument("one starting threshold per member required");
    if (!(background_hours(traces.per_member.front()) > 0.0))
        throw std::invalid_argument("calibration set has no background time");

    // distinct windowed counts per member, ascending
    std::vector<std::vector<long>> levels(members);
    for (std::size_t m = 0; m < members; ++m) {
        for (const auto& run : windowed[m]) levels[m].insert(levels[m].end(), run.begin(), run.end());
        std::sort(levels[m].begin(), levels[m].end());
        levels[m].erase(std::unique(levels[m].begin(), levels[m].end()), levels[m].end());
    }
    auto next_level = [&](std::size_t m, int theta) -> std::optional<int> {
        auto it = std::upper_bound(levels[m].begin(), levels[m].end(), static_cast<long>(theta));
        if (it == levels[m].end()) return std::nullopt;
        return static_cast<int>(*it);
    };

    CalibrationResult res;
    res.thetas.assign(start.begin(), start.end());
    auto report = score(traces, combine(windowed, res.thetas, vote), mode);
    while (report.far_per_hour > far_target) {
        std::optional<std::size_t> pick;
        EvalReport pick_report;
        std::vector<int> pick_thetas;
        for (std::size_t m = 0; m < members; ++m) {
            auto raised = next_level(m, res.thetas[m]);
            if (!raised) continue;
            auto trial = res.thetas;
            trial[m] = *raised;
            const auto r = score(traces, combine(windowed, trial, vote), mode);
            // moves that lower FAR beat moves that do not; then highest TPR, then lowest FAR
            const bool helps = r.far_per_hour < report.far_per_hour;
            const bool pick_helps = pick && pick_report.far_per_hour < report.far_per_hour;
            const bool better = !pick || (helps && !pick_helps) ||
                                (helps == pick_helps &&
                                 (r.tpr > pick_report.tpr ||
                                  (r.tpr == pick_report.tpr && r.far_per_hour < pick_report.far_per_hour)));
            if (better) {
                pick = m;
                pick_report = r;
                pick_thetas = std::move(trial);
            }
        }
        if (!pick) {
            res.far_per_hour = report.far_per_hour;
            res.tpr = report.tpr;
            res.reached = false;
            return res;
        }
        res.thetas = std::move(pick_thetas);
        report = pick_report;
    }
    res.far_per_hour = report.far_per_hour;
    res.tpr = report.tpr;
    res.reached = true;
    return res;
}

Ensemble calibrate_far(const Ensemble& ensemble, const EncoderSpec& spec, std::span<const Run> runs,
                       double far_target, ScoringMode mode, CalibrationResult* result, unsigned jobs) {
    ensemble.check();
    std::vector<Network> nets;
    std::vector<int> thetas;
    for (const auto& m : ensemble.members) {
        nets.push_back(m.network);
        thetas.push_back(m.theta);
    }
    auto res = calibrate_far(member_traces(nets, spec, runs, jobs), thetas, ensemble.vote, ensemble.window, far_target,
                             mode);
    Ensemble out = ensemble;
    for (std::size_t m = 0; m < out.members.size(); ++m) out.members[m].theta = res.thetas[m];
    if (result) *result = std::move(res);
    return out;
}

}  // namespace snnts
