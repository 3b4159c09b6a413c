#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snnts/dataset.hpp"
#include "snnts/encoders.hpp"
#include "snnts/metrics.hpp"
#include "snnts/network.hpp"

namespace snnts {

enum class Vote { any, majority, unanimous };

std::string to_string(Vote vote);
Vote parse_vote(const std::string& text);

/// any: OR; majority: at least 2 of 3; unanimous: AND. Throws
/// std::invalid_argument when the member count does not suit the vote.
bool vote_combine(std::span<const std::uint8_t> member_predictions, Vote vote);

struct EnsembleMember {
    Network network;
    int theta = 0;

    friend bool operator==(const EnsembleMember&, const EnsembleMember&) = default;
};

/// Two or three networks voting per step. All members see the same encoded
/// input and keep independent simulator state.
struct Ensemble {
    std::vector<EnsembleMember> members;
    Vote vote = Vote::any;
    int window = 0;

    void check() const;

    friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

struct EnsembleCandidate {
    std::vector<std::size_t> members;  // indices into the ranked list, ascending
    Vote vote = Vote::any;
};

/// Every pair (any, unanimous) and every trio (any, majority, unanimous) drawn
/// from `count` ranked networks, pairs first, lexicographic within each size.
std::vector<EnsembleCandidate> enumerate_ensembles(std::size_t count);

/// Per-member output counts on a set of runs, computed once and reused while
/// thresholds are tuned.
struct MemberTraces {
    std::vector<std::vector<LabeledTrace>> per_member;  // [member][run]
};

MemberTraces member_traces(std::span<const Network> members, const EncoderSpec& spec, std::span<const Run> runs,
                           unsigned jobs = 1);

/// Combined per-run predictions for the given thresholds.
std::vector<std::vector<std::uint8_t>> ensemble_predictions(const MemberTraces& traces, std::span<const int> thetas,
                                                            Vote vote, int window);

EvalReport evaluate_ensemble(const MemberTraces& traces, std::span<const int> thetas, Vote vote, int window,
                             ScoringMode mode);

EvalReport evaluate_ensemble(const Ensemble& ensemble, const EncoderSpec& spec, std::span<const Run> runs,
                             ScoringMode mode, unsigned jobs = 1);

struct CalibrationResult {
    std::vector<int> thetas;
    double far_per_hour = 0.0;
    double tpr = 0.0;
    bool reached = false;
};

/// Greedy coordinate ascent on member thresholds: starting from `start`,
/// repeatedly raise one member threshold to its next distinct windowed count,
/// preferring raises that lower FAR and among those the one that keeps
/// ensemble TPR highest, until FAR <= far_target. If the
/// target cannot be met every member ends at its maximum and `reached` is
/// false. Throws std::invalid_argument without background time.
CalibrationResult calibrate_far(const MemberTraces& traces, std::span<const int> start, Vote vote, int window,
                                double far_target, ScoringMode mode);

Ensemble calibrate_far(const Ensemble& ensemble, const EncoderSpec& spec, std::span<const Run> runs,
                       double far_target, ScoringMode mode, CalibrationResult* result = nullptr, unsigned jobs = 1);

}  // namespace snnts
