#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace snnts {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        tn += o.tn;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// sample: every step is scored. event: each contiguous label-1 block is one
/// positive (detected if any step inside predicts 1); each contiguous block of
/// 1-predictions lying wholly on label-0 steps is one false alarm; each label-0
/// block without a false alarm is one true negative.
enum class ScoringMode { sample, event };

std::string to_string(ScoringMode mode);
ScoringMode parse_scoring_mode(const std::string& text);

double mcc(const ConfusionMatrix& cm);
double precision(const ConfusionMatrix& cm);
double recall(const ConfusionMatrix& cm);
double f1(const ConfusionMatrix& cm);
double false_positive_rate(const ConfusionMatrix& cm);

/// Confusion counts for one run's predictions.
ConfusionMatrix confusion(std::span<const std::uint8_t> y, std::span<const std::uint8_t> labels, ScoringMode mode);

/// One run's raw output counts with its ground truth.
struct LabeledTrace {
    std::vector<int> z;
    std::vector<std::uint8_t> labels;
    double stride_seconds = 1.0;
};

/// One run's binary predictions with its ground truth (non-owning).
struct PredictionView {
    std::span<const std::uint8_t> y;
    std::span<const std::uint8_t> labels;
    double stride_seconds = 1.0;
};

/// Hours of label-0 time; false alarms are normalized by this.
double background_hours(std::span<const LabeledTrace> traces);
double background_hours(std::span<const PredictionView> predictions);

struct EvalReport {
    ScoringMode mode = ScoringMode::sample;
    ConfusionMatrix cm;
    double mcc = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double far_per_hour = 0.0;
    double background_hours = 0.0;
};

EvalReport evaluate(std::span<const PredictionView> predictions, ScoringMode mode);

struct RocPoint {
    int theta = 0;
    double far_per_hour = 0.0;
    double tpr = 0.0;

    friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
    std::vector<RocPoint> points;  // theta strictly increasing
};

/// Confusion matrix at every theta in 0..max windowed count (index = theta).
std::vector<ConfusionMatrix> sweep_confusion(std::span<const LabeledTrace> traces, ScoringMode mode, int window);

/// TPR and FAR (false alarms per background hour) for every threshold from 0
/// to the largest windowed count. Throws std::invalid_argument when there is
/// no background time. FAR is non-increasing in theta for sample scoring;
/// in event scoring one alarm can split into several as theta rises.
RocCurve roc_sweep(std::span<const LabeledTrace> traces, ScoringMode mode, int window);

/// TPR at the smallest theta whose FAR is within `far_limit`; 0 if none.
double tpr_at_far(const RocCurve& roc, double far_limit);

struct ThresholdChoice {
    int theta = 0;
    double mcc = 0.0;
};

/// Threshold with maximum MCC; ties go to the larger theta.
ThresholdChoice best_mcc_threshold(std::span<const LabeledTrace> traces, ScoringMode mode, int window = 0);

/// Fitness functions. Both score the traces at theta 0 without windowing.
double fitness_mcc(const ConfusionMatrix& cm);
double fitness_f1_tpr0sq(std::span<const LabeledTrace> traces, ScoringMode mode);

}  // namespace snnts
