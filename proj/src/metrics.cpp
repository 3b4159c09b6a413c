#include "snnts/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snnts/inference.hpp"

namespace snnts {

std::string to_string(ScoringMode mode) { return mode == ScoringMode::sample ? "sample" : "event"; }

ScoringMode parse_scoring_mode(const std::string& text) {
    if (text == "sample") return ScoringMode::sample;
    if (text == "event") return ScoringMode::event;
    throw std::invalid_argument("unknown scoring mode '" + text + "'");
}

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

void require_aligned(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("predictions and labels differ in length");
}

}  // namespace

double mcc(const ConfusionMatrix& cm) {
    const double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
    const double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (den == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(den);
}

double precision(const ConfusionMatrix& cm) {
    return ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
}

double recall(const ConfusionMatrix& cm) {
    return ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
}

double f1(const ConfusionMatrix& cm) {
    // 2TP / (2TP + FP + FN), identical to the harmonic mean of precision and recall
    return ratio(2.0 * static_cast<double>(cm.tp), static_cast<double>(2 * cm.tp + cm.fp + cm.fn));
}

double false_positive_rate(const ConfusionMatrix& cm) {
    return ratio(static_cast<double>(cm.fp), static_cast<double>(cm.fp + cm.tn));
}

ConfusionMatrix confusion(std::span<const std::uint8_t> y, std::span<const std::uint8_t> labels, ScoringMode mode) {
    require_aligned(y.size(), labels.size());
    ConfusionMatrix cm;
    const auto n = y.size();
    if (mode == ScoringMode::sample) {
        for (std::size_t t = 0; t < n; ++t) {
            if (labels[t]) (y[t] ? cm.tp : cm.fn)++;
            else (y[t] ? cm.fp : cm.tn)++;
        }
        return cm;
    }

    std::uint64_t background_blocks = 0, alarmed_blocks = 0;
    for (std::size_t a = 0; a < n;) {
        std::size_t b = a;
        while (b < n && labels[b] == labels[a]) ++b;
        if (labels[a]) {
            const bool hit = std::any_of(y.begin() + static_cast<std::ptrdiff_t>(a),
                                         y.begin() + static_cast<std::ptrdiff_t>(b), [](auto v) { return v != 0; });
            (hit ? cm.tp : cm.fn)++;
        } else {
            ++background_blocks;
            // maximal alarm blocks lying wholly inside [a, b)
            bool alarmed = false;
            for (std::size_t s = a; s < b;) {
                if (!y[s]) {
                    ++s;
                    continue;
                }
                std::size_t e = s;
                while (e < n && y[e]) ++e;
                const bool starts_inside = s > a || a == 0 || !y[a - 1];
                if (starts_inside && e <= b) {
                    ++cm.fp;
                    alarmed = true;
                }
                s = e;
            }
            if (alarmed) ++alarmed_blocks;
        }
        a = b;
    }
    cm.tn = background_blocks - alarmed_blocks;
    return cm;
}

double background_hours(std::span<const LabeledTrace> traces) {
    double seconds = 0.0;
    for (const auto& tr : traces)
        seconds += static_cast<double>(std::count(tr.labels.begin(), tr.labels.end(), std::uint8_t{0})) *
                   tr.stride_seconds;
    return seconds / 3600.0;
}

double background_hours(std::span<const PredictionView> predictions) {
    double seconds = 0.0;
    for (const auto& p : predictions)
        seconds += static_cast<double>(std::count(p.labels.begin(), p.labels.end(), std::uint8_t{0})) *
                   p.stride_seconds;
    return seconds / 3600.0;
}

EvalReport evaluate(std::span<const PredictionView> predictions, ScoringMode mode) {
    EvalReport r;
    r.mode = mode;
    for (const auto& p : predictions) r.cm += confusion(p.y, p.labels, mode);
    r.mcc = mcc(r.cm);
    r.f1 = f1(r.cm);
    r.precision = precision(r.cm);
    r.tpr = recall(r.cm);
    r.fpr = false_positive_rate(r.cm);
    r.background_hours = background_hours(predictions);
    r.far_per_hour = ratio(static_cast<double>(r.cm.fp), r.background_hours);
    return r;
}

std::vector<ConfusionMatrix> sweep_confusion(std::span<const LabeledTrace> traces, ScoringMode mode, int window) {
    std::vector<std::vector<long>> windowed;
    windowed.reserve(traces.size());
    long max_count = 0;
    for (const auto& tr : traces) {
        require_aligned(tr.z.size(), tr.labels.size());
        windowed.push_back(rolling_sum(tr.z, window));
        for (long v : windowed.back()) max_count = std::max(max_count, v);
    }
    const auto thetas = static_cast<std::size_t>(max_count) + 1;
    std::vector<ConfusionMatrix> out(thetas);

    if (mode == ScoringMode::sample) {
        // histogram of windowed counts per class, then suffix sums: a step is
        // predicted 1 at theta iff its count > theta
        std::vector<std::uint64_t> pos(thetas + 1, 0), neg(thetas + 1, 0);
        for (std::size_t r = 0; r < traces.size(); ++r) {
            for (std::size_t t = 0; t < windowed[r].size(); ++t) {
                const auto v = static_cast<std::size_t>(std::max(0L, windowed[r][t]));
                (traces[r].labels[t] ? pos : neg)[v]++;
            }
        }
        std::uint64_t pos_total = 0, neg_total = 0;
        for (std::size_t v = 0; v <= thetas; ++v) {
            pos_total += pos[v];
            neg_total += neg[v];
        }
        std::uint64_t pos_above = pos_total, neg_above = neg_total;
        for (std::size_t theta = 0; theta < thetas; ++theta) {
            pos_above -= pos[theta];
            neg_above -= neg[theta];
            out[theta] = {pos_above, neg_total - neg_above, neg_above, pos_total - pos_above};
        }
        return out;
    }

    for (std::size_t theta = 0; theta < thetas; ++theta) {
        for (std::size_t r = 0; r < traces.size(); ++r) {
            const auto y = threshold(windowed[r], static_cast<int>(theta));
            out[theta] += confusion(y, traces[r].labels, mode);
        }
    }
    return out;
}

RocCurve roc_sweep(std::span<const LabeledTrace> traces, ScoringMode mode, int window) {
    const double hours = background_hours(traces);
    if (!(hours > 0.0)) throw std::invalid_argument("ROC needs background (label 0) time");
    const auto cms = sweep_confusion(traces, mode, window);
    RocCurve roc;
    roc.points.reserve(cms.size());
    for (std::size_t theta = 0; theta < cms.size(); ++theta)
        roc.points.push_back({static_cast<int>(theta), static_cast<double>(cms[theta].fp) / hours, recall(cms[theta])});
    return roc;
}

double tpr_at_far(const RocCurve& roc, double far_limit) {
    for (const auto& p : roc.points)
        if (p.far_per_hour <= far_limit) return p.tpr;
    return 0.0;
}

ThresholdChoice best_mcc_threshold(std::span<const LabeledTrace> traces, ScoringMode mode, int window) {
    const auto cms = sweep_confusion(traces, mode, window);
    ThresholdChoice best{0, -std::numeric_limits<double>::infinity()};
    for (std::size_t theta = 0; theta < cms.size(); ++theta) {
        const double m = mcc(cms[theta]);
        if (m >= best.mcc) best = {static_cast<int>(theta), m};
    }
    return best;
}

double fitness_mcc(const ConfusionMatrix& cm) { return mcc(cm); }

double fitness_f1_tpr0sq(std::span<const LabeledTrace> traces, ScoringMode mode) {
    ConfusionMatrix cm;
    for (const auto& tr : traces) {
        const auto y = threshold(rolling_sum(tr.z, 0), 0);
        cm += confusion(y, tr.labels, mode);
    }
    const double tpr0 = tpr_at_far(roc_sweep(traces, mode, 0), 0.0);
    return f1(cm) + tpr0 * tpr0;
}

}  // namespace snnts
