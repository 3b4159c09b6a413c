#include "snnts/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snnts/errors.hpp"

namespace snnts {

std::size_t Run::positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

void Run::check() const {
    if (variables == 0) throw DataError("run '" + id + "' has no variables");
    if (observations.size() != labels.size() * variables)
        throw DataError("run '" + id + "' observation matrix does not match its label count");
    if (!(stride_seconds > 0.0)) throw DataError("run '" + id + "' has non-positive stride");
    for (double v : observations)
        if (!std::isfinite(v)) throw DataError("run '" + id + "' contains a non-finite value");
    for (auto l : labels)
        if (l > 1) throw DataError("run '" + id + "' has a label outside {0,1}");
    if (snr && !(*snr >= 0.0)) throw DataError("run '" + id + "' has a negative snr");
}

std::vector<VariableRange> Dataset::observed_ranges(std::span<const Run> runs) {
    if (runs.empty()) return {};
    const auto n = runs.front().variables;
    std::vector<VariableRange> out(n, {std::numeric_limits<double>::infinity(),
                                       -std::numeric_limits<double>::infinity()});
    for (const auto& run : runs) {
        if (run.variables != n) throw DataError("runs disagree on the number of variables");
        for (std::size_t t = 0; t < run.steps(); ++t) {
            auto row = run.row(t);
            for (std::size_t v = 0; v < n; ++v) {
                out[v].min = std::min(out[v].min, row[v]);
                out[v].max = std::max(out[v].max, row[v]);
            }
        }
    }
    for (auto& r : out) {
        if (!std::isfinite(r.min)) r = {0.0, 1.0};
        if (!(r.max > r.min)) r.max = r.min + 1.0;
    }
    return out;
}

}  // namespace snnts
