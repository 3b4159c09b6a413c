#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snnts/dataset.hpp"
#include "snnts/encoders.hpp"
#include "snnts/ensemble.hpp"
#include "snnts/evolution.hpp"
#include "snnts/metrics.hpp"
#include "snnts/network.hpp"

namespace snnts {

inline constexpr int kNetworkFormatVersion = 1;
inline constexpr int kPopulationFormatVersion = 1;
inline constexpr int kEnsembleFormatVersion = 1;
inline constexpr int kDatasetFormatVersion = 1;

struct Provenance {
    std::optional<std::uint64_t> seed;
    std::optional<int> epoch;
    std::optional<double> fitness;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// A network together with the encoder it was trained for, so that a saved
/// network is self-describing.
struct NetworkFile {
    Network network;
    std::optional<EncoderSpec> encoder;
    Provenance provenance;

    friend bool operator==(const NetworkFile&, const NetworkFile&) = default;
};

/// Canonical text form: fixed field order, neurons by id, synapses by
/// (pre, post), shortest round-trip decimal for reals. Two semantically equal
/// files therefore serialize to identical bytes.
std::string format_network(const NetworkFile& file);

/// Parses a network document; throws FormatError with the offending line.
NetworkFile parse_network(std::string_view text);

void save_network(const std::filesystem::path& path, const NetworkFile& file);
NetworkFile load_network(const std::filesystem::path& path);

/// Population snapshot: a header line followed by one network document per
/// individual (fitness stored in the provenance).
std::string format_population(std::span<const NetworkFile> networks);
std::vector<NetworkFile> parse_population(std::string_view text);
void save_population(const std::filesystem::path& path, std::span<const NetworkFile> networks);
std::vector<NetworkFile> load_population(const std::filesystem::path& path);

/// Ensemble file: vote, window, and per-member threshold plus the member's
/// network file name (relative to the ensemble file). Member files are written
/// next to it as <stem>.member<i>.net.
struct EnsembleFile {
    Ensemble ensemble;
    EncoderSpec encoder;
};

void save_ensemble(const std::filesystem::path& path, const EnsembleFile& file);
EnsembleFile load_ensemble(const std::filesystem::path& path);

/// Dataset directory: manifest.json plus one CSV per run with columns
/// t,x_1..x_n,label holding raw (unnormalized) values.
void save_dataset(const std::filesystem::path& dir, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& dir);

/// Parses a single run CSV (t,x_1..x_n,label). `expected_variables` of 0
/// accepts any width.
Run parse_run_csv(std::string_view text, std::size_t expected_variables, double stride_seconds,
                  const std::string& id);
std::string format_run_csv(const Run& run);

// CSV exports.
std::string format_roc_csv(const RocCurve& roc);
std::string format_history_csv(std::span<const EpochRecord> history);
std::string format_trace_csv(const std::string& run_id, const StepTrace& trace, std::span<const std::uint8_t> labels);
std::string format_raster_csv(const SpikeRaster& raster);

/// Structured evaluation report (JSON text).
std::string format_report(const EvalReport& report, const std::string& title, int theta, int window);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_real(double value);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace snnts
