#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace snnts {

// Capacity and parameter envelope of the target neuromorphic core.
inline constexpr int kMaxNeurons = 256;
inline constexpr int kMaxSynapses = 4096;
inline constexpr int kMaxNeuronId = 255;
inline constexpr int kMinThreshold = 0;
inline constexpr int kMaxThreshold = 255;
inline constexpr int kMinWeight = -128;
inline constexpr int kMaxWeight = 127;
inline constexpr int kMinDelay = 0;
inline constexpr int kMaxDelay = 15;
inline constexpr int kMinCharge = -32768;
inline constexpr int kMaxCharge = 32767;

/// Neuron identifier. Stored wider than 8 bits so that out-of-range ids can be
/// represented and reported by validate().
struct NeuronId {
    int value = 0;

    friend auto operator<=>(const NeuronId&, const NeuronId&) = default;
};

enum class NeuronKind { input, hidden, output };

std::string to_string(NeuronKind kind);
std::optional<NeuronKind> parse_neuron_kind(const std::string& text);

struct Neuron {
    NeuronId id;
    int threshold = 0;   // charge units, 8-bit unsigned on hardware
    int axon_delay = 0;  // cycles, 4-bit on hardware
    NeuronKind kind = NeuronKind::hidden;

    friend bool operator==(const Neuron&, const Neuron&) = default;
};

struct Synapse {
    NeuronId pre;
    NeuronId post;
    int weight = 0;  // signed 8-bit on hardware

    friend bool operator==(const Synapse&, const Synapse&) = default;
};

/// The genome and the deployable artifact. Neurons are kept sorted by id and
/// synapses by (pre, post) once canonicalize() has been called; every
/// operation in this library that produces a Network returns it canonical.
struct Network {
    std::vector<Neuron> neurons;
    std::vector<Synapse> synapses;
    std::vector<NeuronId> input_order;
    NeuronId output;

    void canonicalize();

    /// Index of the neuron with this id in `neurons`, if present. Requires a
    /// canonical network (binary search).
    std::optional<std::size_t> index_of(NeuronId id) const;

    const Neuron* find(NeuronId id) const;
    Neuron* find(NeuronId id);

    bool has_synapse(NeuronId pre, NeuronId post) const;

    /// Smallest id in 0..255 not used by any neuron.
    std::optional<NeuronId> free_id() const;

    std::size_t hidden_count() const;

    friend bool operator==(const Network&, const Network&) = default;
};

/// Every cap, range, and reference violation of `network`; empty iff the
/// network can be simulated and deployed.
std::vector<std::string> validate(const Network& network);

/// Throws std::invalid_argument listing the violations when the network is
/// not valid.
void require_valid(const Network& network);

}  // namespace snnts
