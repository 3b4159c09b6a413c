#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "snnts/network.hpp"

namespace snnts {

/// Per input neuron (in Network::input_order order), the cycles at which a
/// unit spike is injected during one inference window.
using SpikeTrain = std::vector<std::vector<int>>;

/// Fired cycles per neuron id, relative to the start of the window.
struct SpikeRaster {
    std::map<int, std::vector<int>> fired;

    std::size_t total_spikes() const;

    friend bool operator==(const SpikeRaster&, const SpikeRaster&) = default;
};

struct Delivery {
    std::int64_t deliver_cycle = 0;
    NeuronId post;
    int weight = 0;

    friend auto operator<=>(const Delivery&, const Delivery&) = default;
};

/// Persistent simulator state carried between windows: neuron charges and
/// spikes still travelling along axons. Charges are indexed by neuron id.
class SimulatorState {
public:
    SimulatorState() { reset(); }

    void reset();

    std::int16_t charge(NeuronId id) const { return charge_[static_cast<std::size_t>(id.value)]; }
    std::int64_t cycle() const { return cycle_; }

    /// Pending deliveries sorted by (deliver_cycle, post, weight).
    std::vector<Delivery> inflight() const;

    friend bool operator==(const SimulatorState& a, const SimulatorState& b);

private:
    friend class Simulator;

    // Longest latency is 1 + kMaxDelay = 16 cycles; slot = cycle mod kRingSize.
    static constexpr std::size_t kRingSize = 32;

    struct Pending {
        std::uint8_t post;
        std::int16_t weight;
    };

    std::array<std::int16_t, kMaxNeuronId + 1> charge_{};
    std::array<std::vector<Pending>, kRingSize> ring_{};
    std::int64_t cycle_ = 0;
};

/// Event-driven integrate-and-fire executor for one validated network.
///
/// Each cycle c: deliveries and input spikes due at c are summed per target
/// and added to its charge with 16-bit saturation; every neuron whose charge
/// exceeds its threshold fires, resets to zero, and schedules each outgoing
/// synapse for cycle c + 1 + axon_delay. There is no leak. Only neurons that
/// received charge in a cycle are examined, since a charge at or below
/// threshold cannot cross it without input.
///
/// A Simulator is immutable after construction and may be shared between
/// threads; each thread needs its own SimulatorState.
class Simulator {
public:
    explicit Simulator(const Network& network);

    /// Advances `state` by exactly `tau` cycles and returns the number of
    /// output spikes. Optionally records every spike into `raster`.
    int run_window(SimulatorState& state, const SpikeTrain& inputs, int tau,
                   SpikeRaster* raster = nullptr) const;

    std::size_t input_count() const { return input_ids_.size(); }
    NeuronId output() const { return NeuronId{output_}; }

private:
    struct OutEdge {
        std::uint8_t post;
        std::int16_t weight;
    };

    std::array<std::int16_t, kMaxNeuronId + 1> threshold_{};
    std::array<std::uint8_t, kMaxNeuronId + 1> delay_{};
    std::array<std::uint32_t, kMaxNeuronId + 2> out_begin_{};
    std::vector<OutEdge> out_edges_;
    std::vector<std::uint8_t> input_ids_;
    int output_ = 0;
};

struct WindowResult {
    int z = 0;
    SpikeRaster raster;
};

/// Convenience wrapper: validates, runs one window, and records the raster.
WindowResult run_window(const Network& network, SimulatorState& state, const SpikeTrain& inputs, int tau);

}  // namespace snnts
