#include "snnts/simulator.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace snnts {

std::size_t SpikeRaster::total_spikes() const {
    std::size_t n = 0;
    for (const auto& [id, cycles] : fired) n += cycles.size();
    return n;
}

void SimulatorState::reset() {
    charge_.fill(0);
    for (auto& slot : ring_) slot.clear();
    cycle_ = 0;
}

std::vector<Delivery> SimulatorState::inflight() const {
    std::vector<Delivery> out;
    for (std::size_t ahead = 0; ahead < kRingSize; ++ahead) {
        const auto at = cycle_ + static_cast<std::int64_t>(ahead);
        for (const auto& p : ring_[static_cast<std::size_t>(at) % kRingSize])
            out.push_back({at, NeuronId{p.post}, p.weight});
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool operator==(const SimulatorState& a, const SimulatorState& b) {
    return a.cycle_ == b.cycle_ && a.charge_ == b.charge_ && a.inflight() == b.inflight();
}

Simulator::Simulator(const Network& network) {
    require_valid(network);
    for (const auto& n : network.neurons) {
        threshold_[static_cast<std::size_t>(n.id.value)] = static_cast<std::int16_t>(n.threshold);
        delay_[static_cast<std::size_t>(n.id.value)] = static_cast<std::uint8_t>(n.axon_delay);
    }
    std::array<std::uint32_t, kMaxNeuronId + 1> degree{};
    for (const auto& s : network.synapses) ++degree[static_cast<std::size_t>(s.pre.value)];
    for (std::size_t i = 0; i <= kMaxNeuronId; ++i) out_begin_[i + 1] = out_begin_[i] + degree[i];
    out_edges_.resize(network.synapses.size());
    auto cursor = out_begin_;
    for (const auto& s : network.synapses) {
        out_edges_[cursor[static_cast<std::size_t>(s.pre.value)]++] =
            OutEdge{static_cast<std::uint8_t>(s.post.value), static_cast<std::int16_t>(s.weight)};
    }
    for (auto id : network.input_order) input_ids_.push_back(static_cast<std::uint8_t>(id.value));
    output_ = network.output.value;
}

int Simulator::run_window(SimulatorState& state, const SpikeTrain& inputs, int tau,
                          SpikeRaster* raster) const {
    if (tau < 0) throw std::invalid_argument("tau must be non-negative");
    if (inputs.size() != input_ids_.size()) {
        throw std::invalid_argument("spike train has " + std::to_string(inputs.size()) +
                                    " input rows, network has " + std::to_string(input_ids_.size()) +
                                    " input neurons");
    }

    // Bucket input spikes by cycle (counting sort).
    std::vector<std::uint32_t> start(static_cast<std::size_t>(tau) + 1, 0);
    for (const auto& row : inputs) {
        for (int c : row) {
            if (c < 0 || c >= tau)
                throw std::invalid_argument("input spike cycle " + std::to_string(c) + " outside [0, tau)");
            ++start[static_cast<std::size_t>(c) + 1];
        }
    }
    for (std::size_t c = 1; c < start.size(); ++c) start[c] += start[c - 1];
    std::vector<std::uint8_t> scheduled(start.back());
    {
        auto fill = start;
        for (std::size_t i = 0; i < inputs.size(); ++i)
            for (int c : inputs[i]) scheduled[fill[static_cast<std::size_t>(c)]++] = input_ids_[i];
    }

    std::array<std::int32_t, kMaxNeuronId + 1> accum{};
    std::array<bool, kMaxNeuronId + 1> touched_flag{};
    std::vector<std::uint8_t> touched;
    touched.reserve(kMaxNeuronId + 1);
    auto touch = [&](std::uint8_t id, std::int32_t w) {
        accum[id] += w;
        if (!touched_flag[id]) {
            touched_flag[id] = true;
            touched.push_back(id);
        }
    };

    int z = 0;
    for (int local = 0; local < tau; ++local) {
        const auto cycle = state.cycle_;
        auto& due = state.ring_[static_cast<std::size_t>(cycle) % SimulatorState::kRingSize];
        for (const auto& p : due) touch(p.post, p.weight);
        due.clear();
        for (auto i = start[static_cast<std::size_t>(local)]; i < start[static_cast<std::size_t>(local) + 1]; ++i)
            touch(scheduled[i], 1);

        for (auto id : touched) {
            auto& charge = state.charge_[id];
            const auto next = std::clamp<std::int32_t>(charge + accum[id], kMinCharge, kMaxCharge);
            accum[id] = 0;
            touched_flag[id] = false;
            if (next > threshold_[id]) {
                charge = 0;
                const auto slot = static_cast<std::size_t>(cycle + 1 + delay_[id]) % SimulatorState::kRingSize;
                for (auto e = out_begin_[id]; e < out_begin_[id + 1u]; ++e)
                    state.ring_[slot].push_back({out_edges_[e].post, out_edges_[e].weight});
                if (id == output_) ++z;
                if (raster) raster->fired[id].push_back(local);
            } else {
                charge = static_cast<std::int16_t>(next);
            }
        }
        touched.clear();
        ++state.cycle_;
    }
    return z;
}

WindowResult run_window(const Network& network, SimulatorState& state, const SpikeTrain& inputs, int tau) {
    WindowResult result;
    result.z = Simulator(network).run_window(state, inputs, tau, &result.raster);
    return result;
}

}  // namespace snnts
