#include "snnts/network.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace snnts {

std::string to_string(NeuronKind kind) {
    switch (kind) {
    case NeuronKind::input: return "input";
    case NeuronKind::hidden: return "hidden";
    case NeuronKind::output: return "output";
    }
    return "?";
}

std::optional<NeuronKind> parse_neuron_kind(const std::string& text) {
    if (text == "input") return NeuronKind::input;
    if (text == "hidden") return NeuronKind::hidden;
    if (text == "output") return NeuronKind::output;
    return std::nullopt;
}

void Network::canonicalize() {
    std::sort(neurons.begin(), neurons.end(),
              [](const Neuron& a, const Neuron& b) { return a.id < b.id; });
    std::sort(synapses.begin(), synapses.end(), [](const Synapse& a, const Synapse& b) {
        return std::tie(a.pre, a.post) < std::tie(b.pre, b.post);
    });
}

std::optional<std::size_t> Network::index_of(NeuronId id) const {
    auto it = std::lower_bound(neurons.begin(), neurons.end(), id,
                               [](const Neuron& n, NeuronId v) { return n.id < v; });
    if (it == neurons.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - neurons.begin());
}

const Neuron* Network::find(NeuronId id) const {
    auto idx = index_of(id);
    return idx ? &neurons[*idx] : nullptr;
}

Neuron* Network::find(NeuronId id) {
    auto idx = index_of(id);
    return idx ? &neurons[*idx] : nullptr;
}

bool Network::has_synapse(NeuronId pre, NeuronId post) const {
    auto it = std::lower_bound(synapses.begin(), synapses.end(), std::pair{pre, post},
                               [](const Synapse& s, const std::pair<NeuronId, NeuronId>& key) {
                                   return std::tie(s.pre, s.post) < std::tie(key.first, key.second);
                               });
    return it != synapses.end() && it->pre == pre && it->post == post;
}

std::optional<NeuronId> Network::free_id() const {
    // neurons are sorted, so the first gap is the answer
    int expected = 0;
    for (const auto& n : neurons) {
        if (n.id.value > expected) break;
        if (n.id.value == expected) ++expected;
    }
    if (expected > kMaxNeuronId) return std::nullopt;
    return NeuronId{expected};
}

std::size_t Network::hidden_count() const {
    return static_cast<std::size_t>(std::count_if(
        neurons.begin(), neurons.end(), [](const Neuron& n) { return n.kind == NeuronKind::hidden; }));
}

std::vector<std::string> validate(const Network& network) {
    std::vector<std::string> out;
    auto report = [&out](auto&&... parts) {
        std::ostringstream os;
        (os << ... << parts);
        out.push_back(os.str());
    };

    if (network.neurons.size() > static_cast<std::size_t>(kMaxNeurons))
        report("neuron cap exceeded: ", network.neurons.size(), " > ", kMaxNeurons);
    if (network.synapses.size() > static_cast<std::size_t>(kMaxSynapses))
        report("synapse cap exceeded: ", network.synapses.size(), " > ", kMaxSynapses);

    std::set<NeuronId> ids;
    for (const auto& n : network.neurons) {
        if (n.id.value < 0 || n.id.value > kMaxNeuronId)
            report("neuron id out of range: ", n.id.value);
        if (!ids.insert(n.id).second) report("duplicate neuron id: ", n.id.value);
        if (n.threshold < kMinThreshold || n.threshold > kMaxThreshold)
            report("threshold out of range on neuron ", n.id.value, ": ", n.threshold);
        if (n.axon_delay < kMinDelay || n.axon_delay > kMaxDelay)
            report("axon delay out of range on neuron ", n.id.value, ": ", n.axon_delay);
    }

    std::set<std::pair<NeuronId, NeuronId>> edges;
    for (const auto& s : network.synapses) {
        if (!ids.count(s.pre) || !ids.count(s.post))
            report("synapse ", s.pre.value, "->", s.post.value, " references a missing neuron");
        if (s.weight < kMinWeight || s.weight > kMaxWeight)
            report("weight out of range on synapse ", s.pre.value, "->", s.post.value, ": ", s.weight);
        if (!edges.insert({s.pre, s.post}).second)
            report("multi-edge ", s.pre.value, "->", s.post.value);
    }

    if (network.input_order.empty()) report("network has no input neurons");
    std::set<NeuronId> inputs;
    for (auto id : network.input_order) {
        if (!inputs.insert(id).second) report("input neuron listed twice: ", id.value);
        auto it = std::find_if(network.neurons.begin(), network.neurons.end(),
                               [id](const Neuron& n) { return n.id == id; });
        if (it == network.neurons.end()) {
            report("input neuron ", id.value, " does not exist");
        } else if (it->kind != NeuronKind::input && id != network.output) {
            report("input neuron ", id.value, " has kind ", to_string(it->kind));
        }
    }

    auto out_it = std::find_if(network.neurons.begin(), network.neurons.end(),
                               [&](const Neuron& n) { return n.id == network.output; });
    if (out_it == network.neurons.end()) {
        report("output neuron ", network.output.value, " does not exist");
    } else {
        // The single output may double as an input (one-neuron network); then
        // its kind is output.
        if (out_it->kind != NeuronKind::output)
            report("output neuron ", network.output.value, " has kind ", to_string(out_it->kind));
    }
    for (const auto& n : network.neurons) {
        if (n.kind == NeuronKind::output && n.id != network.output)
            report("neuron ", n.id.value, " has kind output but is not the network output");
        if (n.kind == NeuronKind::input && !inputs.count(n.id))
            report("neuron ", n.id.value, " has kind input but is not in the input order");
    }
    return out;
}

void require_valid(const Network& network) {
    auto violations = validate(network);
    if (violations.empty()) return;
    std::string msg = "invalid network:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw std::invalid_argument(msg);
}

}  // namespace snnts
