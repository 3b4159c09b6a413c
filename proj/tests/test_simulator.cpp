#include <algorithm>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "snnts/simulator.hpp"

using namespace snnts;

namespace {

Network relay_pair(int weight = 1, int in_delay = 0, int thr = 0) {
    Network net;
    net.neurons = {{NeuronId{0}, thr, in_delay, NeuronKind::input}, {NeuronId{1}, thr, 0, NeuronKind::output}};
    net.synapses = {{NeuronId{0}, NeuronId{1}, weight}};
    net.input_order = {NeuronId{0}};
    net.output = NeuronId{1};
    return net;
}

bool has_violation(const Network& net, const std::string& needle) {
    auto v = validate(net);
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("validate reports caps, ranges and references") {
    SUBCASE("257 neurons exceed the cap") {
        Network net = relay_pair();
        for (int i = 2; i < 257; ++i) net.neurons.push_back({NeuronId{i % 256}, 0, 0, NeuronKind::hidden});
        CHECK(has_violation(net, "neuron cap exceeded"));
    }
    SUBCASE("single neuron that is both input and output is valid") {
        Network net;
        net.neurons = {{NeuronId{0}, 0, 0, NeuronKind::output}};
        net.input_order = {NeuronId{0}};
        net.output = NeuronId{0};
        CHECK(validate(net).empty());
    }
    SUBCASE("duplicate synapse pair is a multi-edge") {
        Network net = relay_pair();
        net.synapses.push_back({NeuronId{0}, NeuronId{1}, 5});
        CHECK(has_violation(net, "multi-edge"));
    }
    SUBCASE("4097 synapses exceed the cap") {
        Network net;
        for (int i = 0; i < 65; ++i)
            net.neurons.push_back({NeuronId{i}, 0, 0, i == 0 ? NeuronKind::input : (i == 1 ? NeuronKind::output : NeuronKind::hidden)});
        net.input_order = {NeuronId{0}};
        net.output = NeuronId{1};
        for (int a = 0; a < 65 && net.synapses.size() < 4097; ++a)
            for (int b = 0; b < 65 && net.synapses.size() < 4097; ++b) net.synapses.push_back({NeuronId{a}, NeuronId{b}, 1});
        CHECK(has_violation(net, "synapse cap exceeded"));
        net.synapses.pop_back();
        CHECK(validate(net).empty());
    }
    SUBCASE("parameter ranges") {
        auto net = relay_pair();
        net.neurons[1].threshold = 256;
        CHECK(has_violation(net, "threshold out of range"));
        net = relay_pair();
        net.neurons[0].axon_delay = 16;
        CHECK(has_violation(net, "axon delay out of range"));
        net = relay_pair(128);
        CHECK(has_violation(net, "weight out of range"));
        net = relay_pair(-129);
        CHECK(has_violation(net, "weight out of range"));
        net = relay_pair(-128);
        CHECK(validate(net).empty());
    }
    SUBCASE("dangling synapse and bad interface") {
        auto net = relay_pair();
        net.synapses.push_back({NeuronId{0}, NeuronId{7}, 1});
        CHECK(has_violation(net, "missing neuron"));
        net = relay_pair();
        net.neurons[1].kind = NeuronKind::hidden;
        CHECK(has_violation(net, "output neuron 1 has kind hidden"));
        net = relay_pair();
        net.input_order.clear();
        CHECK_FALSE(validate(net).empty());
    }
}

TEST_CASE("run_window hand trace: relay into output") {
    const auto net = relay_pair();
    SimulatorState state;
    const auto res = run_window(net, state, {{0, 1}}, 4);
    CHECK(res.z == 2);
    CHECK(res.raster.fired.at(1) == std::vector<int>{1, 2});
    CHECK(res.raster.fired.at(0) == std::vector<int>{0, 1});
    CHECK(state.cycle() == 4);
}

TEST_CASE("axon delay adds to the one-cycle hop") {
    const auto net = relay_pair(1, 3);
    SimulatorState state;
    const auto res = run_window(net, state, {{0}}, 8);
    CHECK(res.raster.fired.at(1) == std::vector<int>{4});
}

TEST_CASE("empty input on a fresh state never spikes") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 20; ++k) {
        const auto net = oracle::random_network(rng, 20, 60, 4);
        SimulatorState state;
        const auto res = run_window(net, state, SpikeTrain(4), 32);
        CHECK(res.z == 0);
        CHECK(res.raster.fired.empty());
    }
}

TEST_CASE("invalid inputs are rejected") {
    const auto net = relay_pair();
    SimulatorState state;
    CHECK_THROWS_AS(run_window(net, state, {{4}}, 4), std::invalid_argument);
    CHECK_THROWS_AS(run_window(net, state, {{0}, {1}}, 4), std::invalid_argument);
    auto bad = relay_pair(300);
    CHECK_THROWS_AS(Simulator{bad}, std::invalid_argument);
}

TEST_CASE("event-driven execution matches the dense reference") {
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 200; ++k) {
        const auto net = oracle::random_network(rng, 16, 48, 4);
        const int tau = 1 + static_cast<int>(rng() % 64);
        const auto inputs = oracle::random_spikes(rng, 4, tau, 0.3);
        oracle::DenseSimulator dense(net);
        SimulatorState state;
        SpikeRaster raster;
        const int z = Simulator(net).run_window(state, inputs, tau, &raster);
        const auto expected = dense.run(inputs, tau);
        REQUIRE(raster == expected);
        auto it = expected.fired.find(net.output.value);
        CHECK(z == (it == expected.fired.end() ? 0 : static_cast<int>(it->second.size())));
        for (const auto& n : net.neurons) CHECK(state.charge(n.id) == dense.charge(n.id));
    }
}

TEST_CASE("determinism") {
    std::mt19937_64 rng(5);
    const auto net = oracle::random_network(rng, 24, 80, 6);
    const auto inputs = oracle::random_spikes(rng, 6, 40, 0.4);
    SimulatorState a, b;
    const auto ra = run_window(net, a, inputs, 40);
    const auto rb = run_window(net, b, inputs, 40);
    CHECK(ra.z == rb.z);
    CHECK(ra.raster == rb.raster);
    CHECK(a == b);
}

TEST_CASE("reset") {
    std::mt19937_64 rng(11);
    SUBCASE("populated state becomes zeroed and reset is idempotent") {
        const auto net = oracle::random_network(rng, 16, 60, 4);
        SimulatorState state;
        run_window(net, state, oracle::random_spikes(rng, 4, 30, 0.5), 30);
        state.reset();
        CHECK(state == SimulatorState{});
        CHECK(state.inflight().empty());
        CHECK(state.cycle() == 0);
        for (int i = 0; i <= kMaxNeuronId; ++i) CHECK(state.charge(NeuronId{i}) == 0);
        auto twice = state;
        twice.reset();
        CHECK(twice == state);
    }
    SUBCASE("run after reset equals run on a fresh state") {
        for (int k = 0; k < 100; ++k) {
            const auto net = oracle::random_network(rng, 12, 40, 3);
            const auto warmup = oracle::random_spikes(rng, 3, 20, 0.5);
            const auto probe = oracle::random_spikes(rng, 3, 20, 0.5);
            SimulatorState used;
            run_window(net, used, warmup, 20);
            used.reset();
            SimulatorState fresh;
            const auto a = run_window(net, used, probe, 20);
            const auto b = run_window(net, fresh, probe, 20);
            REQUIRE(a.raster == b.raster);
        }
    }
}

TEST_CASE("statefulness: two windows equal one double window") {
    std::mt19937_64 rng(99);
    for (int k = 0; k < 50; ++k) {
        const auto net = oracle::random_network(rng, 16, 50, 4);
        const int tau = 8 + static_cast<int>(rng() % 24);
        const auto whole = oracle::random_spikes(rng, 4, 2 * tau, 0.3);
        SpikeTrain first(4), second(4);
        for (std::size_t i = 0; i < 4; ++i)
            for (int c : whole[i]) (c < tau ? first[i].push_back(c) : second[i].push_back(c - tau));

        SimulatorState one, split;
        const Simulator sim(net);
        SpikeRaster full, part1, part2;
        sim.run_window(one, whole, 2 * tau, &full);
        sim.run_window(split, first, tau, &part1);
        sim.run_window(split, second, tau, &part2);
        for (auto& [id, cycles] : part2.fired)
            for (int c : cycles) part1.fired[id].push_back(c + tau);
        REQUIRE(full == part1);
        CHECK(one == split);
    }
}

TEST_CASE("saturation clamps without wraparound") {
    // Neuron 2 has a self loop of +127 and threshold 0: once kicked it fires
    // every cycle and drives neurons 3.. with -128 each cycle.
    Network net;
    net.neurons.push_back({NeuronId{0}, 0, 0, NeuronKind::input});
    net.neurons.push_back({NeuronId{1}, 255, 0, NeuronKind::output});
    net.neurons.push_back({NeuronId{2}, 0, 0, NeuronKind::hidden});
    net.synapses.push_back({NeuronId{0}, NeuronId{2}, 1});
    net.synapses.push_back({NeuronId{2}, NeuronId{2}, 127});
    net.synapses.push_back({NeuronId{2}, NeuronId{1}, -128});
    net.input_order = {NeuronId{0}};
    net.output = NeuronId{1};
    net.canonicalize();

    const Simulator sim(net);
    SimulatorState state;
    sim.run_window(state, {{0}}, 1);
    int previous = 0;
    for (int w = 0; w < 400; ++w) {
        sim.run_window(state, {{}}, 1);
        const int c = state.charge(NeuronId{1});
        CHECK(c <= previous);  // monotone decrease, never wraps to positive
        previous = c;
    }
    CHECK(state.charge(NeuronId{1}) == kMinCharge);
}

TEST_CASE("fire-reset: charge is zero on the cycle after a spike") {
    auto net = relay_pair(100, 0, 50);
    net.neurons[0].threshold = 0;
    const Simulator sim(net);
    SimulatorState state;
    sim.run_window(state, {{0}}, 1);  // input fires
    sim.run_window(state, {{}}, 1);   // output receives 100 > 50, fires
    CHECK(state.charge(NeuronId{1}) == 0);
    CHECK(state.charge(NeuronId{0}) == 0);
}

TEST_CASE("inflight deliveries persist across windows") {
    const auto net = relay_pair(1, 10);
    SimulatorState state;
    const auto first = run_window(net, state, {{0}}, 4);
    CHECK(first.z == 0);
    REQUIRE(state.inflight().size() == 1);
    CHECK(state.inflight().front().deliver_cycle == 11);
    CHECK(state.inflight().front().post == NeuronId{1});
    const auto second = run_window(net, state, {{}}, 10);
    CHECK(second.z == 1);
    CHECK(second.raster.fired.at(1) == std::vector<int>{7});
}
