#include "snnts/evolution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "snnts/errors.hpp"
#include "snnts/parallel.hpp"

namespace snnts {

namespace {

constexpr int kMutationRedraws = 16;
constexpr int kEdgeProbes = 64;

// Stream tags for derive_seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBatchStream = 2;
constexpr std::uint64_t kGenerationStream = 3;

double weight_of(const std::map<std::string, double>& weights, const std::string& key) {
    auto it = weights.find(key);
    return it == weights.end() ? 0.0 : it->second;
}

Neuron random_neuron(NeuronId id, NeuronKind kind, Rng& rng) {
    return {id, kind == NeuronKind::input ? 0 : uniform_int(rng, kMinThreshold, kMaxThreshold),
            uniform_int(rng, kMinDelay, kMaxDelay), kind};
}

int random_weight(Rng& rng) { return uniform_int(rng, kMinWeight, kMaxWeight); }

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
    return items[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(items.size()) - 1))];
}

// Tries to add a synapse between two random neurons not yet connected.
bool add_random_edge(Network& net, Rng& rng) {
    const auto n = net.neurons.size();
    if (net.synapses.size() >= static_cast<std::size_t>(kMaxSynapses) || net.synapses.size() >= n * n) return false;
    for (int probe = 0; probe < kEdgeProbes; ++probe) {
        const auto pre = pick(net.neurons, rng).id;
        const auto post = pick(net.neurons, rng).id;
        if (net.has_synapse(pre, post)) continue;
        net.synapses.push_back({pre, post, random_weight(rng)});
        net.canonicalize();
        return true;
    }
    // dense network: enumerate the free pairs
    std::vector<std::pair<NeuronId, NeuronId>> free;
    for (const auto& a : net.neurons)
        for (const auto& b : net.neurons)
            if (!net.has_synapse(a.id, b.id)) free.emplace_back(a.id, b.id);
    if (free.empty()) return false;
    const auto [pre, post] = pick(free, rng);
    net.synapses.push_back({pre, post, random_weight(rng)});
    net.canonicalize();
    return true;
}

bool same_interface(const Network& a, const Network& b) {
    if (a.input_order != b.input_order || a.output != b.output) return false;
    return true;
}

}  // namespace

void EonsParams::check() const {
    if (population_size < 2) throw std::invalid_argument("population_size must be >= 2");
    if (starting_nodes < 1 || starting_edges < 0) throw std::invalid_argument("starting sizes must be positive");
    if (num_mutations < 0 || num_best < 0) throw std::invalid_argument("counts must be non-negative");
    for (double r : {crossover_rate, mutation_rate, tournament_size_factor, tournament_best_net_factor, random_factor,
                     add_node_rate, delete_node_rate, add_edge_rate, delete_edge_rate, node_params_rate,
                     edge_params_rate, merge_rate}) {
        if (!(r >= 0.0)) throw std::invalid_argument("rates must be non-negative");
    }
    if (merge_rate != 0.0) throw std::invalid_argument("merge_rate > 0 is not supported");
    if (multi_edges) throw std::invalid_argument("multi_edges is not supported by the hardware target");
}

int EonsParams::tournament_size() const {
    return std::max(2, static_cast<int>(std::lround(tournament_size_factor * population_size)));
}

std::string to_string(FitnessKind kind) { return kind == FitnessKind::mcc ? "mcc" : "f1_tpr0sq"; }

FitnessKind parse_fitness_kind(const std::string& text) {
    if (text == "mcc") return FitnessKind::mcc;
    if (text == "f1_tpr0sq" || text == "f1_plus_tpr0sq") return FitnessKind::f1_plus_tpr0sq;
    throw std::invalid_argument("unknown fitness '" + text + "'");
}

Network random_network(const EonsParams& params, std::size_t n_inputs, Rng& rng) {
    if (n_inputs == 0) throw std::invalid_argument("a network needs at least one input");
    if (n_inputs + 1 > static_cast<std::size_t>(kMaxNeurons))
        throw std::invalid_argument("too many inputs for the neuron cap");
    const auto total = std::min<std::size_t>(
        std::max<std::size_t>(static_cast<std::size_t>(params.starting_nodes), n_inputs + 1), kMaxNeurons);

    Network net;
    for (std::size_t i = 0; i < n_inputs; ++i) {
        net.neurons.push_back(random_neuron(NeuronId{static_cast<int>(i)}, NeuronKind::input, rng));
        net.input_order.push_back(NeuronId{static_cast<int>(i)});
    }
    net.output = NeuronId{static_cast<int>(n_inputs)};
    net.neurons.push_back(random_neuron(net.output, NeuronKind::output, rng));
    for (auto i = n_inputs + 1; i < total; ++i)
        net.neurons.push_back(random_neuron(NeuronId{static_cast<int>(i)}, NeuronKind::hidden, rng));

    const auto edges = std::min<std::size_t>({static_cast<std::size_t>(params.starting_edges), total * total,
                                              static_cast<std::size_t>(kMaxSynapses)});
    while (net.synapses.size() < edges) add_random_edge(net, rng);
    net.canonicalize();
    return net;
}

std::vector<Network> init_population(const EonsParams& params, std::size_t n_inputs, std::uint64_t seed) {
    params.check();
    std::vector<Network> pop;
    pop.reserve(static_cast<std::size_t>(params.population_size));
    for (int i = 0; i < params.population_size; ++i) {
        Rng rng(derive_seed(seed, {kInitStream, static_cast<std::uint64_t>(i)}));
        pop.push_back(random_network(params, n_inputs, rng));
    }
    return pop;
}

std::size_t tournament_select(std::span<const ScoredNetwork> scored, const EonsParams& params, Rng& rng) {
    if (scored.empty()) throw std::invalid_argument("tournament over an empty population");
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(params.tournament_size()), scored.size());

    // k distinct entrants via partial Fisher-Yates
    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(order.size() - i) - 1));
        std::swap(order[i], order[j]);
    }
    if (bernoulli(rng, params.tournament_best_net_factor)) {
        std::size_t best = order[0];
        for (std::size_t i = 1; i < k; ++i)
            if (scored[order[i]].fitness > scored[best].fitness) best = order[i];
        return best;
    }
    return order[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(k) - 1))];
}

Network crossover(const Network& a, const Network& b, Rng& rng) {
    if (!same_interface(a, b)) throw std::invalid_argument("crossover parents have different interfaces");

    Network child;
    child.input_order = a.input_order;
    child.output = a.output;

    // merge neurons by id (both parents are canonical)
    std::size_t i = 0, j = 0;
    while (i < a.neurons.size() || j < b.neurons.size()) {
        const Neuron* na = i < a.neurons.size() ? &a.neurons[i] : nullptr;
        const Neuron* nb = j < b.neurons.size() ? &b.neurons[j] : nullptr;
        if (na && nb && na->id == nb->id) {
            child.neurons.push_back(bernoulli(rng, 0.5) ? *na : *nb);
            ++i;
            ++j;
            continue;
        }
        const bool take_a = na && (!nb || na->id < nb->id);
        const Neuron& only = take_a ? *na : *nb;
        (take_a ? i : j)++;
        // input/output neurons are shared by construction; only hidden ids can be unique
        if (only.kind != NeuronKind::hidden || bernoulli(rng, 0.5)) child.neurons.push_back(only);
    }

    auto survived = [&child](NeuronId id) { return child.index_of(id).has_value(); };
    i = 0;
    j = 0;
    auto key = [](const Synapse& s) { return std::tie(s.pre, s.post); };
    while (i < a.synapses.size() || j < b.synapses.size()) {
        const Synapse* sa = i < a.synapses.size() ? &a.synapses[i] : nullptr;
        const Synapse* sb = j < b.synapses.size() ? &b.synapses[j] : nullptr;
        const Synapse* chosen = nullptr;
        if (sa && sb && key(*sa) == key(*sb)) {
            chosen = bernoulli(rng, 0.5) ? sa : sb;
            ++i;
            ++j;
        } else {
            const bool take_a = sa && (!sb || key(*sa) < key(*sb));
            const Synapse* only = take_a ? sa : sb;
            (take_a ? i : j)++;
            if (bernoulli(rng, 0.5)) chosen = only;
        }
        if (chosen && survived(chosen->pre) && survived(chosen->post)) child.synapses.push_back(*chosen);
    }

    while (child.synapses.size() > static_cast<std::size_t>(kMaxSynapses)) {
        const auto victim = static_cast<std::ptrdiff_t>(
            uniform_int(rng, 0, static_cast<int>(child.synapses.size()) - 1));
        child.synapses.erase(child.synapses.begin() + victim);
    }
    child.canonicalize();
    return child;
}

bool apply_mutation(Network& net, MutationKind kind, Rng& rng) {
    switch (kind) {
    case MutationKind::add_node: {
        if (net.neurons.size() >= static_cast<std::size_t>(kMaxNeurons)) return false;
        auto id = net.free_id();
        if (!id) return false;
        const auto neuron = random_neuron(*id, NeuronKind::hidden, rng);
        // wire the new neuron in with one incoming and one outgoing synapse
        const auto from = pick(net.neurons, rng).id;
        const auto to = pick(net.neurons, rng).id;
        net.neurons.push_back(neuron);
        net.canonicalize();
        if (net.synapses.size() < static_cast<std::size_t>(kMaxSynapses))
            net.synapses.push_back({from, *id, random_weight(rng)});
        if (net.synapses.size() < static_cast<std::size_t>(kMaxSynapses))
            net.synapses.push_back({*id, to, random_weight(rng)});
        net.canonicalize();
        return true;
    }
    case MutationKind::delete_node: {
        std::vector<NeuronId> hidden;
        for (const auto& n : net.neurons)
            if (n.kind == NeuronKind::hidden) hidden.push_back(n.id);
        if (hidden.empty()) return false;
        const auto victim = pick(hidden, rng);
        std::erase_if(net.neurons, [victim](const Neuron& n) { return n.id == victim; });
        std::erase_if(net.synapses, [victim](const Synapse& s) { return s.pre == victim || s.post == victim; });
        return true;
    }
    case MutationKind::add_edge:
        return add_random_edge(net, rng);
    case MutationKind::delete_edge: {
        if (net.synapses.empty()) return false;
        const auto victim = static_cast<std::ptrdiff_t>(uniform_int(rng, 0, static_cast<int>(net.synapses.size()) - 1));
        net.synapses.erase(net.synapses.begin() + victim);
        return true;
    }
    case MutationKind::node_params: {
        std::vector<std::size_t> candidates;
        for (std::size_t k = 0; k < net.neurons.size(); ++k)
            if (net.neurons[k].kind != NeuronKind::input) candidates.push_back(k);
        if (candidates.empty()) return false;
        net.neurons[pick(candidates, rng)].threshold = uniform_int(rng, kMinThreshold, kMaxThreshold);
        return true;
    }
    case MutationKind::edge_params:
        // handled by mutate(), which knows the parameter weights
        return false;
    }
    return false;
}

namespace {

bool mutate_edge_params(Network& net, const EonsParams& params, Rng& rng) {
    if (net.synapses.empty()) return false;
    const double w = weight_of(params.edge_param_weights, "weight");
    const double d = weight_of(params.edge_param_weights, "delay");
    if (w + d <= 0.0) return false;
    auto& syn = net.synapses[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(net.synapses.size()) - 1))];
    if (uniform01(rng) * (w + d) < w) {
        syn.weight = random_weight(rng);
    } else {
        // axon delay belongs to the presynaptic neuron
        net.find(syn.pre)->axon_delay = uniform_int(rng, kMinDelay, kMaxDelay);
    }
    return true;
}

bool mutate_node_params(Network& net, const EonsParams& params, Rng& rng) {
    if (weight_of(params.node_param_weights, "threshold") <= 0.0) return false;
    return apply_mutation(net, MutationKind::node_params, rng);
}

}  // namespace

Network mutate(const Network& network, const EonsParams& params, Rng& rng) {
    Network net = network;
    const std::array<double, 6> rates{params.add_node_rate,   params.delete_node_rate, params.add_edge_rate,
                                      params.delete_edge_rate, params.node_params_rate, params.edge_params_rate};
    if (std::accumulate(rates.begin(), rates.end(), 0.0) <= 0.0) return net;
    std::discrete_distribution<int> category(rates.begin(), rates.end());

    for (int m = 0; m < params.num_mutations; ++m) {
        for (int attempt = 0; attempt < kMutationRedraws; ++attempt) {
            const auto kind = static_cast<MutationKind>(category(rng));
            bool applied = false;
            if (kind == MutationKind::edge_params) applied = mutate_edge_params(net, params, rng);
            else if (kind == MutationKind::node_params) applied = mutate_node_params(net, params, rng);
            else applied = apply_mutation(net, kind, rng);
            if (applied) break;
        }
    }
    net.canonicalize();
    return net;
}

std::vector<Network> next_generation(std::span<const ScoredNetwork> scored, const EonsParams& params,
                                     std::uint64_t generation_seed) {
    params.check();
    if (scored.empty()) throw std::invalid_argument("next_generation needs a scored population");

    std::vector<std::size_t> rank(scored.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t x, std::size_t y) { return scored[x].fitness > scored[y].fitness; });

    const auto size = static_cast<std::size_t>(params.population_size);
    std::vector<Network> next;
    next.reserve(size);
    for (std::size_t e = 0; e < std::min<std::size_t>(static_cast<std::size_t>(params.num_best), rank.size()) &&
                            next.size() < size;
         ++e)
        next.push_back(scored[rank[e]].network);

    const auto n_inputs = scored.front().network.input_order.size();
    const auto randoms = static_cast<std::size_t>(std::floor(params.random_factor * params.population_size + 1e-9));
    for (std::size_t r = 0; r < randoms && next.size() < size; ++r) {
        Rng rng(derive_seed(generation_seed, {next.size()}));
        next.push_back(random_network(params, n_inputs, rng));
    }

    while (next.size() < size) {
        Rng rng(derive_seed(generation_seed, {next.size()}));
        const auto& p1 = scored[tournament_select(scored, params, rng)].network;
        Network child;
        if (bernoulli(rng, params.crossover_rate)) {
            const auto& p2 = scored[tournament_select(scored, params, rng)].network;
            child = crossover(p1, p2, rng);
        } else {
            child = p1;
        }
        if (bernoulli(rng, params.mutation_rate)) child = mutate(child, params, rng);
        next.push_back(std::move(child));
    }
    return next;
}

double snr_gamma(int epoch, int total_epochs, const TrainConfig& cfg) {
    const double ramp_end = cfg.snr_ramp_fraction * total_epochs;
    if (!(ramp_end > 0.0)) return 0.0;
    return cfg.snr_gamma0 * std::max(0.0, 1.0 - epoch / ramp_end);
}

std::vector<std::size_t> sample_batch(std::span<const Run> runs, int epoch, int total_epochs, const TrainConfig& cfg,
                                      Rng& rng) {
    if (runs.empty()) throw std::invalid_argument("cannot sample from an empty dataset");
    const auto n = runs.size();
    const auto count = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(cfg.batch_fraction * static_cast<double>(n) - 1e-9)), 1, n);

    std::vector<double> weights(n, 1.0);
    const double gamma = snr_gamma(epoch, total_epochs, cfg);
    double max_snr = 0.0;
    for (const auto& r : runs)
        if (r.snr) max_snr = std::max(max_snr, *r.snr);
    if (gamma > 0.0 && max_snr > 0.0) {
        double sum = 0.0;
        std::size_t sources = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!runs[i].snr) continue;
            weights[i] = std::pow(*runs[i].snr / max_snr, gamma);
            sum += weights[i];
            ++sources;
        }
        const double mean = sum / static_cast<double>(sources);
        for (std::size_t i = 0; i < n; ++i)
            if (!runs[i].snr) weights[i] = mean;
    }

    std::vector<std::size_t> remaining(n);
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<std::size_t> batch;
    batch.reserve(count);
    while (batch.size() < count) {
        double total = 0.0;
        for (auto i : remaining) total += weights[i];
        std::size_t pos = 0;
        if (total > 0.0) {
            double u = uniform01(rng) * total;
            for (; pos + 1 < remaining.size(); ++pos) {
                u -= weights[remaining[pos]];
                if (u < 0.0) break;
            }
        } else {
            pos = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(remaining.size()) - 1));
        }
        batch.push_back(remaining[pos]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pos));
    }
    return batch;
}

FitnessEvaluator::FitnessEvaluator(std::vector<const EncodedRun*> runs, std::vector<const Run*> sources, int tau,
                                   FitnessKind fitness, ScoringMode mode)
    : runs_(std::move(runs)), sources_(std::move(sources)), tau_(tau), fitness_(fitness), mode_(mode) {
    if (runs_.size() != sources_.size()) throw std::invalid_argument("encoded runs and sources differ in count");
}

FitnessEvaluator::FitnessEvaluator(std::span<const Run> runs, const EncoderSpec& spec, FitnessKind fitness,
                                   ScoringMode mode)
    : tau_(spec.tau), fitness_(fitness), mode_(mode) {
    owned_.reserve(runs.size());
    for (const auto& r : runs) {
        owned_.push_back(encode_run(r, spec));
        sources_.push_back(&r);
    }
    for (const auto& e : owned_) runs_.push_back(&e);
}

ScoredNetwork FitnessEvaluator::score(const Network& network) const {
    const Simulator sim(network);
    std::vector<LabeledTrace> traces;
    traces.reserve(runs_.size());
    ScoredNetwork out{network, 0.0, {}};
    for (std::size_t i = 0; i < runs_.size(); ++i) {
        LabeledTrace tr{output_counts(sim, *runs_[i], tau_), sources_[i]->labels, sources_[i]->stride_seconds};
        std::vector<std::uint8_t> y(tr.z.size());
        for (std::size_t t = 0; t < y.size(); ++t) y[t] = tr.z[t] > 0;
        out.cm += confusion(y, tr.labels, mode_);
        traces.push_back(std::move(tr));
    }
    out.fitness = fitness_ == FitnessKind::mcc ? fitness_mcc(out.cm) : fitness_f1_tpr0sq(traces, mode_);
    return out;
}

std::vector<ScoredNetwork> FitnessEvaluator::score_all(std::span<const Network> networks, unsigned jobs) const {
    std::vector<ScoredNetwork> out(networks.size());
    parallel_for(networks.size(), jobs, [&](std::size_t i) { out[i] = score(networks[i]); });
    return out;
}

TrainResult train(const Dataset& data, const EncoderSpec& spec, const EonsParams& params, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    params.check();
    spec.check();
    if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(cfg.batch_fraction > 0.0 && cfg.batch_fraction <= 1.0))
        throw std::invalid_argument("batch_fraction must be in (0, 1]");
    if (data.runs.empty()) throw DataError("training dataset is empty");
    std::size_t positives = 0, steps = 0;
    for (const auto& r : data.runs) {
        positives += r.positives();
        steps += r.steps();
    }
    if (positives == 0 || positives == steps) throw DataError("training data must contain both classes");

    std::vector<EncodedRun> encoded;
    encoded.reserve(data.runs.size());
    for (const auto& r : data.runs) encoded.push_back(encode_run(r, spec));

    auto population = init_population(params, spec.input_count(), derive_seed(cfg.seed, {kInitStream}));
    TrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng batch_rng(derive_seed(cfg.seed, {kBatchStream, static_cast<std::uint64_t>(epoch)}));
        const auto batch = sample_batch(data.runs, epoch, cfg.epochs, cfg, batch_rng);
        std::vector<const EncodedRun*> batch_encoded;
        std::vector<const Run*> batch_runs;
        for (auto i : batch) {
            batch_encoded.push_back(&encoded[i]);
            batch_runs.push_back(&data.runs[i]);
        }
        const FitnessEvaluator evaluator(std::move(batch_encoded), std::move(batch_runs), spec.tau, cfg.fitness,
                                         cfg.mode);
        result.population = evaluator.score_all(population, cfg.jobs);

        std::size_t best = 0;
        double sum = 0.0;
        for (std::size_t i = 0; i < result.population.size(); ++i) {
            sum += result.population[i].fitness;
            if (result.population[i].fitness > result.population[best].fitness) best = i;
        }
        const auto& b = result.population[best];
        result.history.push_back({epoch, b.fitness, sum / static_cast<double>(result.population.size()),
                                  b.network.neurons.size(), b.network.synapses.size()});
        result.best = b;

        if (on_epoch && !on_epoch(result.history.back(), result.population)) break;
        if (epoch + 1 < cfg.epochs)
            population = next_generation(result.population, params,
                                         derive_seed(cfg.seed, {kGenerationStream, static_cast<std::uint64_t>(epoch)}));
    }
    return result;
}

}  // namespace snnts
