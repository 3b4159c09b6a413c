#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "snnts/dataset.hpp"
#include "snnts/encoders.hpp"
#include "snnts/inference.hpp"
#include "snnts/metrics.hpp"
#include "snnts/network.hpp"
#include "snnts/random.hpp"

namespace snnts {

/// Evolutionary optimizer hyperparameters. Defaults are the values used for
/// every application in the original study.
struct EonsParams {
    int starting_nodes = 50;
    int starting_edges = 50;
    int population_size = 100;
    double crossover_rate = 0.5;
    double mutation_rate = 0.9;
    double tournament_size_factor = 0.1;
    double tournament_best_net_factor = 0.9;
    double random_factor = 0.05;
    int num_mutations = 4;
    int num_best = 3;
    double add_node_rate = 0.5;
    double delete_node_rate = 0.25;
    double add_edge_rate = 0.75;
    double delete_edge_rate = 0.25;
    double node_params_rate = 2.5;
    double edge_params_rate = 2.5;
    std::map<std::string, double> node_param_weights{{"threshold", 1.0}};
    std::map<std::string, double> edge_param_weights{{"weight", 0.7}, {"delay", 0.3}};
    double merge_rate = 0.0;
    bool multi_edges = false;

    void check() const;

    /// Entrants per tournament: max(2, round(factor * population_size)).
    int tournament_size() const;
};

enum class FitnessKind { mcc, f1_plus_tpr0sq };

std::string to_string(FitnessKind kind);
FitnessKind parse_fitness_kind(const std::string& text);

struct TrainConfig {
    int epochs = 100;
    double batch_fraction = 0.01;
    double snr_gamma0 = 3.0;
    double snr_ramp_fraction = 0.5;
    FitnessKind fitness = FitnessKind::mcc;
    std::uint64_t seed = 0;
    ScoringMode mode = ScoringMode::sample;
    unsigned jobs = 1;
};

struct ScoredNetwork {
    Network network;
    double fitness = 0.0;
    ConfusionMatrix cm;  // at theta 0 on the batch it was scored on
};

// Population construction. Networks use the interface convention: input
// neurons 0..n-1 (threshold 0, so each input spike is relayed), output n.
Network random_network(const EonsParams& params, std::size_t n_inputs, Rng& rng);
std::vector<Network> init_population(const EonsParams& params, std::size_t n_inputs, std::uint64_t seed);

/// Index of the tournament winner in `scored`.
std::size_t tournament_select(std::span<const ScoredNetwork> scored, const EonsParams& params, Rng& rng);

/// Node-aligned uniform crossover. Throws std::invalid_argument if the parents
/// have different input/output interfaces.
Network crossover(const Network& a, const Network& b, Rng& rng);

enum class MutationKind { add_node, delete_node, add_edge, delete_edge, node_params, edge_params };

/// Applies params.num_mutations mutation attempts. The result is always valid.
Network mutate(const Network& network, const EonsParams& params, Rng& rng);

/// Applies one mutation of the given kind if it is applicable; returns false
/// (leaving the network untouched) otherwise.
bool apply_mutation(Network& network, MutationKind kind, Rng& rng);

/// Elites, then fresh random networks, then bred children. Each child slot
/// draws from its own stream derived from (generation_seed, slot).
std::vector<Network> next_generation(std::span<const ScoredNetwork> scored, const EonsParams& params,
                                     std::uint64_t generation_seed);

/// Curriculum exponent for an epoch: gamma0 * max(0, 1 - epoch / (ramp * total)).
double snr_gamma(int epoch, int total_epochs, const TrainConfig& cfg);

/// Indices of ceil(batch_fraction * |runs|) runs drawn without replacement,
/// weighted toward high-SNR runs early in training.
std::vector<std::size_t> sample_batch(std::span<const Run> runs, int epoch, int total_epochs, const TrainConfig& cfg,
                                      Rng& rng);

/// Scores networks on a fixed set of pre-encoded runs at theta 0, no window.
class FitnessEvaluator {
public:
    FitnessEvaluator(std::vector<const EncodedRun*> runs, std::vector<const Run*> sources, int tau,
                     FitnessKind fitness, ScoringMode mode);

    /// Convenience: encodes `runs` itself.
    FitnessEvaluator(std::span<const Run> runs, const EncoderSpec& spec, FitnessKind fitness, ScoringMode mode);

    ScoredNetwork score(const Network& network) const;
    std::vector<ScoredNetwork> score_all(std::span<const Network> networks, unsigned jobs) const;

private:
    std::vector<EncodedRun> owned_;
    std::vector<const EncodedRun*> runs_;
    std::vector<const Run*> sources_;
    int tau_;
    FitnessKind fitness_;
    ScoringMode mode_;
};

struct EpochRecord {
    int epoch = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    std::size_t best_neurons = 0;
    std::size_t best_synapses = 0;
};

struct TrainResult {
    std::vector<ScoredNetwork> population;
    ScoredNetwork best;
    std::vector<EpochRecord> history;
};

/// Called after each epoch is scored; return false to stop training early.
using EpochCallback = std::function<bool(const EpochRecord&, std::span<const ScoredNetwork>)>;

TrainResult train(const Dataset& data, const EncoderSpec& spec, const EonsParams& params, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace snnts
