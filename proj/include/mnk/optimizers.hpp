#pragma once

#include "mnk/bayesnet.hpp"
#include "mnk/enumeration.hpp"
#include "mnk/landscape.hpp"
#include "mnk/reference_points.hpp"
#include "mnk/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mnk {

enum class SuccessCadence {
    per_batch,      // after the initial population and after each generation's batch
    per_evaluation, // after every single evaluation
};

struct RunParams {
    int pop_size = 100;
    int pgm_size = 50;
    int sample_size = 1000;
    std::int64_t t_max = 26214;
    double epsilon = 0.1;
    std::uint64_t seed = 0;
    int max_parents = 3;
    SuccessCadence cadence = SuccessCadence::per_batch;
    // When false the run continues to t_max after success; evaluations still reports the first success.
    bool stop_on_success = true;
};

void validate(const RunParams& params);

struct RunResult {
    bool success = false;
    std::int64_t evaluations = 0; // at first success, t_max otherwise
    int generations = 0;
    Population final_nondominated;
    std::optional<BayesianNetwork> final_model; // mBOA only
};

// Snapshot handed to an observer after initialisation (generation 0) and after each survival step.
struct GenerationView {
    int generation;
    std::int64_t evaluations;
    const Population& population;
};

using RunObserver = std::function<void(const GenerationView&)>;

// Binary tournament with replacement: lower rank wins, then larger crowding, then a coin flip.
std::vector<std::size_t> tournament_indices(const RankedPopulation& ranked, std::size_t count, Rng& rng);
std::vector<Solution> binary_tournament(const RankedPopulation& ranked, std::size_t count, Rng& rng);

// Keeps the best `count` members by (rank, crowding descending, position).
Population truncate_by_rank(const RankedPopulation& ranked, std::size_t count);

// Multi-objective BOA: tournament-selected parents, K2-learned network with Bayesian-estimate
// parameters, P_smp sampled solutions, truncation survival on the merged population. The last
// batch is shortened so evaluations never exceed t_max.
RunResult mboa_run(const MNKInstance& instance, const ParetoSet& exact, const RunParams& params,
                   const RunObserver& observer = {});

// NSGA-III environmental selection of `count` members (maximisation): fronts are added whole
// while they fit, the last one is filled by reference-direction niching.
Population nsga3_select(const Population& merged, std::size_t count, const ReferenceSet& refs, Rng& rng);

// Generational baseline: tournament mating, uniform crossover with probability pc
// (per-bit swap with probability 1/2), bit-flip mutation with probability pm per bit, nsga3_select.
RunResult nsga3_run(const MNKInstance& instance, const ParetoSet& exact, const RunParams& params, double pc = 0.8,
                    double pm = 1.0 / 500.0, const RunObserver& observer = {});

// {instance_id, algorithm, run_index, success, evaluations, generations}
std::string run_record_to_json(const std::string& instance_id, const std::string& algorithm, int run_index,
                               const RunResult& result);

struct RunRecord {
    std::string instance_id;
    std::string algorithm;
    int run_index = 0;
    bool success = false;
    std::int64_t evaluations = 0;
    int generations = 0;
};

RunRecord run_record_from_json(std::string_view text);

} // namespace mnk
