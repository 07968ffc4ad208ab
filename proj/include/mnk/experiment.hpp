#pragma once

#include "mnk/analysis.hpp"
#include "mnk/optimizers.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mnk {

struct ExperimentConfig {
    std::uint64_t master_seed = 1;
    int n_vars = 18;
    std::vector<int> k_values{2, 4, 6, 8, 10};
    std::vector<int> m_values{2, 3, 5, 8};
    int landscapes_per_cell = 30;
    int runs_per_instance = 100;
    double epsilon = 0.1;
    std::optional<std::int64_t> t_max; // floor(2^N / 10) when unset

    int pop_size = 100;
    int pgm_size = 50;
    int sample_size = 1000;
    int max_parents = 3;
    double pc = 0.8;
    double pm = 1.0 / 500.0;

    std::string output_dir = "mnk_experiment";
    int enumeration_cap = default_enumeration_cap;
    SuccessCadence cadence = SuccessCadence::per_batch;
    CensoredPolicy censored = CensoredPolicy::exclude;
    int k_folds = 10;
    std::uint64_t hv_mc_samples = 1'000'000;

    std::int64_t effective_t_max() const;
};

void validate(const ExperimentConfig& config);
ExperimentConfig config_from_json(std::string_view text);
std::string config_to_json(const ExperimentConfig& config);

inline constexpr const char* algorithm_names[] = {"mboa", "nsga3"};

struct GridCell {
    std::string id;
    std::uint64_t seed;
    int m;
    int k;
    int landscape;
};

// Instance grid in report order: M outer, then K, then landscape index.
std::vector<GridCell> instance_grid(const ExperimentConfig& config);

// Seed of one optimizer run; independent of scheduling.
std::uint64_t run_seed(std::uint64_t master, std::string_view instance_id, std::string_view algorithm, int run_index);

// Calls fn(i) for i in [0, count) on `jobs` threads; rethrows the first failure.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

// Output layout below output_dir: instances/, pareto/, runs/<algorithm>/<instance>/, reports/.
class Experiment {
public:
    Experiment(ExperimentConfig config, int jobs = 1);

    const ExperimentConfig& config() const noexcept { return config_; }
    std::filesystem::path root() const { return config_.output_dir; }
    std::filesystem::path instance_path(const std::string& id) const;
    std::filesystem::path pareto_path(const std::string& id) const;
    std::filesystem::path run_path(const std::string& algorithm, const std::string& id, int run) const;
    std::filesystem::path model_path(const std::string& id, int run) const;
    std::filesystem::path reports_dir() const;

    // Each command is idempotent; existing outputs of earlier stages are reused.
    std::size_t gen();
    std::size_t enumerate();
    void features();
    std::size_t run(const std::string& algorithm);
    void ert();
    void regress();
    std::size_t pmf_view();
    void report();
    void all();

    MNKInstance load_or_generate(const GridCell& cell) const;
    ParetoSet load_or_enumerate(const GridCell& cell) const;

private:
    std::vector<FeatureVector> compute_features() const;
    std::vector<ErtRecord> collect_ert(const std::string& algorithm) const;
    bool has_runs(const std::string& algorithm) const;

    ExperimentConfig config_;
    int jobs_;
    std::vector<GridCell> grid_;
};

} // namespace mnk
