#pragma once

#include "mnk/enumeration.hpp"
#include "mnk/landscape.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace mnk {

struct HypervolumeOptions {
    int max_exact_objectives = 4; // above this, Monte Carlo
    std::uint64_t mc_samples = 1'000'000;
    std::uint64_t mc_seed = 0x5eed;
};

struct HypervolumeResult {
    double value = 0.0;
    double std_error = 0.0; // zero for exact results
    bool exact = true;
};

// Volume of the union of boxes [ref, p] (maximisation). Throws PointBelowReference if
// some point is below ref in any objective.
HypervolumeResult hypervolume(std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                              const HypervolumeOptions& options = {});

// Exact slicing recursion, usable for any M (cost grows quickly with M).
double hypervolume_exact(std::span<const ObjectiveVector> front, const ObjectiveVector& ref);

HypervolumeResult hypervolume_monte_carlo(std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                                          std::uint64_t samples, std::uint64_t seed);

struct ParetoDistances {
    double avgd = 0.0;
    double maxd = 0.0;
};

// Hamming distances over all unordered pairs of Pareto-optimal solutions; (0, 0) for a singleton.
ParetoDistances pareto_distances(const ParetoSet& pareto);

struct Connectivity {
    int nconnec = 0;      // components of the distance-1 graph
    double lconnec = 0.0; // largest component / npo
    int kconnec = 0;      // smallest d making the distance-<=d graph connected; 0 for a singleton
};

Connectivity connectivity(const ParetoSet& pareto);

struct FeatureVector {
    int m = 0;
    int k = 0;
    int npo = 0;
    double hv = 0.0;
    double avgd = 0.0;
    double maxd = 0.0;
    int nconnec = 0;
    double lconnec = 0.0;
    int kconnec = 0;
};

FeatureVector extract_features(const MNKInstance& instance, const ParetoSet& pareto,
                               const HypervolumeOptions& hv_options = {});

std::string features_csv_header();
std::string features_csv_row(const std::string& instance_id, const FeatureVector& f);

} // namespace mnk
