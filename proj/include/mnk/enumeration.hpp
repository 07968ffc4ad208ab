#pragma once

#include "mnk/landscape.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mnk {

struct Individual {
    Solution x;
    ObjectiveVector z;
};

using Population = std::vector<Individual>;

// Row i holds the objective vector of member i.
using ObjectiveMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ObjectiveMatrix objective_matrix(std::span<const Individual> pop);
ObjectiveMatrix objective_matrix(std::span<const ObjectiveVector> points);

// Pareto dominance for maximisation: a >= b everywhere and a > b somewhere.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

template <typename DerivedA, typename DerivedB>
bool dominates_row(const Eigen::DenseBase<DerivedA>& a, const Eigen::DenseBase<DerivedB>& b) {
    bool strict = false;
    for (Eigen::Index m = 0; m < a.size(); ++m) {
        if (a(m) < b(m)) return false;
        if (a(m) > b(m)) strict = true;
    }
    return strict;
}

// Exact Pareto set of an instance. Members are ordered by bitstring; solutions that share
// a Pareto-optimal objective vector are all kept.
struct ParetoSet {
    std::string instance_id;
    std::vector<Solution> solutions;
    std::vector<ObjectiveVector> objectives;

    std::size_t size() const noexcept { return solutions.size(); }
    int n_objectives() const { return objectives.empty() ? 0 : static_cast<int>(objectives.front().size()); }
};

inline constexpr int default_enumeration_cap = 24;

// Evaluates all 2^N solutions (split over `threads` workers) and keeps the non-dominated ones.
ParetoSet enumerate_pareto(const MNKInstance& instance, int cap = default_enumeration_cap, int threads = 1);

struct RankedPopulation {
    Population members;
    std::vector<int> rank;        // 1 = first front
    std::vector<double> crowding; // +inf at front extremes
    std::vector<std::vector<std::size_t>> fronts;
};

// Fronts as lists of row indices, best first.
std::vector<std::vector<std::size_t>> nondominated_fronts(const ObjectiveMatrix& objs);

// Crowding distance of each member of `front` (same order). Objectives are min-max normalised
// within the front; an objective with zero range contributes nothing.
std::vector<double> crowding_distances(const ObjectiveMatrix& objs, std::span<const std::size_t> front);

RankedPopulation nondominated_sort(Population pop);

// Indices of the members not dominated by any other member.
std::vector<std::size_t> nondominated_indices(const ObjectiveMatrix& objs);

// True when every Pareto-optimal vector p has a candidate c with p <= (1 + epsilon) * c componentwise.
bool epsilon_success(std::span<const ObjectiveVector> candidate, const ParetoSet& exact, double epsilon);

// Incremental form of epsilon_success: points are added one at a time and coverage of the
// exact front is tracked, so success can be detected after any single evaluation.
class EpsilonCoverage {
public:
    EpsilonCoverage(const ParetoSet& exact, double epsilon);

    void clear();
    void add(const double* z);
    void add(const ObjectiveVector& z) { add(z.data()); }
    bool complete() const noexcept { return uncovered_ == 0; }
    std::size_t uncovered() const noexcept { return uncovered_; }

private:
    ObjectiveMatrix front_;
    double factor_;
    std::vector<char> covered_;
    std::size_t uncovered_ = 0;
};

// Columns: bitstring, z1..zM.
std::string pareto_to_csv(const ParetoSet& pareto);
std::string pareto_to_json(const ParetoSet& pareto);
ParetoSet pareto_from_json(std::string_view text);

} // namespace mnk
