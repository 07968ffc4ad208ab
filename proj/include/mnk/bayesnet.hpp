#pragma once

#include "mnk/landscape.hpp"
#include "mnk/rng.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mnk {

// Observations of the N binary decision variables; every row has length n_vars.
struct Dataset {
    int n_vars = 0;
    std::vector<Solution> rows;

    std::size_t size() const noexcept { return rows.size(); }
    void push_back(const Solution& x);
};

struct BNStructure {
    int n_vars = 0;
    std::vector<std::vector<int>> parents; // sorted ascending per variable
    std::vector<int> ordering;             // variable ordering used while learning

    static BNStructure empty(int n_vars);

    friend bool operator==(const BNStructure&, const BNStructure&) = default;
};

// Throws InvalidParameter unless the parent lists are in range, sorted, duplicate-free and acyclic.
void validate(const BNStructure& structure, int max_parents = -1);

// Parents before children; follows `ordering` when it is consistent with the arcs.
std::vector<int> topological_order(const BNStructure& structure);

// theta[v][j] = {P(x_v = 0 | pa = j), P(x_v = 1 | pa = j)}. Parent configuration j packs the
// parent values in the (sorted) parent-list order, first parent as the most significant bit.
struct CPTs {
    std::vector<std::vector<std::array<double, 2>>> theta;
};

struct BayesianNetwork {
    BNStructure structure;
    CPTs cpts;
};

std::size_t parent_configuration(std::span<const int> parents, const Solution& x);

CPTs uniform_cpts(const BNStructure& structure);

// Bayesian estimate with a uniform prior: theta_vjk = (1 + N_vjk) / (2 + N_vj).
CPTs fit_parameters(const BNStructure& structure, const Dataset& data);

// Log Cooper-Herskovits (K2) marginal likelihood of one family, uniform Dirichlet priors:
// sum_j [ log (r-1)! - log (N_j + r - 1)! + sum_k log N_jk! ], r = 2.
double k2_family_score(const Dataset& data, int var, std::span<const int> parents);

// Greedy K2: each variable, in ordering, repeatedly takes the predecessor that raises its family
// score the most (ties to the lowest index) until nothing improves or max_parents is reached.
BNStructure k2_learn(const Dataset& data, std::span<const int> ordering, int max_parents);

double log_joint_pmf(const BNStructure& structure, const CPTs& cpts, const Solution& x);
double joint_pmf(const BNStructure& structure, const CPTs& cpts, const Solution& x);

// Probabilistic logic (ancestral) sampling.
Dataset sample(const BNStructure& structure, const CPTs& cpts, std::size_t count, Rng& rng);
Dataset sample(const BNStructure& structure, const CPTs& cpts, std::size_t count, std::uint64_t seed);

// {"n_vars", "ordering", "parents": [[...]], "cpts": [[[p0, p1], ...], ...]}
std::string network_to_json(const BayesianNetwork& network);
BayesianNetwork network_from_json(std::string_view text);

} // namespace mnk
