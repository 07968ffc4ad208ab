#include "mnk/bayesnet.hpp"

#include "mnk/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mnk {

using nlohmann::json;

void Dataset::push_back(const Solution& x) {
    if (x.size() != n_vars) throw LengthMismatch("dataset row length differs from n_vars");
    rows.push_back(x);
}

BNStructure BNStructure::empty(int n_vars) {
    BNStructure s;
    s.n_vars = n_vars;
    s.parents.assign(static_cast<std::size_t>(n_vars), {});
    s.ordering.resize(static_cast<std::size_t>(n_vars));
    for (int i = 0; i < n_vars; ++i) s.ordering[static_cast<std::size_t>(i)] = i;
    return s;
}

namespace {

void check_ordering(std::span<const int> ordering, int n_vars) {
    if (ordering.size() != static_cast<std::size_t>(n_vars))
        throw InvalidParameter("ordering must list every variable exactly once");
    std::vector<char> seen(static_cast<std::size_t>(n_vars), 0);
    for (int v : ordering) {
        if (v < 0 || v >= n_vars || seen[static_cast<std::size_t>(v)])
            throw InvalidParameter("ordering is not a permutation of the variables");
        seen[static_cast<std::size_t>(v)] = 1;
    }
}

} // namespace

std::vector<int> topological_order(const BNStructure& s) {
    const auto n = static_cast<std::size_t>(s.n_vars);
    if (s.parents.size() != n) throw InvalidParameter("structure: one parent list per variable required");
    std::vector<int> queue_order = s.ordering;
    if (queue_order.size() != n) {
        queue_order.resize(n);
        for (std::size_t i = 0; i < n; ++i) queue_order[i] = static_cast<int>(i);
    }
    std::vector<char> placed(n, 0);
    std::vector<int> out;
    out.reserve(n);
    // Repeatedly take the first variable in `ordering` whose parents are all placed.
    while (out.size() < n) {
        bool progress = false;
        for (int v : queue_order) {
            if (placed[static_cast<std::size_t>(v)]) continue;
            const auto& pa = s.parents[static_cast<std::size_t>(v)];
            if (std::all_of(pa.begin(), pa.end(), [&](int p) { return placed[static_cast<std::size_t>(p)] != 0; })) {
                placed[static_cast<std::size_t>(v)] = 1;
                out.push_back(v);
                progress = true;
            }
        }
        if (!progress) throw InvalidParameter("structure contains a directed cycle");
    }
    return out;
}

void validate(const BNStructure& s, int max_parents) {
    if (s.n_vars < 0 || s.parents.size() != static_cast<std::size_t>(s.n_vars))
        throw InvalidParameter("structure: one parent list per variable required");
    if (!s.ordering.empty()) check_ordering(s.ordering, s.n_vars);
    for (int v = 0; v < s.n_vars; ++v) {
        const auto& pa = s.parents[static_cast<std::size_t>(v)];
        if (max_parents >= 0 && static_cast<int>(pa.size()) > max_parents)
            throw InvalidParameter("variable " + std::to_string(v) + " exceeds max_parents");
        for (std::size_t i = 0; i < pa.size(); ++i) {
            if (pa[i] < 0 || pa[i] >= s.n_vars || pa[i] == v)
                throw InvalidParameter("variable " + std::to_string(v) + " has an invalid parent");
            if (i > 0 && pa[i - 1] >= pa[i])
                throw InvalidParameter("variable " + std::to_string(v) + ": parents must be sorted and distinct");
        }
    }
    (void)topological_order(s);
}

std::size_t parent_configuration(std::span<const int> parents, const Solution& x) {
    std::size_t j = 0;
    for (int p : parents) j = (j << 1) | (x[p] ? 1U : 0U);
    return j;
}

CPTs uniform_cpts(const BNStructure& s) {
    CPTs c;
    c.theta.resize(static_cast<std::size_t>(s.n_vars));
    for (std::size_t v = 0; v < c.theta.size(); ++v)
        c.theta[v].assign(std::size_t{1} << s.parents[v].size(), {0.5, 0.5});
    return c;
}

CPTs fit_parameters(const BNStructure& s, const Dataset& data) {
    if (data.n_vars != s.n_vars || s.parents.size() != static_cast<std::size_t>(s.n_vars))
        throw LengthMismatch("fit_parameters: structure and data arities differ");
    CPTs c;
    c.theta.resize(static_cast<std::size_t>(s.n_vars));
    std::vector<std::array<std::uint64_t, 2>> counts;
    for (int v = 0; v < s.n_vars; ++v) {
        const auto& pa = s.parents[static_cast<std::size_t>(v)];
        counts.assign(std::size_t{1} << pa.size(), {0, 0});
        for (const auto& row : data.rows) ++counts[parent_configuration(pa, row)][row[v] ? 1 : 0];
        auto& table = c.theta[static_cast<std::size_t>(v)];
        table.resize(counts.size());
        for (std::size_t j = 0; j < counts.size(); ++j) {
            const double total = 2.0 + static_cast<double>(counts[j][0] + counts[j][1]);
            table[j] = {(1.0 + static_cast<double>(counts[j][0])) / total, (1.0 + static_cast<double>(counts[j][1])) / total};
        }
    }
    return c;
}

double k2_family_score(const Dataset& data, int var, std::span<const int> parents) {
    std::vector<std::array<std::uint64_t, 2>> counts(std::size_t{1} << parents.size(), {0, 0});
    for (const auto& row : data.rows) ++counts[parent_configuration(parents, row)][row[var] ? 1 : 0];
    double score = 0.0;
    for (const auto& c : counts) {
        const auto n0 = static_cast<double>(c[0]);
        const auto n1 = static_cast<double>(c[1]);
        // log (r-1)! = log 1! = 0 for r = 2
        score += std::lgamma(n0 + 1.0) + std::lgamma(n1 + 1.0) - std::lgamma(n0 + n1 + 2.0);
    }
    return score;
}

BNStructure k2_learn(const Dataset& data, std::span<const int> ordering, int max_parents) {
    if (max_parents < 0) throw InvalidParameter("max_parents must be non-negative");
    check_ordering(ordering, data.n_vars);
    BNStructure s = BNStructure::empty(data.n_vars);
    s.ordering.assign(ordering.begin(), ordering.end());

    std::vector<int> parents;
    for (std::size_t pos = 0; pos < ordering.size(); ++pos) {
        const int var = ordering[pos];
        parents.clear();
        double current = k2_family_score(data, var, parents);
        while (static_cast<int>(parents.size()) < max_parents) {
            int best_candidate = -1;
            double best_score = current;
            for (std::size_t q = 0; q < pos; ++q) {
                const int cand = ordering[q];
                if (std::find(parents.begin(), parents.end(), cand) != parents.end()) continue;
                std::vector<int> trial = parents;
                trial.insert(std::upper_bound(trial.begin(), trial.end(), cand), cand);
                const double score = k2_family_score(data, var, trial);
                if (score > best_score || (score == best_score && best_candidate >= 0 && cand < best_candidate)) {
                    best_score = score;
                    best_candidate = cand;
                }
            }
            if (best_candidate < 0) break;
            if (!(best_score > current)) throw std::logic_error("k2_learn: accepted step did not raise the score");
            parents.insert(std::upper_bound(parents.begin(), parents.end(), best_candidate), best_candidate);
            current = best_score;
        }
        s.parents[static_cast<std::size_t>(var)] = parents;
    }
    return s;
}

namespace {

void check_arity(const BNStructure& s, const CPTs& c, const Solution& x) {
    if (x.size() != s.n_vars) throw LengthMismatch("solution length differs from network arity");
    if (c.theta.size() != static_cast<std::size_t>(s.n_vars) || s.parents.size() != c.theta.size())
        throw LengthMismatch("CPTs do not match the structure");
}

} // namespace

double log_joint_pmf(const BNStructure& s, const CPTs& c, const Solution& x) {
    check_arity(s, c, x);
    double log_p = 0.0;
    for (int v = 0; v < s.n_vars; ++v) {
        const auto& pa = s.parents[static_cast<std::size_t>(v)];
        const auto& table = c.theta[static_cast<std::size_t>(v)];
        const std::size_t j = parent_configuration(pa, x);
        if (j >= table.size()) throw LengthMismatch("CPT row count does not match the parent set");
        log_p += std::log(table[j][x[v] ? 1 : 0]);
    }
    return log_p;
}

double joint_pmf(const BNStructure& s, const CPTs& c, const Solution& x) { return std::exp(log_joint_pmf(s, c, x)); }

Dataset sample(const BNStructure& s, const CPTs& c, std::size_t count, Rng& rng) {
    if (c.theta.size() != static_cast<std::size_t>(s.n_vars)) throw LengthMismatch("CPTs do not match the structure");
    const auto order = topological_order(s);
    Dataset out;
    out.n_vars = s.n_vars;
    out.rows.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        Solution x(s.n_vars);
        for (int v : order) {
            const auto& pa = s.parents[static_cast<std::size_t>(v)];
            const double p1 = c.theta[static_cast<std::size_t>(v)][parent_configuration(pa, x)][1];
            x.set(v, rng.uniform01() < p1);
        }
        out.rows.push_back(x);
    }
    return out;
}

Dataset sample(const BNStructure& s, const CPTs& c, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    return sample(s, c, count, rng);
}

std::string network_to_json(const BayesianNetwork& net) {
    json j;
    j["n_vars"] = net.structure.n_vars;
    j["ordering"] = net.structure.ordering;
    j["parents"] = net.structure.parents;
    json cpts = json::array();
    for (const auto& table : net.cpts.theta) {
        json rows = json::array();
        for (const auto& row : table) rows.push_back({row[0], row[1]});
        cpts.push_back(std::move(rows));
    }
    j["cpts"] = std::move(cpts);
    return j.dump() + "\n";
}

BayesianNetwork network_from_json(std::string_view text) {
    BayesianNetwork net;
    try {
        const json j = json::parse(text);
        net.structure.n_vars = j.at("n_vars").get<int>();
        net.structure.ordering = j.at("ordering").get<std::vector<int>>();
        net.structure.parents = j.at("parents").get<std::vector<std::vector<int>>>();
        for (const auto& table : j.at("cpts")) {
            std::vector<std::array<double, 2>> rows;
            for (const auto& row : table) rows.push_back(row.get<std::array<double, 2>>());
            net.cpts.theta.push_back(std::move(rows));
        }
    } catch (const json::exception& e) {
        throw MalformedFile(std::string("network file: ") + e.what());
    }
    try {
        validate(net.structure);
    } catch (const InvalidParameter& e) {
        throw MalformedFile(std::string("network file: ") + e.what());
    }
    if (net.cpts.theta.size() != static_cast<std::size_t>(net.structure.n_vars))
        throw MalformedFile("network file: one CPT per variable required");
    for (std::size_t v = 0; v < net.cpts.theta.size(); ++v)
        if (net.cpts.theta[v].size() != (std::size_t{1} << net.structure.parents[v].size()))
            throw MalformedFile("network file: CPT " + std::to_string(v) + " has the wrong number of rows");
    return net;
}

} // namespace mnk
