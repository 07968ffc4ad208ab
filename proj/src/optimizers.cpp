#include "mnk/optimizers.hpp"

#include "mnk/error.hpp"

#include <Eigen/LU>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mnk {

using nlohmann::json;

void validate(const RunParams& p) {
    if (p.pop_size < 1) throw InvalidParameter("pop_size must be positive");
    if (p.pgm_size < 1 || p.pgm_size > p.pop_size) throw InvalidParameter("pgm_size must lie in [1, pop_size]");
    if (p.sample_size < 1) throw InvalidParameter("sample_size must be positive");
    if (p.t_max < p.pop_size) throw InvalidParameter("t_max must be at least pop_size");
    if (!(p.epsilon >= 0.0)) throw InvalidParameter("epsilon must be non-negative");
    if (p.max_parents < 0) throw InvalidParameter("max_parents must be non-negative");
}

std::vector<std::size_t> tournament_indices(const RankedPopulation& ranked, std::size_t count, Rng& rng) {
    const std::size_t n = ranked.members.size();
    if (n == 0) throw InvalidParameter("binary_tournament: empty population");
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        const auto a = static_cast<std::size_t>(rng.below(n));
        const auto b = static_cast<std::size_t>(rng.below(n));
        std::size_t winner;
        if (ranked.rank[a] != ranked.rank[b]) winner = ranked.rank[a] < ranked.rank[b] ? a : b;
        else if (ranked.crowding[a] != ranked.crowding[b]) winner = ranked.crowding[a] > ranked.crowding[b] ? a : b;
        else winner = rng.coin() ? a : b;
        out.push_back(winner);
    }
    return out;
}

std::vector<Solution> binary_tournament(const RankedPopulation& ranked, std::size_t count, Rng& rng) {
    std::vector<Solution> out;
    for (std::size_t i : tournament_indices(ranked, count, rng)) out.push_back(ranked.members[i].x);
    return out;
}

Population truncate_by_rank(const RankedPopulation& ranked, std::size_t count) {
    std::vector<std::size_t> order(ranked.members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ranked.rank[a] != ranked.rank[b]) return ranked.rank[a] < ranked.rank[b];
        return ranked.crowding[a] > ranked.crowding[b];
    });
    order.resize(std::min(count, order.size()));
    Population out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(ranked.members[i]);
    return out;
}

namespace {

// Counts evaluations and tracks epsilon-coverage of the exact front by the current population
// plus everything evaluated in the running batch.
class EvaluationLedger {
public:
    EvaluationLedger(const MNKInstance& instance, const ParetoSet& exact, const RunParams& params)
        : instance_(instance), params_(params), coverage_(exact, params.epsilon) {}

    std::int64_t evaluations() const noexcept { return evaluations_; }
    bool succeeded() const noexcept { return success_at_ >= 0; }
    std::int64_t success_at() const noexcept { return success_at_; }
    std::int64_t remaining() const noexcept { return params_.t_max - evaluations_; }

    bool finished() const noexcept {
        return (succeeded() && params_.stop_on_success) || evaluations_ >= params_.t_max;
    }

    void begin_batch(const Population& population) {
        coverage_.clear();
        for (const auto& ind : population) coverage_.add(ind.z);
    }

    Individual evaluate(const Solution& x) {
        Individual ind{x, mnk::evaluate(instance_, x)};
        ++evaluations_;
        coverage_.add(ind.z);
        if (params_.cadence == SuccessCadence::per_evaluation) check();
        return ind;
    }

    void end_batch() {
        if (params_.cadence == SuccessCadence::per_batch) check();
    }

    // In per-evaluation mode a batch stops as soon as success is reached.
    bool stop_batch() const noexcept {
        return params_.cadence == SuccessCadence::per_evaluation && succeeded() && params_.stop_on_success;
    }

private:
    void check() {
        if (!succeeded() && coverage_.complete()) success_at_ = evaluations_;
    }

    const MNKInstance& instance_;
    const RunParams& params_;
    EpsilonCoverage coverage_;
    std::int64_t evaluations_ = 0;
    std::int64_t success_at_ = -1;
};

Solution random_solution(int n, Rng& rng) {
    Solution x(n);
    for (int i = 0; i < n; ++i) x.set(i, rng.coin());
    return x;
}

Population initial_population(int n, EvaluationLedger& ledger, const RunParams& params, Rng& rng) {
    std::vector<Solution> xs;
    for (int i = 0; i < params.pop_size; ++i) xs.push_back(random_solution(n, rng));
    Population pop;
    ledger.begin_batch(pop);
    for (const auto& x : xs) {
        pop.push_back(ledger.evaluate(x));
        if (ledger.stop_batch()) break;
    }
    ledger.end_batch();
    return pop;
}

Population nondominated_members(const Population& pop) {
    Population out;
    if (pop.empty()) return out;
    for (std::size_t i : nondominated_indices(objective_matrix(pop))) out.push_back(pop[i]);
    return out;
}

RunResult finish(const EvaluationLedger& ledger, const RunParams& params, int generations, const Population& pop) {
    RunResult r;
    r.success = ledger.succeeded();
    r.evaluations = r.success ? ledger.success_at() : params.t_max;
    r.generations = generations;
    r.final_nondominated = nondominated_members(pop);
    return r;
}

} // namespace

RunResult mboa_run(const MNKInstance& instance, const ParetoSet& exact, const RunParams& params, const RunObserver& observer) {
    validate(params);
    const int n = instance.n_vars();
    Rng rng(params.seed);
    EvaluationLedger ledger(instance, exact, params);

    Population pop = initial_population(n, ledger, params, rng);
    if (observer) observer({0, ledger.evaluations(), pop});

    int generation = 0;
    bool full_batches = true;
    std::optional<BayesianNetwork> model;
    std::vector<int> ordering(static_cast<std::size_t>(n));

    while (!ledger.finished()) {
        const RankedPopulation ranked = nondominated_sort(pop);
        Dataset selected;
        selected.n_vars = n;
        for (std::size_t i : tournament_indices(ranked, static_cast<std::size_t>(params.pgm_size), rng))
            selected.push_back(ranked.members[i].x);

        std::iota(ordering.begin(), ordering.end(), 0);
        rng.shuffle(ordering.begin(), ordering.end());
        BayesianNetwork net;
        net.structure = k2_learn(selected, ordering, params.max_parents);
        net.cpts = fit_parameters(net.structure, selected);

        const auto batch = static_cast<std::size_t>(std::min<std::int64_t>(params.sample_size, ledger.remaining()));
        if (batch < static_cast<std::size_t>(params.sample_size)) full_batches = false;
        const Dataset offspring = sample(net.structure, net.cpts, batch, rng);
        model = std::move(net);

        Population merged = ranked.members;
        ledger.begin_batch(merged);
        for (const auto& x : offspring.rows) {
            merged.push_back(ledger.evaluate(x));
            if (ledger.stop_batch()) {
                full_batches = false;
                break;
            }
        }
        ledger.end_batch();

        pop = truncate_by_rank(nondominated_sort(std::move(merged)), static_cast<std::size_t>(params.pop_size));
        ++generation;
        if (full_batches && ledger.evaluations() != params.pop_size + std::int64_t{generation} * params.sample_size)
            throw std::logic_error("mboa_run: evaluation count out of step with generations");
        if (observer) observer({generation, ledger.evaluations(), pop});
    }

    RunResult r = finish(ledger, params, generation, pop);
    r.final_model = std::move(model);
    return r;
}

Population nsga3_select(const Population& merged, std::size_t count, const ReferenceSet& refs, Rng& rng) {
    if (merged.size() <= count) return merged;
    const ObjectiveMatrix objs = objective_matrix(merged);
    const auto fronts = nondominated_fronts(objs);

    std::vector<std::size_t> chosen;
    std::size_t last = 0;
    for (; last < fronts.size(); ++last) {
        if (chosen.size() + fronts[last].size() > count) break;
        chosen.insert(chosen.end(), fronts[last].begin(), fronts[last].end());
    }
    if (chosen.size() == count) {
        Population out;
        for (std::size_t i : chosen) out.push_back(merged[i]);
        return out;
    }
    const auto& boundary = fronts[last];

    std::vector<std::size_t> pool = chosen;
    pool.insert(pool.end(), boundary.begin(), boundary.end());
    const auto m = objs.cols();
    const auto rows = static_cast<Eigen::Index>(pool.size());
    Eigen::MatrixXd f(rows, m);
    for (Eigen::Index i = 0; i < rows; ++i) f.row(i) = objs.row(static_cast<Eigen::Index>(pool[static_cast<std::size_t>(i)]));

    // Minimisation view: distance below the ideal (per-objective maximum).
    const Eigen::RowVectorXd ideal = f.colwise().maxCoeff();
    const Eigen::MatrixXd t = (-f).rowwise() + ideal;

    Eigen::MatrixXd extremes(m, m);
    for (Eigen::Index axis = 0; axis < m; ++axis) {
        Eigen::RowVectorXd w = Eigen::RowVectorXd::Constant(m, 1e-6);
        w(axis) = 1.0;
        Eigen::Index best = 0;
        double best_asf = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double asf = (t.row(i).array() / w.array()).maxCoeff();
            if (asf < best_asf) {
                best_asf = asf;
                best = i;
            }
        }
        extremes.row(axis) = t.row(best);
    }
    Eigen::RowVectorXd intercepts(m);
    bool ok = false;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(extremes);
    if (lu.isInvertible()) {
        const Eigen::VectorXd plane = lu.solve(Eigen::VectorXd::Ones(m));
        intercepts = plane.cwiseInverse().transpose();
        ok = intercepts.allFinite() && (intercepts.array() > 1e-10).all();
    }
    if (!ok) intercepts = t.colwise().maxCoeff();
    for (Eigen::Index j = 0; j < m; ++j)
        if (!(intercepts(j) > 1e-10)) intercepts(j) = 1.0;
    const Eigen::MatrixXd normed = t.array().rowwise() / intercepts.array();

    const auto n_refs = static_cast<std::size_t>(refs.rows());
    std::vector<std::size_t> niche_of(pool.size());
    std::vector<double> distance(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const Eigen::RowVectorXd p = normed.row(static_cast<Eigen::Index>(i));
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < n_refs; ++r) {
            const Eigen::RowVectorXd w = refs.row(static_cast<Eigen::Index>(r));
            const double d = (p - (p.dot(w) / w.squaredNorm()) * w).norm();
            if (d < best) {
                best = d;
                niche_of[i] = r;
            }
        }
        distance[i] = best;
    }

    std::vector<std::size_t> niche_count(n_refs, 0);
    for (std::size_t i = 0; i < chosen.size(); ++i) ++niche_count[niche_of[i]];

    std::vector<std::vector<std::size_t>> candidates(n_refs); // positions into pool
    for (std::size_t i = chosen.size(); i < pool.size(); ++i) candidates[niche_of[i]].push_back(i);

    std::vector<char> active(n_refs, 1);
    std::vector<std::size_t> picked;
    const std::size_t needed = count - chosen.size();
    while (picked.size() < needed) {
        std::size_t min_count = std::numeric_limits<std::size_t>::max();
        for (std::size_t r = 0; r < n_refs; ++r)
            if (active[r]) min_count = std::min(min_count, niche_count[r]);
        std::vector<std::size_t> least;
        for (std::size_t r = 0; r < n_refs; ++r)
            if (active[r] && niche_count[r] == min_count) least.push_back(r);
        const std::size_t r = least[static_cast<std::size_t>(rng.below(least.size()))];
        auto& cand = candidates[r];
        if (cand.empty()) {
            active[r] = 0;
            continue;
        }
        std::size_t pos;
        if (niche_count[r] == 0) {
            pos = static_cast<std::size_t>(std::min_element(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
                                               return distance[a] < distance[b];
                                           }) - cand.begin());
        } else {
            pos = static_cast<std::size_t>(rng.below(cand.size()));
        }
        picked.push_back(cand[pos]);
        cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(pos));
        ++niche_count[r];
    }

    Population out;
    out.reserve(count);
    for (std::size_t i : chosen) out.push_back(merged[i]);
    for (std::size_t p : picked) out.push_back(merged[pool[p]]);
    return out;
}

RunResult nsga3_run(const MNKInstance& instance, const ParetoSet& exact, const RunParams& params, double pc, double pm,
                    const RunObserver& observer) {
    validate(params);
    if (!(pc >= 0.0 && pc <= 1.0) || !(pm >= 0.0 && pm <= 1.0))
        throw InvalidParameter("crossover and mutation probabilities must lie in [0, 1]");
    const int n = instance.n_vars();
    const auto p_size = static_cast<std::size_t>(params.pop_size);
    const ReferenceSet refs = reference_directions(instance.m_objectives, reference_layers(instance.m_objectives, params.pop_size));
    Rng rng(params.seed);
    EvaluationLedger ledger(instance, exact, params);

    Population pop = initial_population(n, ledger, params, rng);
    if (observer) observer({0, ledger.evaluations(), pop});

    int generation = 0;
    while (!ledger.finished()) {
        const RankedPopulation ranked = nondominated_sort(pop);
        const auto mates = tournament_indices(ranked, p_size + (p_size % 2), rng);
        std::vector<Solution> children;
        children.reserve(mates.size());
        for (std::size_t i = 0; i + 1 < mates.size(); i += 2) {
            Solution a = ranked.members[mates[i]].x;
            Solution b = ranked.members[mates[i + 1]].x;
            if (rng.bernoulli(pc)) {
                for (int v = 0; v < n; ++v) {
                    if (rng.coin()) {
                        const bool tmp = a[v];
                        a.set(v, b[v]);
                        b.set(v, tmp);
                    }
                }
            }
            for (Solution* child : {&a, &b})
                for (int v = 0; v < n; ++v)
                    if (rng.bernoulli(pm)) child->flip(v);
            children.push_back(a);
            children.push_back(b);
        }
        children.resize(std::min<std::size_t>(p_size, static_cast<std::size_t>(ledger.remaining())));

        Population merged = ranked.members;
        ledger.begin_batch(merged);
        for (const auto& x : children) {
            merged.push_back(ledger.evaluate(x));
            if (ledger.stop_batch()) break;
        }
        ledger.end_batch();

        pop = nsga3_select(merged, p_size, refs, rng);
        ++generation;
        if (observer) observer({generation, ledger.evaluations(), pop});
    }
    return finish(ledger, params, generation, pop);
}

std::string run_record_to_json(const std::string& instance_id, const std::string& algorithm, int run_index,
                               const RunResult& result) {
    json j;
    j["instance_id"] = instance_id;
    j["algorithm"] = algorithm;
    j["run_index"] = run_index;
    j["success"] = result.success;
    j["evaluations"] = result.evaluations;
    j["generations"] = result.generations;
    return j.dump() + "\n";
}

RunRecord run_record_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        RunRecord r;
        r.instance_id = j.at("instance_id").get<std::string>();
        r.algorithm = j.at("algorithm").get<std::string>();
        r.run_index = j.at("run_index").get<int>();
        r.success = j.at("success").get<bool>();
        r.evaluations = j.at("evaluations").get<std::int64_t>();
        r.generations = j.at("generations").get<int>();
        return r;
    } catch (const json::exception& e) {
        throw MalformedFile(std::string("run record: ") + e.what());
    }
}

} // namespace mnk
