#include "mnk/enumeration.hpp"

#include "mnk/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>

namespace mnk {

using nlohmann::json;

ObjectiveMatrix objective_matrix(std::span<const Individual> pop) {
    if (pop.empty()) return {};
    ObjectiveMatrix out(static_cast<Eigen::Index>(pop.size()), pop.front().z.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (pop[i].z.size() != out.cols()) throw LengthMismatch("population members have different objective counts");
        out.row(static_cast<Eigen::Index>(i)) = pop[i].z.transpose();
    }
    return out;
}

ObjectiveMatrix objective_matrix(std::span<const ObjectiveVector> points) {
    if (points.empty()) return {};
    ObjectiveMatrix out(static_cast<Eigen::Index>(points.size()), points.front().size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != out.cols()) throw LengthMismatch("objective vectors have different lengths");
        out.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
    }
    return out;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.size() != b.size()) throw LengthMismatch("dominates: objective vectors of different length");
    return dominates_row(a, b);
}

ParetoSet enumerate_pareto(const MNKInstance& instance, int cap, int threads) {
    const int n = instance.n_vars();
    if (n > cap) throw CapExceeded("N = " + std::to_string(n) + " exceeds the enumeration cap " + std::to_string(cap));
    const int m = instance.m_objectives;
    const std::uint64_t space = std::uint64_t{1} << n;

    std::vector<double> values(static_cast<std::size_t>(space) * static_cast<std::size_t>(m));
    auto fill = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t v = begin; v < end; ++v)
            evaluate_into(instance, Solution(n, v), values.data() + v * static_cast<std::uint64_t>(m));
    };
    threads = std::max(1, threads);
    if (threads == 1 || space < 4096) {
        fill(0, space);
    } else {
        std::vector<std::jthread> workers;
        const std::uint64_t chunk = (space + static_cast<std::uint64_t>(threads) - 1) / static_cast<std::uint64_t>(threads);
        for (std::uint64_t b = 0; b < space; b += chunk) workers.emplace_back(fill, b, std::min(space, b + chunk));
    }

    auto row = [&](std::uint64_t v) { return values.data() + v * static_cast<std::uint64_t>(m); };

    // A dominator is lexicographically greater, so after a descending lexicographic sort a point
    // can only be dominated by points before it, and only front members need to be checked.
    std::vector<std::uint64_t> order(static_cast<std::size_t>(space));
    std::iota(order.begin(), order.end(), std::uint64_t{0});
    std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
        const double* za = row(a);
        const double* zb = row(b);
        for (int i = 0; i < m; ++i)
            if (za[i] != zb[i]) return za[i] > zb[i];
        return a < b;
    });

    std::vector<std::uint64_t> front;
    for (std::uint64_t v : order) {
        const double* z = row(v);
        bool dominated = false;
        for (auto it = front.rbegin(); it != front.rend(); ++it) {
            const double* f = row(*it);
            bool ge = true, gt = false;
            for (int i = 0; i < m && ge; ++i) {
                if (f[i] < z[i]) ge = false;
                else if (f[i] > z[i]) gt = true;
            }
            if (ge && gt) {
                dominated = true;
                break;
            }
        }
        if (!dominated) front.push_back(v);
    }
    std::sort(front.begin(), front.end());

    ParetoSet out;
    out.instance_id = instance.id;
    out.solutions.reserve(front.size());
    out.objectives.reserve(front.size());
    for (std::uint64_t v : front) {
        out.solutions.emplace_back(n, v);
        out.objectives.emplace_back(Eigen::Map<const ObjectiveVector>(row(v), m));
    }
    return out;
}

std::vector<std::vector<std::size_t>> nondominated_fronts(const ObjectiveMatrix& objs) {
    const auto n = static_cast<std::size_t>(objs.rows());
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> counter(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto a = objs.row(static_cast<Eigen::Index>(i));
            const auto b = objs.row(static_cast<Eigen::Index>(j));
            if (dominates_row(a, b)) {
                dominated_by[i].push_back(j);
                ++counter[j];
            } else if (dominates_row(b, a)) {
                dominated_by[j].push_back(i);
                ++counter[i];
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (counter[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominated_by[i])
                if (--counter[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distances(const ObjectiveMatrix& objs, std::span<const std::size_t> front) {
    const std::size_t size = front.size();
    std::vector<double> dist(size, 0.0);
    if (size <= 2) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        return dist;
    }
    std::vector<std::size_t> order(size);
    for (Eigen::Index m = 0; m < objs.cols(); ++m) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto value = [&](std::size_t pos) { return objs(static_cast<Eigen::Index>(front[pos]), m); };
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
        const double lo = value(order.front());
        const double hi = value(order.back());
        const double range = hi - lo;
        if (range <= 0.0) continue;
        dist[order.front()] = std::numeric_limits<double>::infinity();
        dist[order.back()] = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i + 1 < size; ++i)
            dist[order[i]] += (value(order[i + 1]) - value(order[i - 1])) / range;
    }
    return dist;
}

RankedPopulation nondominated_sort(Population pop) {
    if (pop.empty()) throw InvalidParameter("nondominated_sort: empty population");
    const ObjectiveMatrix objs = objective_matrix(pop);
    RankedPopulation out;
    out.fronts = nondominated_fronts(objs);
    out.rank.assign(pop.size(), 0);
    out.crowding.assign(pop.size(), 0.0);
    for (std::size_t f = 0; f < out.fronts.size(); ++f) {
        const auto& front = out.fronts[f];
        const auto cd = crowding_distances(objs, front);
        for (std::size_t i = 0; i < front.size(); ++i) {
            out.rank[front[i]] = static_cast<int>(f) + 1;
            out.crowding[front[i]] = cd[i];
        }
    }
    out.members = std::move(pop);
    return out;
}

std::vector<std::size_t> nondominated_indices(const ObjectiveMatrix& objs) {
    std::vector<std::size_t> out;
    for (Eigen::Index i = 0; i < objs.rows(); ++i) {
        bool dominated = false;
        for (Eigen::Index j = 0; j < objs.rows() && !dominated; ++j)
            dominated = j != i && dominates_row(objs.row(j), objs.row(i));
        if (!dominated) out.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

EpsilonCoverage::EpsilonCoverage(const ParetoSet& exact, double epsilon)
    : front_(objective_matrix(exact.objectives)), factor_(1.0 + epsilon) {
    if (!(epsilon >= 0.0)) throw InvalidParameter("epsilon must be non-negative");
    clear();
}

void EpsilonCoverage::clear() {
    covered_.assign(static_cast<std::size_t>(front_.rows()), 0);
    uncovered_ = covered_.size();
}

void EpsilonCoverage::add(const double* z) {
    for (Eigen::Index i = 0; i < front_.rows(); ++i) {
        auto& flag = covered_[static_cast<std::size_t>(i)];
        if (flag) continue;
        bool ok = true;
        for (Eigen::Index m = 0; m < front_.cols() && ok; ++m) ok = front_(i, m) <= factor_ * z[m];
        if (ok) {
            flag = 1;
            --uncovered_;
        }
    }
}

bool epsilon_success(std::span<const ObjectiveVector> candidate, const ParetoSet& exact, double epsilon) {
    EpsilonCoverage coverage(exact, epsilon);
    const int m = exact.n_objectives();
    for (const auto& c : candidate) {
        if (m != 0 && c.size() != m) throw LengthMismatch("epsilon_success: candidate and front dimensions differ");
        coverage.add(c);
        if (coverage.complete()) return true;
    }
    return coverage.complete();
}

std::string pareto_to_csv(const ParetoSet& pareto) {
    std::string out = "bitstring";
    for (int m = 0; m < pareto.n_objectives(); ++m) out += ",z" + std::to_string(m + 1);
    out += '\n';
    char buf[64];
    for (std::size_t i = 0; i < pareto.size(); ++i) {
        out += pareto.solutions[i].to_string();
        for (double v : pareto.objectives[i]) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::string pareto_to_json(const ParetoSet& pareto) {
    json j;
    j["instance_id"] = pareto.instance_id;
    j["npo"] = pareto.size();
    json sols = json::array();
    json objs = json::array();
    for (std::size_t i = 0; i < pareto.size(); ++i) {
        sols.push_back(pareto.solutions[i].to_string());
        objs.push_back(std::vector<double>(pareto.objectives[i].begin(), pareto.objectives[i].end()));
    }
    j["solutions"] = std::move(sols);
    j["objectives"] = std::move(objs);
    return j.dump() + "\n";
}

ParetoSet pareto_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        ParetoSet out;
        out.instance_id = j.at("instance_id").get<std::string>();
        const auto& sols = j.at("solutions");
        const auto& objs = j.at("objectives");
        if (sols.size() != objs.size()) throw MalformedFile("pareto file: solutions and objectives differ in length");
        for (std::size_t i = 0; i < sols.size(); ++i) {
            out.solutions.push_back(Solution::from_string(sols[i].get<std::string>()));
            auto v = objs[i].get<std::vector<double>>();
            out.objectives.emplace_back(Eigen::Map<const ObjectiveVector>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
        return out;
    } catch (const json::exception& e) {
        throw MalformedFile(std::string("pareto file: ") + e.what());
    } catch (const InvalidParameter& e) {
        throw MalformedFile(std::string("pareto file: ") + e.what());
    }
}

} // namespace mnk
