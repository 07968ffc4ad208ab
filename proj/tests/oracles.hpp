#pragma once

// Brute-force reference implementations used only by the tests. They deliberately avoid the
// library's algorithms (sorting tricks, sweeps, spanning trees) and follow the definitions directly.

#include "mnk/landscape.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

inline std::vector<double> objectives(const mnk::MNKInstance& inst, std::uint64_t bits) {
    // Direct table lookup, written independently of NKComponent::contribution.
    const int n = inst.n_vars();
    auto bit = [&](int var) { return static_cast<int>((bits >> (n - 1 - var)) & 1U); };
    std::vector<double> z;
    for (const auto& c : inst.components) {
        double sum = 0.0;
        for (int v = 0; v < n; ++v) {
            std::size_t idx = static_cast<std::size_t>(bit(v));
            for (int nb : c.neighbors[static_cast<std::size_t>(v)]) idx = idx * 2 + static_cast<std::size_t>(bit(nb));
            sum += c.tables[static_cast<std::size_t>(v)][idx];
        }
        z.push_back(sum / n);
    }
    return z;
}

// O(4^N M) double loop over the whole space; returns Pareto-optimal bit patterns ascending.
inline std::vector<std::uint64_t> pareto_bits(const mnk::MNKInstance& inst) {
    const std::uint64_t space = std::uint64_t{1} << inst.n_vars();
    std::vector<std::vector<double>> all;
    for (std::uint64_t v = 0; v < space; ++v) all.push_back(objectives(inst, v));
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 0; i < space; ++i) {
        bool dominated = false;
        for (std::uint64_t j = 0; j < space && !dominated; ++j) dominated = dominates(all[j], all[i]);
        if (!dominated) out.push_back(i);
    }
    return out;
}

// Repeatedly peel off the non-dominated layer; returns the 1-based front of each point.
inline std::vector<int> peel_ranks(const std::vector<std::vector<double>>& pts) {
    std::vector<int> rank(pts.size(), 0);
    std::size_t assigned = 0;
    for (int layer = 1; assigned < pts.size(); ++layer) {
        std::vector<std::size_t> current;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (rank[i] != 0) continue;
            bool dominated = false;
            for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
                dominated = rank[j] == 0 && dominates(pts[j], pts[i]);
            if (!dominated) current.push_back(i);
        }
        for (std::size_t i : current) rank[i] = layer;
        assigned += current.size();
    }
    return rank;
}

// Epsilon coverage quantified over every solution of the space, not only the Pareto set.
inline bool full_space_epsilon(const mnk::MNKInstance& inst, const std::vector<std::vector<double>>& candidate, double eps) {
    const std::uint64_t space = std::uint64_t{1} << inst.n_vars();
    for (std::uint64_t v = 0; v < space; ++v) {
        const auto z = objectives(inst, v);
        bool covered = false;
        for (const auto& c : candidate) {
            bool ok = true;
            for (std::size_t m = 0; m < z.size() && ok; ++m) ok = z[m] <= (1.0 + eps) * c[m];
            if (ok) {
                covered = true;
                break;
            }
        }
        if (!covered) return false;
    }
    return true;
}

// 2-D hypervolume by a sweep over x-sorted points, reference at the origin.
inline double sweep_hv_2d(std::vector<std::vector<double>> pts) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[0] > b[0] || (a[0] == b[0] && a[1] > b[1]); });
    double area = 0.0, ymax = 0.0;
    for (const auto& p : pts) {
        if (p[1] > ymax) {
            area += p[0] * (p[1] - ymax);
            ymax = p[1];
        }
    }
    return area;
}

inline int hamming(std::uint64_t a, std::uint64_t b) {
    int d = 0;
    for (std::uint64_t x = a ^ b; x; x >>= 1) d += static_cast<int>(x & 1U);
    return d;
}

struct Components {
    int count;
    std::size_t largest;
};

// Union-find over the distance-<=d graph, rebuilt from scratch for the given d.
inline Components components_at(const std::vector<std::uint64_t>& sols, int d) {
    std::vector<std::size_t> parent(sols.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x];
        return x;
    };
    for (std::size_t i = 0; i < sols.size(); ++i)
        for (std::size_t j = i + 1; j < sols.size(); ++j)
            if (hamming(sols[i], sols[j]) <= d) parent[find(i)] = find(j);
    std::vector<std::size_t> size(sols.size(), 0);
    int count = 0;
    for (std::size_t i = 0; i < sols.size(); ++i) {
        if (find(i) == i) ++count;
        ++size[find(i)];
    }
    return {count, *std::max_element(size.begin(), size.end())};
}

// Smallest d in 1..N with a connected distance-<=d graph (sweep), 0 for a singleton.
inline int kconnec_sweep(const std::vector<std::uint64_t>& sols, int n) {
    if (sols.size() <= 1) return 0;
    for (int d = 1; d <= n; ++d)
        if (components_at(sols, d).count == 1) return d;
    return n;
}

} // namespace oracle
