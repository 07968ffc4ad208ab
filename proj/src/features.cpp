#include "mnk/features.hpp"

#include "mnk/error.hpp"
#include "mnk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace mnk {

namespace {

using Points = std::vector<std::vector<double>>;

// Keeps points not weakly dominated by another (exact duplicates collapse to one).
Points filter_nondominated(Points pts, std::size_t dims) {
    std::sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
        for (std::size_t i = 0; i < dims; ++i)
            if (a[i] != b[i]) return a[i] > b[i];
        return false;
    });
    Points kept;
    for (auto& p : pts) {
        bool covered = false;
        for (const auto& q : kept) {
            bool ge = true;
            for (std::size_t i = 0; i < dims && ge; ++i) ge = q[i] >= p[i];
            if (ge) {
                covered = true;
                break;
            }
        }
        if (!covered) kept.push_back(std::move(p));
    }
    return kept;
}

// Points are translated so the reference is the origin; only the first `dims` coordinates count.
double slice_volume(Points pts, std::size_t dims) {
    if (pts.empty()) return 0.0;
    if (dims == 1) {
        double best = 0.0;
        for (const auto& p : pts) best = std::max(best, p[0]);
        return best;
    }
    pts = filter_nondominated(std::move(pts), dims);
    if (dims == 2) {
        // Sorted by x descending after filtering, so y increases strictly along the sweep.
        double area = 0.0, prev_y = 0.0;
        for (const auto& p : pts) {
            area += p[0] * (p[1] - prev_y);
            prev_y = p[1];
        }
        return area;
    }
    const std::size_t last = dims - 1;
    std::stable_sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) { return a[last] > b[last]; });
    double volume = 0.0;
    Points prefix;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        prefix.push_back(pts[i]);
        const double lower = i + 1 < pts.size() ? pts[i + 1][last] : 0.0;
        const double depth = pts[i][last] - lower;
        if (depth > 0.0) volume += depth * slice_volume(prefix, last);
    }
    return volume;
}

Points translate(std::span<const ObjectiveVector> front, const ObjectiveVector& ref) {
    Points pts;
    pts.reserve(front.size());
    for (const auto& p : front) {
        if (p.size() != ref.size()) throw LengthMismatch("hypervolume: point and reference differ in length");
        std::vector<double> t(static_cast<std::size_t>(p.size()));
        for (Eigen::Index m = 0; m < p.size(); ++m) {
            if (p(m) < ref(m)) throw PointBelowReference("hypervolume: point lies below the reference point");
            t[static_cast<std::size_t>(m)] = p(m) - ref(m);
        }
        pts.push_back(std::move(t));
    }
    return pts;
}

} // namespace

double hypervolume_exact(std::span<const ObjectiveVector> front, const ObjectiveVector& ref) {
    return slice_volume(translate(front, ref), static_cast<std::size_t>(ref.size()));
}

HypervolumeResult hypervolume_monte_carlo(std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                                          std::uint64_t samples, std::uint64_t seed) {
    const auto dims = static_cast<std::size_t>(ref.size());
    Points pts = translate(front, ref);
    if (pts.empty() || samples == 0) return {0.0, 0.0, false};
    pts = filter_nondominated(std::move(pts), dims);
    std::vector<double> upper(dims, 0.0);
    for (const auto& p : pts)
        for (std::size_t i = 0; i < dims; ++i) upper[i] = std::max(upper[i], p[i]);
    double box = 1.0;
    for (double u : upper) box *= u;
    if (box == 0.0) return {0.0, 0.0, false};
    // Larger boxes first so most hits are found early.
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        double pa = 1.0, pb = 1.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            pa *= a[i];
            pb *= b[i];
        }
        return pa > pb;
    });
    Rng rng(seed);
    std::vector<double> s(dims);
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < samples; ++t) {
        for (std::size_t i = 0; i < dims; ++i) s[i] = rng.uniform01() * upper[i];
        for (const auto& p : pts) {
            bool inside = true;
            for (std::size_t i = 0; i < dims && inside; ++i) inside = s[i] <= p[i];
            if (inside) {
                ++hits;
                break;
            }
        }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    const double se = box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
    return {box * frac, se, false};
}

HypervolumeResult hypervolume(std::span<const ObjectiveVector> front, const ObjectiveVector& ref,
                              const HypervolumeOptions& options) {
    if (ref.size() <= options.max_exact_objectives) return {hypervolume_exact(front, ref), 0.0, true};
    return hypervolume_monte_carlo(front, ref, options.mc_samples, options.mc_seed);
}

ParetoDistances pareto_distances(const ParetoSet& pareto) {
    const std::size_t n = pareto.size();
    if (n < 2) return {};
    std::uint64_t total = 0;
    int best = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const int d = hamming(pareto.solutions[i], pareto.solutions[j]);
            total += static_cast<std::uint64_t>(d);
            best = std::max(best, d);
        }
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    return {static_cast<double>(total) / pairs, static_cast<double>(best)};
}

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent, size;
    explicit DisjointSets(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
        return true;
    }
};

} // namespace

Connectivity connectivity(const ParetoSet& pareto) {
    const std::size_t n = pareto.size();
    if (n == 0) throw InvalidParameter("connectivity: empty Pareto set");
    if (n == 1) return {1, 1.0, 0};

    DisjointSets sets(n);
    std::size_t components = n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (hamming(pareto.solutions[i], pareto.solutions[j]) <= 1 && sets.unite(i, j)) --components;
    std::size_t largest = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (sets.find(i) == i) largest = std::max(largest, sets.size[i]);

    // The connecting threshold is the bottleneck edge of a minimum spanning tree (Prim, O(n^2)).
    std::vector<int> link(n, std::numeric_limits<int>::max());
    std::vector<char> in_tree(n, 0);
    link[0] = 0;
    int bottleneck = 0;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_tree[i] && (pick == n || link[i] < link[pick])) pick = i;
        in_tree[pick] = 1;
        bottleneck = std::max(bottleneck, link[pick]);
        for (std::size_t i = 0; i < n; ++i)
            if (!in_tree[i]) link[i] = std::min(link[i], hamming(pareto.solutions[pick], pareto.solutions[i]));
    }
    // Duplicated solutions are at distance 0; the threshold is still at least 1.
    return {static_cast<int>(components), static_cast<double>(largest) / static_cast<double>(n), std::max(1, bottleneck)};
}

FeatureVector extract_features(const MNKInstance& instance, const ParetoSet& pareto, const HypervolumeOptions& hv_options) {
    if (pareto.size() == 0) throw InvalidParameter("extract_features: empty Pareto set");
    if (pareto.solutions.front().size() != instance.n_vars())
        throw LengthMismatch("extract_features: Pareto set does not belong to the instance");
    FeatureVector f;
    f.m = instance.m_objectives;
    f.k = instance.k();
    f.npo = static_cast<int>(pareto.size());
    f.hv = hypervolume(pareto.objectives, ObjectiveVector::Zero(instance.m_objectives), hv_options).value;
    const auto d = pareto_distances(pareto);
    f.avgd = d.avgd;
    f.maxd = d.maxd;
    const auto c = connectivity(pareto);
    f.nconnec = c.nconnec;
    f.lconnec = c.lconnec;
    f.kconnec = c.kconnec;
    return f;
}

std::string features_csv_header() { return "instance_id,m,k,npo,hv,avgd,maxd,nconnec,lconnec,kconnec\n"; }

std::string features_csv_row(const std::string& instance_id, const FeatureVector& f) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.17g,%.17g,%.17g,%d,%.17g,%d\n", instance_id.c_str(), f.m, f.k, f.npo, f.hv,
                  f.avgd, f.maxd, f.nconnec, f.lconnec, f.kconnec);
    return buf;
}

} // namespace mnk
