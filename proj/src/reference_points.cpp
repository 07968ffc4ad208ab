#include "mnk/reference_points.hpp"

#include "mnk/error.hpp"

namespace mnk {

namespace {

void fill(std::vector<std::vector<int>>& out, std::vector<int>& current, int position, int left) {
    const int m = static_cast<int>(current.size());
    if (position == m - 1) {
        current[static_cast<std::size_t>(position)] = left;
        out.push_back(current);
        return;
    }
    for (int i = 0; i <= left; ++i) {
        current[static_cast<std::size_t>(position)] = i;
        fill(out, current, position + 1, left - i);
    }
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace

ReferenceSet das_dennis(int n_objectives, int divisions) {
    if (n_objectives < 1 || divisions < 1) throw InvalidParameter("das_dennis: need M >= 1 and divisions >= 1");
    std::vector<std::vector<int>> points;
    std::vector<int> current(static_cast<std::size_t>(n_objectives), 0);
    fill(points, current, 0, divisions);
    ReferenceSet out(static_cast<Eigen::Index>(points.size()), n_objectives);
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int m = 0; m < n_objectives; ++m)
            out(static_cast<Eigen::Index>(i), m) = static_cast<double>(points[i][static_cast<std::size_t>(m)]) / divisions;
    return out;
}

ReferenceLayers reference_layers(int n_objectives, int pop_size) {
    switch (n_objectives) {
    case 3: return {12, 0};
    case 5: return {6, 0};
    case 8: return {3, 2};
    case 10: return {3, 2};
    case 15: return {2, 1};
    default: break;
    }
    if (n_objectives <= 1) return {1, 0};
    int h = 1;
    while (binomial(h + 1 + n_objectives - 1, n_objectives - 1) <= pop_size) ++h;
    return {h, 0};
}

ReferenceSet reference_directions(int n_objectives, const ReferenceLayers& layers) {
    ReferenceSet outer = das_dennis(n_objectives, layers.outer);
    if (layers.inner <= 0) return outer;
    ReferenceSet inner = das_dennis(n_objectives, layers.inner);
    inner = (inner.array() * 0.5 + 0.5 / n_objectives).matrix();
    ReferenceSet both(outer.rows() + inner.rows(), n_objectives);
    both << outer, inner;
    return both;
}

} // namespace mnk
