#pragma once

#include <Eigen/Core>

#include <vector>

namespace mnk {

// Rows are reference directions on the unit simplex.
using ReferenceSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// All points with coordinates i/divisions, i integer, summing to one.
ReferenceSet das_dennis(int n_objectives, int divisions);

struct ReferenceLayers {
    int outer = 0;
    int inner = 0; // 0 when a single layer is used
};

// Divisions used for NSGA-III runs: the published settings for M = 3, 5, 8, 10 and 15
// (12; 6; 3+2; 3+2; 2+1), otherwise the largest single layer with at most pop_size points.
ReferenceLayers reference_layers(int n_objectives, int pop_size);

// Outer layer plus, when requested, an inner layer shrunk halfway toward the simplex centroid.
ReferenceSet reference_directions(int n_objectives, const ReferenceLayers& layers);

} // namespace mnk
