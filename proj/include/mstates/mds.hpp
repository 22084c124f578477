#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mstates/correlation.hpp"

namespace mstates {

enum class DistanceMetric {
    l1_mean,  // mean absolute difference of packed upper triangles
    l2,       // Euclidean norm of the difference
};

std::string to_string(DistanceMetric metric);
DistanceMetric parse_distance_metric(const std::string& text);

struct DistanceMatrix {
    std::size_t n = 0;
    Eigen::MatrixXd values;  // symmetric, zero diagonal
    DistanceMetric metric = DistanceMetric::l1_mean;
};

/// Distances between the rows of `features`, computed in parallel row blocks.
DistanceMatrix pairwise_distances(const FeatureMatrix& features, DistanceMetric metric);
DistanceMatrix pairwise_distances(const EpochStack& stack, DistanceMetric metric);
/// Throws DataError when the matrices differ in size or fewer than two are given.
DistanceMatrix pairwise_distances(const std::vector<EpochCorrelation>& matrices, DistanceMetric metric);

struct Embedding {
    Eigen::MatrixXd coords;            // n x dims, column means zero
    Eigen::VectorXd eigenvalues_used;  // descending, clamped at 0
    Eigen::VectorXd raw_eigenvalues;   // before clamping
    double stress = 0.0;
    bool clamped = false;    // some kept eigenvalue was negative
    bool all_zero = false;   // every input distance was zero
    bool converged = true;
};
using Embedding3D = Embedding;

/// Classical (Torgerson) scaling: double-center -D^2/2, keep the top `dims`
/// eigenpairs, coords = vectors * sqrt(values). Each axis is signed so its
/// largest-magnitude coordinate is positive. Requires n > dims.
Embedding classical_mds(const DistanceMatrix& d, int dims = 3);

/// Kruskal stress-1 of `coords` against `d`.
double embedding_stress(const DistanceMatrix& d, const Eigen::MatrixXd& coords);

}  // namespace mstates
