#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace mstates {

struct TopEigenOptions {
    double tolerance = 1e-10;  // residual bound relative to the largest Ritz magnitude
    int max_iterations = 10'000;  // matrix-vector products
    int max_basis = 300;
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
    bool deflate_constant = false;  // work in the complement of the all-ones vector
};

struct TopEigen {
    Eigen::VectorXd values;   // descending (algebraic)
    Eigen::MatrixXd vectors;  // columns are unit eigenvectors
    int iterations = 0;
    bool converged = false;
};

/// Largest `k` algebraic eigenpairs of a dense symmetric matrix by Lanczos
/// with full reorthogonalization and explicit restarts.
TopEigen top_eigenpairs(const Eigen::MatrixXd& a, int k, const TopEigenOptions& options = {});

}  // namespace mstates
