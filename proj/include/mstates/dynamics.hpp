#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace mstates {

struct TransitionModel {
    int k = 0;
    Eigen::MatrixXi counts;       // counts(a, b): epoch pairs labelled a then b (0-based)
    Eigen::MatrixXd probs;        // row-stochastic
    Eigen::VectorXd equilibrium;  // left fixpoint of probs
    Eigen::VectorXd empirical_freq;
    std::vector<int> flagged_rows;  // 0-based states never seen as a source; identity row used
    bool equilibrium_converged = true;
    int equilibrium_iterations = 0;
    std::optional<double> ck_deviation;  // present when at least 3 labels
};

/// `labels` are 1-based state ids in 1..k. Throws DataError if fewer than two
/// labels or a label out of range.
TransitionModel transition_matrix(const std::vector<int>& labels, int k);

/// Left stationary vector of a row-stochastic matrix by power iteration on
/// the lazy chain (P + I) / 2, starting from `start`.
Eigen::VectorXd equilibrium_distribution(const Eigen::MatrixXd& probs, const Eigen::VectorXd& start,
                                         double tolerance = 1e-12, int max_iterations = 1'000'000,
                                         bool* converged = nullptr, int* iterations = nullptr);

struct MarkovThresholds {
    double ck_max = 0.05;
    double tv_max = 0.05;
};

struct MarkovDiagnostics {
    Eigen::MatrixXd one_step;
    Eigen::MatrixXd two_step;  // empirical, from pairs (t, t+2)
    double ck_deviation = 0.0;  // max |two_step - one_step^2| over rows with two-step data
    double tv_distance = 0.0;   // total variation between equilibrium and empirical occupancy
    bool ck_pass = false;
    bool tv_pass = false;
};

/// Two necessary conditions for a first-order chain: Chapman-Kolmogorov
/// consistency and agreement of stationary and empirical occupancy.
/// Throws DataError with fewer than three labels.
MarkovDiagnostics markovianity_check(const std::vector<int>& labels, int k, const MarkovThresholds& thresholds = {});

/// Share of transition mass on the main and first off-diagonals, rows
/// weighted by `weights` (uniform when empty).
double nearly_tridiagonal_score(const Eigen::MatrixXd& probs, const Eigen::VectorXd& weights = {});

}  // namespace mstates
