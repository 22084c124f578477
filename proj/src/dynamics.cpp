#include "mstates/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mstates/error.hpp"

namespace mstates {

namespace {

void check_labels(const std::vector<int>& labels, int k) {
    if (k < 1) throw ConfigError("transition model: k must be >= 1");
    for (int l : labels) {
        if (l < 1 || l > k) throw DataError("label " + std::to_string(l) + " outside 1.." + std::to_string(k));
    }
}

// Row-normalized transition estimate from pairs (t, t + lag). Rows without
// data become identity rows and are reported in `flagged`.
Eigen::MatrixXd lagged_probs(const std::vector<int>& labels, int k, std::size_t lag, Eigen::MatrixXi& counts,
                             std::vector<int>& flagged) {
    counts = Eigen::MatrixXi::Zero(k, k);
    for (std::size_t t = 0; t + lag < labels.size(); ++t) ++counts(labels[t] - 1, labels[t + lag] - 1);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(k, k);
    flagged.clear();
    for (int a = 0; a < k; ++a) {
        const int row = counts.row(a).sum();
        if (row == 0) {
            p(a, a) = 1.0;
            flagged.push_back(a);
            continue;
        }
        for (int b = 0; b < k; ++b) p(a, b) = static_cast<double>(counts(a, b)) / static_cast<double>(row);
    }
    return p;
}

Eigen::VectorXd occupancy(const std::vector<int>& labels, int k) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(k);
    for (int l : labels) f(l - 1) += 1.0;
    return f / static_cast<double>(labels.size());
}

double ck_max_deviation(const Eigen::MatrixXd& one, const Eigen::MatrixXd& two, const std::vector<int>& skip_rows) {
    const Eigen::MatrixXd sq = one * one;
    double worst = 0.0;
    for (Eigen::Index a = 0; a < one.rows(); ++a) {
        if (std::find(skip_rows.begin(), skip_rows.end(), static_cast<int>(a)) != skip_rows.end()) continue;
        worst = std::max(worst, (two.row(a) - sq.row(a)).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace

Eigen::VectorXd equilibrium_distribution(const Eigen::MatrixXd& probs, const Eigen::VectorXd& start, double tolerance,
                                         int max_iterations, bool* converged, int* iterations) {
    // The lazy chain shares the stationary vectors of P but is aperiodic,
    // so the iteration also settles for periodic chains.
    const Eigen::Index k = probs.rows();
    const Eigen::MatrixXd lazy = 0.5 * (probs + Eigen::MatrixXd::Identity(k, k));
    Eigen::RowVectorXd pi = start.transpose() / start.sum();
    bool done = false;
    int it = 0;
    while (it < max_iterations) {
        Eigen::RowVectorXd next = pi * lazy;
        next /= next.sum();
        ++it;
        const double delta = (next - pi).cwiseAbs().maxCoeff();
        pi = next;
        if (delta < tolerance) {
            done = true;
            break;
        }
    }
    if (converged) *converged = done;
    if (iterations) *iterations = it;
    return pi.transpose();
}

TransitionModel transition_matrix(const std::vector<int>& labels, int k) {
    check_labels(labels, k);
    if (labels.size() < 2) throw DataError("transition_matrix: need at least two labels");
    TransitionModel m;
    m.k = k;
    m.probs = lagged_probs(labels, k, 1, m.counts, m.flagged_rows);
    m.empirical_freq = occupancy(labels, k);
    m.equilibrium = equilibrium_distribution(m.probs, m.empirical_freq, 1e-12, 1'000'000, &m.equilibrium_converged,
                                             &m.equilibrium_iterations);
    if (labels.size() >= 3) {
        Eigen::MatrixXi c2;
        std::vector<int> flagged2;
        const Eigen::MatrixXd two = lagged_probs(labels, k, 2, c2, flagged2);
        m.ck_deviation = ck_max_deviation(m.probs, two, flagged2);
    }
    return m;
}

MarkovDiagnostics markovianity_check(const std::vector<int>& labels, int k, const MarkovThresholds& thresholds) {
    check_labels(labels, k);
    if (labels.size() < 3) throw DataError("markovianity_check: need at least three labels for two-step estimates");
    MarkovDiagnostics d;
    Eigen::MatrixXi c1, c2;
    std::vector<int> f1, f2;
    d.one_step = lagged_probs(labels, k, 1, c1, f1);
    d.two_step = lagged_probs(labels, k, 2, c2, f2);
    d.ck_deviation = ck_max_deviation(d.one_step, d.two_step, f2);
    const Eigen::VectorXd freq = occupancy(labels, k);
    const Eigen::VectorXd eq = equilibrium_distribution(d.one_step, freq);
    d.tv_distance = 0.5 * (eq - freq).cwiseAbs().sum();
    d.ck_pass = d.ck_deviation <= thresholds.ck_max;
    d.tv_pass = d.tv_distance <= thresholds.tv_max;
    return d;
}

double nearly_tridiagonal_score(const Eigen::MatrixXd& probs, const Eigen::VectorXd& weights) {
    const Eigen::Index k = probs.rows();
    const Eigen::VectorXd w = weights.size() == 0 ? Eigen::VectorXd::Ones(k) : weights;
    if (w.size() != k) throw DataError("nearly_tridiagonal_score: weight length mismatch");
    double band = 0.0, all = 0.0;
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            const double v = w(a) * probs(a, b);
            all += v;
            if (std::abs(a - b) <= 1) band += v;
        }
    }
    return all > 0.0 ? band / all : 1.0;
}

}  // namespace mstates
