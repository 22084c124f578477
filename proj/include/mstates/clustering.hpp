#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mstates/correlation.hpp"

namespace mstates {

enum class ClusterMetric {
    euclidean,  // Lloyd: squared Euclidean assignment, mean centroids
    l1,         // k-medians: L1 assignment, coordinate-wise median centroids
};

struct KMeansOptions {
    int k = 5;
    std::uint64_t seed = 0;
    int restarts = 100;
    int max_iterations = 500;
    ClusterMetric metric = ClusterMetric::euclidean;
};

/// Result of a single seeded run, before states are renumbered.
struct LloydRun {
    std::vector<int> labels;  // 0-based
    FeatureMatrix centroids;
    double inertia = 0.0;
    int iterations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    std::vector<double> inertia_trace;  // inertia after each centroid update
};

struct StateSequence {
    int k = 0;
    std::vector<int> labels;  // 1..k, ordered by ascending average correlation
    FeatureMatrix centroids;  // row s-1 is the centroid of state s
    std::vector<double> state_avg_corr;
    double inertia = 0.0;
    std::uint64_t seed = 0;       // base seed
    std::uint64_t best_seed = 0;  // seed of the winning restart
    int iterations = 0;
    ClusterMetric metric = ClusterMetric::euclidean;
    std::vector<Date> epoch_dates;  // window end dates
};

/// One k-means++ initialization plus Lloyd iterations. Ties in the nearest
/// centroid go to the lowest index; an empty cluster is reseeded with the
/// point farthest from its own centroid.
LloydRun lloyd_run(const FeatureMatrix& features, int k, std::uint64_t seed, int max_iterations,
                   ClusterMetric metric);

/// Best of `restarts` runs (seeds seed, seed+1, ...) by inertia, ties to the
/// lowest seed, then states renumbered by ascending mean of their members'
/// average correlation. `row_avg_corr[e]` is the average correlation of
/// epoch e.
StateSequence kmeans_states(const FeatureMatrix& features, const std::vector<double>& row_avg_corr,
                            const std::vector<Date>& epoch_dates, const KMeansOptions& options);

StateSequence kmeans_states(const EpochStack& stack, const KMeansOptions& options);

StateSequence kmeans_states(const std::vector<EpochCorrelation>& matrices, int k, std::uint64_t seed, int restarts);

/// Average correlation of every packed row (mean of its entries).
std::vector<double> row_average_correlations(const FeatureMatrix& features);

struct LabelRun {
    std::size_t first = 0;  // epoch index, inclusive
    std::size_t last = 0;   // inclusive
};

/// Maximal runs of consecutive epochs carrying `state`.
std::vector<LabelRun> label_runs(const std::vector<int>& labels, int state);

struct StateSummary {
    int state = 0;
    std::size_t count = 0;
    double avg_corr = 0.0;
    std::optional<Date> first_date;
    std::optional<Date> last_date;
    std::vector<LabelRun> runs;
};

std::vector<StateSummary> state_report(const StateSequence& seq, const std::vector<double>& row_avg_corr);
std::vector<StateSummary> state_report(const StateSequence& seq, const EpochStack& stack);

}  // namespace mstates
