#include "mstates/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mstates/error.hpp"

namespace mstates {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double distance(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b,
                ClusterMetric metric) {
    const Eigen::Index d = a.size();
    double s = 0.0;
    if (metric == ClusterMetric::euclidean) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double t = a(j) - b(j);
            s += t * t;
        }
    } else {
        for (Eigen::Index j = 0; j < d; ++j) s += std::abs(a(j) - b(j));
    }
    return s;
}

FeatureMatrix seed_centroids(const FeatureMatrix& x, int k, std::mt19937_64& rng, ClusterMetric metric) {
    const Eigen::Index n = x.rows();
    FeatureMatrix c(k, x.cols());
    auto first = std::min<Eigen::Index>(static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n)), n - 1);
    c.row(0) = x.row(first);

    std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    for (int m = 1; m < k; ++m) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], distance(x.row(i), c.row(m - 1), metric));
        }
        const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double cum = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                cum += nearest[i];
                if (cum > target && nearest[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = std::min<Eigen::Index>(static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n)), n - 1);
        }
        c.row(m) = x.row(pick);
    }
    return c;
}

struct Assignment {
    std::vector<int> labels;
    std::vector<double> best;     // distance to the chosen centroid
    std::vector<double> current;  // distance to the centroid of the previous label
};

void assign(const FeatureMatrix& x, const FeatureMatrix& c, const std::vector<int>& previous, ClusterMetric metric,
            Assignment& out) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = c.rows();
    out.labels.resize(static_cast<std::size_t>(n));
    out.best.resize(static_cast<std::size_t>(n));
    out.current.resize(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        double best = std::numeric_limits<double>::infinity();
        double current = 0.0;
        for (Eigen::Index s = 0; s < k; ++s) {
            const double d = distance(x.row(i), c.row(s), metric);
            if (d < best) {
                best = d;
                arg = static_cast<int>(s);
            }
            if (previous[i] == s) current = d;
        }
        out.labels[i] = arg;
        out.best[i] = best;
        out.current[i] = current;
    }
}

void repair_empty(const FeatureMatrix& x, int k, Assignment& a) {
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    for (int l : a.labels) ++count[static_cast<std::size_t>(l)];
    for (int s = 0; s < k; ++s) {
        if (count[static_cast<std::size_t>(s)] > 0) continue;
        std::ptrdiff_t far = -1;
        double far_d = -1.0;
        for (std::size_t i = 0; i < a.labels.size(); ++i) {
            if (count[static_cast<std::size_t>(a.labels[i])] < 2) continue;
            if (a.best[i] > far_d) {
                far_d = a.best[i];
                far = static_cast<std::ptrdiff_t>(i);
            }
        }
        if (far < 0) throw NumericError("k-means: cannot repair an empty cluster");
        --count[static_cast<std::size_t>(a.labels[far])];
        a.labels[far] = s;
        a.best[far] = 0.0;
        count[static_cast<std::size_t>(s)] = 1;
    }
    (void)x;
}

void update_centroids(const FeatureMatrix& x, const std::vector<int>& labels, ClusterMetric metric, FeatureMatrix& c) {
    const Eigen::Index k = c.rows();
    const Eigen::Index d = x.cols();
    if (metric == ClusterMetric::euclidean) {
        c.setZero();
        std::vector<double> count(static_cast<std::size_t>(k), 0.0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            c.row(labels[i]) += x.row(static_cast<Eigen::Index>(i));
            count[static_cast<std::size_t>(labels[i])] += 1.0;
        }
        for (Eigen::Index s = 0; s < k; ++s) c.row(s) /= count[static_cast<std::size_t>(s)];
        return;
    }
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(static_cast<Eigen::Index>(i));
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < d; ++j) {
        std::vector<double> col;
        for (Eigen::Index s = 0; s < k; ++s) {
            const auto& mem = members[static_cast<std::size_t>(s)];
            col.resize(mem.size());
            for (std::size_t m = 0; m < mem.size(); ++m) col[m] = x(mem[m], j);
            const auto mid = col.size() / 2;
            std::nth_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(mid), col.end());
            double med = col[mid];
            if (col.size() % 2 == 0) {
                const double lower = *std::max_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(mid));
                med = 0.5 * (lower + med);
            }
            c(s, j) = med;
        }
    }
}

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

LloydRun lloyd_run(const FeatureMatrix& features, int k, std::uint64_t seed, int max_iterations,
                   ClusterMetric metric) {
    const Eigen::Index n = features.rows();
    if (k < 1) throw ConfigError("k-means: k must be >= 1");
    if (n < k) throw DataError("k-means: fewer epochs (" + std::to_string(n) + ") than states (" + std::to_string(k) + ")");

    std::mt19937_64 rng(seed);
    LloydRun run;
    run.seed = seed;
    run.centroids = seed_centroids(features, k, rng, metric);
    run.labels.assign(static_cast<std::size_t>(n), -1);

    Assignment a;
    for (int it = 0; it < max_iterations; ++it) {
        assign(features, run.centroids, run.labels, metric, a);
        if (it > 0) run.inertia_trace.push_back(total(a.current));
        repair_empty(features, k, a);
        run.iterations = it + 1;
        if (a.labels == run.labels) {
            run.converged = true;
            break;
        }
        run.labels = a.labels;
        update_centroids(features, run.labels, metric, run.centroids);
    }
    if (run.converged) {
        run.inertia = run.inertia_trace.empty() ? total(a.best) : run.inertia_trace.back();
    } else {
        assign(features, run.centroids, run.labels, metric, a);
        run.inertia = total(a.current);
        run.inertia_trace.push_back(run.inertia);
    }
    return run;
}

std::vector<double> row_average_correlations(const FeatureMatrix& features) {
    std::vector<double> out(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index e = 0; e < features.rows(); ++e) out[static_cast<std::size_t>(e)] = features.row(e).mean();
    return out;
}

StateSequence kmeans_states(const FeatureMatrix& features, const std::vector<double>& row_avg_corr,
                            const std::vector<Date>& epoch_dates, const KMeansOptions& options) {
    if (options.k < 1) throw ConfigError("k-means: k must be >= 1");
    if (options.restarts < 1) throw ConfigError("k-means: restarts must be >= 1");
    if (features.rows() < options.k) throw DataError("k-means: k exceeds the number of epochs");
    if (row_avg_corr.size() != static_cast<std::size_t>(features.rows()) ||
        epoch_dates.size() != static_cast<std::size_t>(features.rows())) {
        throw DataError("k-means: per-epoch metadata does not match the feature matrix");
    }

    std::optional<LloydRun> best;
    for (int r = 0; r < options.restarts; ++r) {
        auto run = lloyd_run(features, options.k, options.seed + static_cast<std::uint64_t>(r), options.max_iterations,
                             options.metric);
        if (!best || run.inertia < best->inertia) best = std::move(run);
    }

    const auto k = static_cast<std::size_t>(options.k);
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t e = 0; e < best->labels.size(); ++e) {
        sum[static_cast<std::size_t>(best->labels[e])] += row_avg_corr[e];
        ++count[static_cast<std::size_t>(best->labels[e])];
    }
    std::vector<double> avg(k);
    for (std::size_t s = 0; s < k; ++s) avg[s] = sum[s] / static_cast<double>(count[s]);
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return avg[a] < avg[b]; });
    std::vector<int> new_id(k);
    for (std::size_t pos = 0; pos < k; ++pos) new_id[order[pos]] = static_cast<int>(pos) + 1;

    StateSequence seq;
    seq.k = options.k;
    seq.seed = options.seed;
    seq.best_seed = best->seed;
    seq.inertia = best->inertia;
    seq.iterations = best->iterations;
    seq.metric = options.metric;
    seq.epoch_dates = epoch_dates;
    seq.labels.resize(best->labels.size());
    for (std::size_t e = 0; e < best->labels.size(); ++e) seq.labels[e] = new_id[static_cast<std::size_t>(best->labels[e])];
    seq.centroids.resize(best->centroids.rows(), best->centroids.cols());
    seq.state_avg_corr.resize(k);
    for (std::size_t pos = 0; pos < k; ++pos) {
        seq.centroids.row(static_cast<Eigen::Index>(pos)) = best->centroids.row(static_cast<Eigen::Index>(order[pos]));
        seq.state_avg_corr[pos] = avg[order[pos]];
    }
    return seq;
}

StateSequence kmeans_states(const EpochStack& stack, const KMeansOptions& options) {
    return kmeans_states(stack.upper, row_average_correlations(stack.upper), stack.end_dates(), options);
}

StateSequence kmeans_states(const std::vector<EpochCorrelation>& matrices, int k, std::uint64_t seed, int restarts) {
    KMeansOptions opt;
    opt.k = k;
    opt.seed = seed;
    opt.restarts = restarts;
    return kmeans_states(stack_from(matrices), opt);
}

std::vector<LabelRun> label_runs(const std::vector<int>& labels, int state) {
    std::vector<LabelRun> runs;
    for (std::size_t e = 0; e < labels.size(); ++e) {
        if (labels[e] != state) continue;
        if (!runs.empty() && runs.back().last + 1 == e) {
            runs.back().last = e;
        } else {
            runs.push_back({e, e});
        }
    }
    return runs;
}

std::vector<StateSummary> state_report(const StateSequence& seq, const std::vector<double>& row_avg_corr) {
    if (row_avg_corr.size() != seq.labels.size()) throw DataError("state_report: labels and matrices differ in length");
    std::vector<StateSummary> out(static_cast<std::size_t>(seq.k));
    for (int s = 1; s <= seq.k; ++s) {
        auto& row = out[static_cast<std::size_t>(s - 1)];
        row.state = s;
        row.runs = label_runs(seq.labels, s);
        double sum = 0.0;
        for (std::size_t e = 0; e < seq.labels.size(); ++e) {
            if (seq.labels[e] != s) continue;
            ++row.count;
            sum += row_avg_corr[e];
        }
        if (row.count > 0) row.avg_corr = sum / static_cast<double>(row.count);
        if (!row.runs.empty() && !seq.epoch_dates.empty()) {
            row.first_date = seq.epoch_dates[row.runs.front().first];
            row.last_date = seq.epoch_dates[row.runs.back().last];
        }
    }
    return out;
}

std::vector<StateSummary> state_report(const StateSequence& seq, const EpochStack& stack) {
    return state_report(seq, row_average_correlations(stack.upper));
}

}  // namespace mstates
