#include "mstates/mds.hpp"

#include <cmath>

#include "mstates/error.hpp"
#include "mstates/linalg.hpp"

namespace mstates {

std::string to_string(DistanceMetric metric) { return metric == DistanceMetric::l1_mean ? "l1_mean" : "l2"; }

DistanceMetric parse_distance_metric(const std::string& text) {
    if (text == "l1_mean" || text == "l1") return DistanceMetric::l1_mean;
    if (text == "l2") return DistanceMetric::l2;
    throw ConfigError("unknown distance metric '" + text + "'");
}

DistanceMatrix pairwise_distances(const FeatureMatrix& features, DistanceMetric metric) {
    const Eigen::Index n = features.rows();
    const Eigen::Index d = features.cols();
    if (n < 2) throw DataError("pairwise_distances: need at least two matrices");
    DistanceMatrix out;
    out.n = static_cast<std::size_t>(n);
    out.metric = metric;
    out.values = Eigen::MatrixXd::Zero(n, n);
    const double inv_d = d > 0 ? 1.0 / static_cast<double>(d) : 0.0;

    constexpr Eigen::Index kBlock = 64;
    const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index bi = 0; bi < blocks; ++bi) {
        const Eigen::Index i0 = bi * kBlock;
        const Eigen::Index i1 = std::min(n, i0 + kBlock);
        for (Eigen::Index i = i0; i < i1; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                double s = 0.0;
                if (metric == DistanceMetric::l1_mean) {
                    for (Eigen::Index c = 0; c < d; ++c) s += std::abs(features(i, c) - features(j, c));
                    s *= inv_d;
                } else {
                    for (Eigen::Index c = 0; c < d; ++c) {
                        const double t = features(i, c) - features(j, c);
                        s += t * t;
                    }
                    s = std::sqrt(s);
                }
                out.values(i, j) = s;
            }
        }
    }
    out.values.triangularView<Eigen::StrictlyLower>() = out.values.transpose();
    return out;
}

DistanceMatrix pairwise_distances(const EpochStack& stack, DistanceMetric metric) {
    return pairwise_distances(stack.upper, metric);
}

DistanceMatrix pairwise_distances(const std::vector<EpochCorrelation>& matrices, DistanceMetric metric) {
    if (matrices.size() < 2) throw DataError("pairwise_distances: need at least two matrices");
    const auto n = matrices.front().matrix.rows();
    for (const auto& m : matrices) {
        if (m.matrix.rows() != n || m.matrix.cols() != n) throw DataError("pairwise_distances: dimension mismatch");
    }
    return pairwise_distances(stack_from(matrices).upper, metric);
}

double embedding_stress(const DistanceMatrix& d, const Eigen::MatrixXd& coords) {
    const auto n = static_cast<Eigen::Index>(d.n);
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double fit = (coords.row(i) - coords.row(j)).norm();
            const double target = d.values(i, j);
            num += (fit - target) * (fit - target);
            den += target * target;
        }
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

Embedding classical_mds(const DistanceMatrix& d, int dims) {
    const auto n = static_cast<Eigen::Index>(d.n);
    if (dims < 1) throw ConfigError("classical_mds: dims must be >= 1");
    if (n <= dims) throw DataError("classical_mds: need more points than dimensions");

    Embedding out;
    out.coords = Eigen::MatrixXd::Zero(n, dims);
    out.eigenvalues_used = Eigen::VectorXd::Zero(dims);
    out.raw_eigenvalues = Eigen::VectorXd::Zero(dims);
    if (d.values.cwiseAbs().maxCoeff() == 0.0) {
        out.all_zero = true;
        return out;
    }

    // b = -1/2 J D^2 J with J = I - 11^T/n
    Eigen::MatrixXd b = d.values.array().square().matrix() * -0.5;
    const Eigen::VectorXd row_mean = b.rowwise().mean();
    const double grand = row_mean.mean();
    b.colwise() -= row_mean;
    b.rowwise() -= row_mean.transpose();
    b.array() += grand;

    TopEigenOptions opt;
    opt.deflate_constant = true;
    const auto top = top_eigenpairs(b, dims, opt);
    out.converged = top.converged;
    out.raw_eigenvalues = top.values;
    for (int c = 0; c < dims; ++c) {
        double lambda = top.values(c);
        if (lambda < 0.0) {
            out.clamped = true;
            lambda = 0.0;
        }
        out.eigenvalues_used(c) = lambda;
        Eigen::VectorXd v = top.vectors.col(c);
        v.array() -= v.mean();
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        out.coords.col(c) = v * std::sqrt(lambda);
    }
    out.stress = embedding_stress(d, out.coords);
    return out;
}

}  // namespace mstates
