#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "mstates/error.hpp"
#include "mstates/linalg.hpp"
#include "mstates/mds.hpp"
#include "mstates/synthetic.hpp"

using namespace mstates;
using doctest::Approx;

namespace {

EpochCorrelation wrap(const Eigen::MatrixXd& m) {
    EpochCorrelation e;
    e.matrix = m;
    return e;
}

DistanceMatrix euclidean(const Eigen::MatrixXd& points) {
    DistanceMatrix d;
    d.n = static_cast<std::size_t>(points.rows());
    d.metric = DistanceMetric::l2;
    d.values.resize(points.rows(), points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        for (Eigen::Index j = 0; j < points.rows(); ++j) d.values(i, j) = (points.row(i) - points.row(j)).norm();
    return d;
}

double max_distance_error(const DistanceMatrix& d, const Eigen::MatrixXd& coords) {
    double worst = 0;
    for (Eigen::Index i = 0; i < coords.rows(); ++i)
        for (Eigen::Index j = 0; j < coords.rows(); ++j)
            worst = std::max(worst, std::abs((coords.row(i) - coords.row(j)).norm() - d.values(i, j)));
    return worst;
}

}  // namespace

TEST_CASE("distance examples") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd a = synthetic::random_correlation(6, 3, rng);
    Eigen::MatrixXd b = a;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            if (i != j) b(i, j) += 0.1;
    const auto d = pairwise_distances(std::vector<EpochCorrelation>{wrap(a), wrap(a), wrap(b)}, DistanceMetric::l1_mean);
    CHECK(d.values(0, 1) == 0.0);
    CHECK(d.values(0, 2) == Approx(0.1).epsilon(1e-12));
    CHECK(d.values(2, 0) == d.values(0, 2));
    const auto l2 = pairwise_distances(std::vector<EpochCorrelation>{wrap(a), wrap(b)}, DistanceMetric::l2);
    CHECK(l2.values(0, 1) == Approx(0.1 * std::sqrt(15.0)).epsilon(1e-12));
}

TEST_CASE("distances match the double-loop definition") {
    std::mt19937_64 rng(2);
    std::vector<EpochCorrelation> mats;
    for (int i = 0; i < 4; ++i) mats.push_back(wrap(synthetic::random_correlation(5, 2, rng)));
    for (auto metric : {DistanceMetric::l1_mean, DistanceMetric::l2}) {
        const auto d = pairwise_distances(mats, metric);
        for (int p = 0; p < 4; ++p) {
            for (int q = 0; q < 4; ++q) {
                double acc = 0;
                for (int i = 0; i < 5; ++i) {
                    for (int j = i + 1; j < 5; ++j) {
                        const double diff = mats[p].matrix(i, j) - mats[q].matrix(i, j);
                        acc += metric == DistanceMetric::l2 ? diff * diff : std::abs(diff);
                    }
                }
                const double expect = metric == DistanceMetric::l2 ? std::sqrt(acc) : acc / 10.0;
                CHECK(std::abs(d.values(p, q) - expect) <= 1e-12);
            }
        }
    }
}

TEST_CASE("distance errors") {
    std::vector<EpochCorrelation> mats{wrap(Eigen::MatrixXd::Identity(3, 3)), wrap(Eigen::MatrixXd::Identity(4, 4))};
    CHECK_THROWS_AS(pairwise_distances(mats, DistanceMetric::l1_mean), DataError);
    CHECK_THROWS_AS(pairwise_distances(std::vector<EpochCorrelation>{wrap(Eigen::MatrixXd::Identity(3, 3))}, DistanceMetric::l1_mean), DataError);
    CHECK(parse_distance_metric("l1") == DistanceMetric::l1_mean);
    CHECK(parse_distance_metric("l2") == DistanceMetric::l2);
    CHECK_THROWS_AS(parse_distance_metric("cosine"), ConfigError);
}

TEST_CASE("distance axioms on random inputs") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    FeatureMatrix x(25, 10);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = g(rng);
    x.row(7) = x.row(3);
    for (auto metric : {DistanceMetric::l1_mean, DistanceMetric::l2}) {
        const auto d = pairwise_distances(x, metric);
        CHECK(d.values == d.values.transpose());
        CHECK(d.values.diagonal().cwiseAbs().maxCoeff() == 0.0);
        CHECK(d.values(3, 7) <= 1e-15);
        CHECK(d.values.minCoeff() >= 0.0);
        for (int i = 0; i < 25; ++i)
            for (int j = 0; j < 25; ++j)
                for (int k = 0; k < 25; ++k) REQUIRE(d.values(i, k) <= d.values(i, j) + d.values(j, k) + 1e-12);
    }
}

TEST_CASE("equilateral triangle is recovered") {
    Eigen::MatrixXd tri(3, 2);
    tri << 0, 0, 2, 0, 1, std::sqrt(3.0);
    const auto d = euclidean(tri);
    const auto e = classical_mds(d, 2);
    CHECK(max_distance_error(d, e.coords) <= 1e-10);
    CHECK_THROWS_AS(classical_mds(d, 3), DataError);
}

TEST_CASE("identical inputs embed at the origin") {
    DistanceMatrix d;
    d.n = 5;
    d.values = Eigen::MatrixXd::Zero(5, 5);
    const auto e = classical_mds(d, 3);
    CHECK(e.all_zero);
    CHECK(e.coords.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Euclidean 3D configurations are reproduced") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    Eigen::MatrixXd pts(40, 3);
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        for (int j = 0; j < 3; ++j) pts(i, j) = g(rng) * (j + 1);
    const auto d = euclidean(pts);
    const auto e = classical_mds(d, 3);
    CHECK(e.stress <= 1e-10);
    CHECK(max_distance_error(d, e.coords) <= 1e-8);
    CHECK(e.coords.colwise().mean().cwiseAbs().maxCoeff() <= 1e-10);
    CHECK_FALSE(e.clamped);
    for (int c = 0; c < 3; ++c) {
        Eigen::Index at = 0;
        e.coords.col(c).cwiseAbs().maxCoeff(&at);
        CHECK(e.coords(at, c) > 0);
    }
    CHECK(e.eigenvalues_used(0) >= e.eigenvalues_used(1));
    CHECK(e.eigenvalues_used(1) >= e.eigenvalues_used(2));
}

TEST_CASE("stress does not grow with more dimensions") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    Eigen::MatrixXd pts(30, 6);
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        for (int j = 0; j < 6; ++j) pts(i, j) = g(rng);
    const auto d = euclidean(pts);
    const auto two = classical_mds(d, 2);
    const auto three = classical_mds(d, 3);
    CHECK(two.stress >= three.stress);
    CHECK(three.stress > 0.0);
    CHECK(embedding_stress(d, three.coords) == Approx(three.stress).epsilon(1e-12));
}

TEST_CASE("L1 distances between correlation matrices embed deterministically") {
    std::mt19937_64 rng(6);
    std::vector<EpochCorrelation> mats;
    for (int i = 0; i < 30; ++i) mats.push_back(wrap(synthetic::random_correlation(8, 2, rng)));
    const auto d = pairwise_distances(mats, DistanceMetric::l1_mean);
    const auto a = classical_mds(d);
    const auto b = classical_mds(d);
    CHECK(a.coords == b.coords);
    CHECK(a.coords.cols() == 3);
    CHECK(a.coords.colwise().mean().cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(a.converged);
}

TEST_CASE("top_eigenpairs agrees with a full solve") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int n : {5, 40, 150}) {
        Eigen::MatrixXd x(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) x(i, j) = g(rng);
        const Eigen::MatrixXd a = (x + x.transpose()) / 2;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(a);
        const auto top = top_eigenpairs(a, 3);
        CHECK(top.converged);
        for (int i = 0; i < 3; ++i) {
            CHECK(top.values(i) == Approx(full.eigenvalues()(n - 1 - i)).epsilon(1e-9));
            const double r = (a * top.vectors.col(i) - top.values(i) * top.vectors.col(i)).norm();
            CHECK(r <= 1e-8 * std::max(1.0, full.eigenvalues().cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("top_eigenpairs can skip the constant direction") {
    const int n = 30;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) pts.row(i) << g(rng), 0.5 * g(rng);
    const Eigen::MatrixXd centered = pts.rowwise() - pts.colwise().mean();
    Eigen::MatrixXd b = centered * centered.transpose();
    b += 100.0 * Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    TopEigenOptions opt;
    opt.deflate_constant = true;
    const auto top = top_eigenpairs(b, 2, opt);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(centered.transpose() * centered);
    CHECK(top.values(0) == Approx(gram.eigenvalues()(1)).epsilon(1e-9));
    CHECK(top.values(1) == Approx(gram.eigenvalues()(0)).epsilon(1e-9));
    CHECK(std::abs(top.vectors.col(0).sum()) <= 1e-9);
}
