#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "mstates/clustering.hpp"
#include "mstates/error.hpp"
#include "mstates/synthetic.hpp"

using namespace mstates;

namespace {

std::vector<Date> fake_dates(std::size_t n) {
    std::vector<Date> d;
    for (std::size_t i = 0; i < n; ++i) d.push_back(Date::from_days(14000 + static_cast<int>(i)));
    return d;
}

FeatureMatrix blobs(const std::vector<Eigen::RowVectorXd>& centers, int per, double radius, std::mt19937_64& rng,
                    std::vector<int>& truth) {
    std::uniform_real_distribution<double> u(-radius, radius);
    const auto dim = centers.front().size();
    FeatureMatrix x(static_cast<Eigen::Index>(centers.size()) * per, dim);
    truth.clear();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (int p = 0; p < per; ++p) {
            const auto row = static_cast<Eigen::Index>(c) * per + p;
            for (Eigen::Index j = 0; j < dim; ++j) x(row, j) = centers[c](j) + u(rng);
            truth.push_back(static_cast<int>(c));
        }
    }
    return x;
}

// True when the two labelings define the same partition.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto [it, fresh] = ab.emplace(a[i], b[i]);
        if (!fresh && it->second != b[i]) return false;
        auto [jt, fresh2] = ba.emplace(b[i], a[i]);
        if (!fresh2 && jt->second != a[i]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("k=1 centroid is the mean feature vector") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    FeatureMatrix x(40, 7);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = g(rng);
    KMeansOptions opt;
    opt.k = 1;
    opt.restarts = 3;
    const auto seq = kmeans_states(x, row_average_correlations(x), fake_dates(40), opt);
    CHECK((seq.centroids.row(0) - x.colwise().mean()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::all_of(seq.labels.begin(), seq.labels.end(), [](int l) { return l == 1; }));
}

TEST_CASE("well separated regimes are recovered exactly") {
    std::mt19937_64 rng(11);
    for (auto metric : {ClusterMetric::euclidean, ClusterMetric::l1}) {
        std::vector<Eigen::RowVectorXd> centers;
        for (int c = 0; c < 4; ++c) centers.push_back(Eigen::RowVectorXd::Constant(10, 0.2 * c));
        // Centroid gap is 0.2 * sqrt(10) ~ 0.63; noise radius is 0.01 * sqrt(10).
        std::vector<int> truth;
        const auto x = blobs(centers, 30, 0.01, rng, truth);
        KMeansOptions opt;
        opt.k = 4;
        opt.seed = 99;
        opt.restarts = 10;
        opt.metric = metric;
        const auto seq = kmeans_states(x, row_average_correlations(x), fake_dates(120), opt);
        CHECK(same_partition(seq.labels, truth));
        // Centers were built in ascending mean order, so renumbering gives the identity map.
        for (std::size_t i = 0; i < truth.size(); ++i) REQUIRE(seq.labels[i] == truth[i] + 1);
    }
}

TEST_CASE("clustering is deterministic for a fixed seed") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    FeatureMatrix x(80, 6);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = g(rng);
    KMeansOptions opt;
    opt.k = 5;
    opt.seed = 42;
    opt.restarts = 8;
    const auto a = kmeans_states(x, row_average_correlations(x), fake_dates(80), opt);
    const auto b = kmeans_states(x, row_average_correlations(x), fake_dates(80), opt);
    CHECK(a.labels == b.labels);
    CHECK(a.centroids == b.centroids);
    CHECK(a.inertia == b.inertia);
    CHECK(a.best_seed == b.best_seed);
    CHECK(a.best_seed >= 42);
    CHECK(a.best_seed < 50);
}

TEST_CASE("inertia never increases across Lloyd iterations") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    FeatureMatrix x(200, 5);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = g(rng);
    for (auto metric : {ClusterMetric::euclidean, ClusterMetric::l1}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto run = lloyd_run(x, 6, seed, 500, metric);
            REQUIRE(!run.inertia_trace.empty());
            for (std::size_t i = 1; i < run.inertia_trace.size(); ++i)
                REQUIRE(run.inertia_trace[i] <= run.inertia_trace[i - 1] * (1 + 1e-12) + 1e-12);
            CHECK(run.converged);
        }
    }
}

TEST_CASE("states are numbered by ascending average correlation") {
    std::mt19937_64 rng(3);
    std::vector<Eigen::RowVectorXd> centers{Eigen::RowVectorXd::Constant(6, 0.6), Eigen::RowVectorXd::Constant(6, -0.1),
                                            Eigen::RowVectorXd::Constant(6, 0.3)};
    std::vector<int> truth;
    const auto x = blobs(centers, 20, 0.02, rng, truth);
    KMeansOptions opt;
    opt.k = 3;
    opt.restarts = 5;
    const auto avg = row_average_correlations(x);
    const auto seq = kmeans_states(x, avg, fake_dates(60), opt);
    CHECK(std::is_sorted(seq.state_avg_corr.begin(), seq.state_avg_corr.end()));
    CHECK(same_partition(seq.labels, truth));
    CHECK(seq.labels[0] == 3);
    CHECK(seq.labels[20] == 1);
    CHECK(seq.labels[40] == 2);
    // Centroid of state s sits at the center whose members carry label s.
    CHECK(seq.centroids(2, 0) == doctest::Approx(0.6).epsilon(0.05));

    const auto raw = lloyd_run(x, 3, seq.best_seed, 500, ClusterMetric::euclidean);
    CHECK(same_partition(raw.labels, seq.labels));
    CHECK(raw.inertia == seq.inertia);
}

TEST_CASE("k-means argument errors") {
    FeatureMatrix x = FeatureMatrix::Zero(3, 2);
    KMeansOptions opt;
    opt.k = 4;
    CHECK_THROWS_AS(kmeans_states(x, row_average_correlations(x), fake_dates(3), opt), DataError);
    opt.k = 0;
    CHECK_THROWS_AS(kmeans_states(x, row_average_correlations(x), fake_dates(3), opt), ConfigError);
    opt.k = 2;
    opt.restarts = 0;
    CHECK_THROWS_AS(kmeans_states(x, row_average_correlations(x), fake_dates(3), opt), ConfigError);
    CHECK_THROWS_AS(lloyd_run(x, 5, 0, 10, ClusterMetric::euclidean), DataError);
}

TEST_CASE("duplicate points still fill every cluster") {
    FeatureMatrix x(6, 2);
    x << 0, 0, 0, 0, 0, 0, 0, 0, 5, 5, 9, 9;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto run = lloyd_run(x, 3, seed, 100, ClusterMetric::euclidean);
        std::set<int> used(run.labels.begin(), run.labels.end());
        CHECK(used.size() == 3);
        CHECK(run.inertia == doctest::Approx(0.0));
    }
}

TEST_CASE("kmeans_states works on correlation matrices") {
    std::mt19937_64 rng(12);
    const std::vector<Eigen::MatrixXd> centers{synthetic::random_correlation(8, 2, rng),
                                               synthetic::random_correlation(8, 2, rng)};
    std::vector<int> regime;
    for (int e = 0; e < 40; ++e) regime.push_back(e < 25 ? 0 : 1);
    const auto mats = synthetic::planted_epochs(centers, regime, 0.01, rng);
    const auto seq = kmeans_states(mats, 2, 7, 5);
    CHECK(same_partition(seq.labels, regime));
    CHECK(seq.centroids.cols() == 28);
}

TEST_CASE("state_report summarizes runs") {
    StateSequence seq;
    seq.k = 2;
    seq.labels = {1, 1, 2, 2, 1};
    seq.epoch_dates = fake_dates(5);
    const auto rep = state_report(seq, std::vector<double>{0.1, 0.2, 0.5, 0.7, 0.3});
    REQUIRE(rep.size() == 2);
    CHECK(rep[0].count == 3);
    CHECK(rep[0].avg_corr == doctest::Approx(0.2));
    CHECK(rep[0].runs.size() == 2);
    CHECK(rep[0].runs[1].first == 4);
    CHECK(*rep[0].first_date == seq.epoch_dates[0]);
    CHECK(*rep[0].last_date == seq.epoch_dates[4]);
    CHECK(rep[1].count == 2);
    CHECK(rep[1].runs.size() == 1);
    CHECK(rep[1].runs[0].first == 2);
    CHECK(rep[1].runs[0].last == 3);

    StateSequence single;
    single.k = 1;
    single.labels = {1, 1, 1};
    const auto one = state_report(single, std::vector<double>{0.0, 0.0, 0.0});
    CHECK(one[0].runs.size() == 1);
    CHECK(one[0].count == 3);
    CHECK_THROWS_AS(state_report(single, std::vector<double>{0.0}), DataError);
}
