#pragma once

// Synthetic markets and chains for tests, demos and the acceptance suite.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mstates/correlation.hpp"

namespace mstates::synthetic {

/// Random correlation matrix: normalized Gram matrix of Gaussian vectors
/// of dimension `rank`.
Eigen::MatrixXd random_correlation(int n, int rank, std::mt19937_64& rng);

/// Uniform random unit vector (normalized Gaussian draw).
Eigen::VectorXd random_unit_vector(int n, std::mt19937_64& rng);

/// Epochs drawn around `centers[regime[e]]`: each packed entry gets
/// independent uniform noise in [-noise, noise], clamped to [-1, 1].
std::vector<EpochCorrelation> planted_epochs(const std::vector<Eigen::MatrixXd>& centers,
                                             const std::vector<int>& regime, double noise, std::mt19937_64& rng);

/// Simulates a Markov chain with row-stochastic `probs`; returns 1-based labels.
std::vector<int> simulate_chain(const Eigen::MatrixXd& probs, std::size_t steps, int start_state, std::uint64_t seed);

struct Regime {
    std::size_t days = 0;
    double market_loading = 0.5;  // weight of the common factor
    double noise = 1.0;
};

struct MarketSpec {
    int n_tickers = 5;
    std::vector<Regime> regimes;
    std::string index_ticker = "SPX";
    Date first_day = Date::ymd(2006, 1, 3);
    double daily_vol = 0.01;
    std::uint64_t seed = 7;
    /// Tickers (by position) that lose quotes on some days, as
    /// (ticker, day offsets) pairs.
    std::vector<std::pair<int, std::vector<std::size_t>>> gaps;
};

/// Business days (Mon-Fri) starting at `first`.
std::vector<Date> business_days(Date first, std::size_t count);

/// Writes one Yahoo-style CSV per ticker plus the index into `dir`. Returns
/// the calendar that was written.
std::vector<Date> write_market(const std::filesystem::path& dir, const MarketSpec& spec);

}  // namespace mstates::synthetic
