#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mstates/correlation.hpp"

namespace mstates {

struct EpochSpectrum {
    int epoch_id = 0;
    Date end;
    CorrelationKind kind = CorrelationKind::pearson;
    Eigen::VectorXd eigenvalues;     // descending
    Eigen::MatrixXd eigenvectors;    // column i pairs with eigenvalues(i)
    Eigen::VectorXd top_eigenvector;  // unit norm, component sum >= 0
    double pr_top = 0.0;
    bool degenerate = false;  // top eigenvalue multiplicity > 1 (gap <= 1e-10)
};

inline constexpr double kDegenerateGap = 1e-10;

/// Full symmetric eigendecomposition. Throws NumericError on non-finite input.
EpochSpectrum spectrum(const Eigen::MatrixXd& m);
EpochSpectrum spectrum(const EpochCorrelation& m);

/// 1 / sum(v_i^4) for a unit vector; ranges over [1, N]. Throws NumericError
/// if |v| differs from 1 by more than 1e-10.
double participation_ratio(const Eigen::Ref<const Eigen::VectorXd>& v);

/// sum(v_i^4), the reciprocal of the participation ratio.
double inverse_participation_ratio(const Eigen::Ref<const Eigen::VectorXd>& v);

struct PrPoint {
    int epoch_id = 0;
    Date end_date;
    double pr_top = 0.0;
    bool degenerate = false;
    double top_eigenvalue = 0.0;
};

std::vector<PrPoint> pr_series(const std::vector<EpochCorrelation>& matrices);

/// Per-epoch top-eigenvector PR over a packed stack, in epoch order.
/// When `leading` is given it receives the `n_leading` largest eigenvalues of
/// each epoch.
std::vector<PrPoint> pr_series(const EpochStack& stack, std::vector<Eigen::VectorXd>* leading = nullptr,
                               int n_leading = 10);

struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;                  // population (divide by n)
    std::optional<double> skewness;         // undefined when variance is 0
    std::optional<double> excess_kurtosis;  // normal -> 0
};

/// Two-pass central moments of a sample. Throws DataError on an empty sample.
Moments moments(std::span<const double> sample);

/// Moments of pr_top over epochs whose end date lies in [period.start, period.end).
Moments pr_period_moments(const std::vector<PrPoint>& series, DateRange period);

struct ElementHistogram {
    int epoch_id = 0;
    std::vector<double> bin_edges;  // bins + 1 uniform edges over [-1, 1]
    std::vector<long long> counts;  // last bin closed on the right
    Moments moments;
};

inline constexpr int kDefaultBins = 201;

std::vector<double> histogram_edges(int bins);

ElementHistogram element_histogram(std::span<const double> entries, int bins, int epoch_id = 0);
ElementHistogram element_histogram(const EpochCorrelation& m, int bins = kDefaultBins);

}  // namespace mstates
