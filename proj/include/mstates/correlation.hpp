#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mstates/date.hpp"
#include "mstates/ingest.hpp"

namespace mstates {

/// Row-major dense matrix; one feature vector (packed upper triangle) per row.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ReturnsMatrix {
    std::vector<std::string> tickers;
    std::vector<Date> return_dates;  // calendar[1..T-1]
    Eigen::MatrixXd returns;         // N x (T-1)
    Eigen::VectorXd index_returns;   // T-1

    std::size_t n_tickers() const { return tickers.size(); }
    std::size_t n_returns() const { return return_dates.size(); }
};

struct EpochSpec {
    int length = 20;
    int shift = 1;

    /// Throws ConfigError unless length >= 2 and shift >= 1.
    void validate() const;
};

/// Half-open range [begin, end) of return-column indices.
struct Window {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - begin; }
    bool operator==(const Window&) const = default;
};

enum class CorrelationKind : std::uint8_t { pearson = 0, relative = 1 };

std::string to_string(CorrelationKind kind);
CorrelationKind parse_kind(const std::string& text);

struct EpochCorrelation {
    int epoch_id = 0;
    Date start;  // first return-date of the window
    Date end;    // last return-date of the window
    CorrelationKind kind = CorrelationKind::pearson;
    Eigen::MatrixXd matrix;
    std::vector<std::string> degenerate_tickers;
};

/// Log returns with the zero-fill rule: an unquoted day gets 0, the next
/// quoted day is measured against the last quoted price.
ReturnsMatrix log_returns(const PriceTable& prices);

std::size_t epoch_count(std::size_t n_returns, const EpochSpec& spec);
std::vector<Window> epoch_windows(std::size_t n_returns, const EpochSpec& spec);

/// Pearson correlation of the rows of `series` (rows are variables, columns
/// are observations) using window means and population standard deviations.
/// Rows with zero variance get zero off-diagonals and are marked in
/// `degenerate`.
Eigen::MatrixXd pearson_rows(const Eigen::Ref<const Eigen::MatrixXd>& series, std::vector<bool>& degenerate);

EpochCorrelation pearson_epoch(const ReturnsMatrix& returns, const Window& window, int epoch_id = 0);

/// Correlation of each ticker pair with the index's linear influence
/// removed. Tickers whose correlation with the index is +-1 (within 1e-12 on
/// 1 - c^2) are flagged degenerate and get zero off-diagonals.
EpochCorrelation relative_epoch(const ReturnsMatrix& returns, const Window& window, int epoch_id = 0);

/// Mean of the strictly-upper-triangle entries. Throws DataError when N < 2.
double average_correlation(const Eigen::MatrixXd& m);
inline double average_correlation(const EpochCorrelation& m) { return average_correlation(m.matrix); }

std::size_t upper_size(std::size_t n);
/// Row-major strictly-upper-triangle flattening.
Eigen::VectorXd upper_triangle(const Eigen::MatrixXd& m);
/// Rebuilds the symmetric matrix with unit diagonal.
Eigen::MatrixXd from_upper_triangle(const Eigen::Ref<const Eigen::RowVectorXd>& upper, std::size_t n);

struct EpochMeta {
    int epoch_id = 0;
    Date start;
    Date end;
    std::vector<std::uint32_t> degenerate;  // ticker indices
};

/// All epochs of one kind in packed form: row e of `upper` is the
/// strictly-upper triangle of epoch e.
struct EpochStack {
    std::vector<std::string> tickers;
    CorrelationKind kind = CorrelationKind::pearson;
    EpochSpec spec;
    std::vector<EpochMeta> epochs;
    FeatureMatrix upper;

    std::size_t n_tickers() const { return tickers.size(); }
    std::size_t size() const { return epochs.size(); }
    EpochCorrelation at(std::size_t e) const;
    std::vector<Date> end_dates() const;
};

/// Computes every epoch window in parallel. Output is independent of the
/// number of threads.
EpochStack compute_epochs(const ReturnsMatrix& returns, const EpochSpec& spec, CorrelationKind kind);

EpochStack stack_from(const std::vector<EpochCorrelation>& matrices);

}  // namespace mstates
