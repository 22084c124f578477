#include "mstates/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "mstates/error.hpp"

namespace mstates {

void EpochSpec::validate() const {
    if (length < 2) throw ConfigError("epoch length must be >= 2");
    if (shift < 1) throw ConfigError("epoch shift must be >= 1");
}

std::string to_string(CorrelationKind kind) {
    return kind == CorrelationKind::pearson ? "pearson" : "relative";
}

CorrelationKind parse_kind(const std::string& text) {
    if (text == "pearson") return CorrelationKind::pearson;
    if (text == "relative") return CorrelationKind::relative;
    throw ConfigError("unknown correlation kind '" + text + "'");
}

ReturnsMatrix log_returns(const PriceTable& prices) {
    const std::size_t T = prices.calendar.size();
    if (T < 2) throw DataError("log_returns: need at least two calendar days");
    ReturnsMatrix out;
    out.tickers = prices.tickers;
    out.return_dates.assign(prices.calendar.dates.begin() + 1, prices.calendar.dates.end());

    auto fill = [T](const PriceRow& row, auto&& dst) {
        std::ptrdiff_t last = -1;
        for (std::size_t t = 0; t < T; ++t) {
            if (!row.quoted[t]) {
                if (t > 0) dst(t - 1) = 0.0;
                continue;
            }
            if (t > 0) dst(t - 1) = last >= 0 ? std::log(row.price[t] / row.price[last]) : 0.0;
            last = static_cast<std::ptrdiff_t>(t);
        }
    };

    out.returns.resize(static_cast<Eigen::Index>(prices.n_tickers()), static_cast<Eigen::Index>(T - 1));
    for (std::size_t i = 0; i < prices.n_tickers(); ++i) {
        auto row = out.returns.row(static_cast<Eigen::Index>(i));
        fill(prices.rows[i], [&](std::size_t c) -> double& { return row(static_cast<Eigen::Index>(c)); });
    }
    out.index_returns.resize(static_cast<Eigen::Index>(T - 1));
    fill(prices.index_row, [&](std::size_t c) -> double& { return out.index_returns(static_cast<Eigen::Index>(c)); });
    return out;
}

std::size_t epoch_count(std::size_t n_returns, const EpochSpec& spec) {
    spec.validate();
    const auto len = static_cast<std::size_t>(spec.length);
    if (n_returns < len) return 0;
    return (n_returns - len) / static_cast<std::size_t>(spec.shift) + 1;
}

std::vector<Window> epoch_windows(std::size_t n_returns, const EpochSpec& spec) {
    spec.validate();
    const auto len = static_cast<std::size_t>(spec.length);
    if (n_returns < len) {
        throw DataError("epoch_windows: " + std::to_string(n_returns) + " returns is shorter than one epoch of " +
                        std::to_string(len));
    }
    std::vector<Window> out;
    out.reserve(epoch_count(n_returns, spec));
    for (std::size_t b = 0; b + len <= n_returns; b += static_cast<std::size_t>(spec.shift)) {
        out.push_back({b, b + len});
    }
    return out;
}

Eigen::MatrixXd pearson_rows(const Eigen::Ref<const Eigen::MatrixXd>& series, std::vector<bool>& degenerate) {
    const Eigen::Index n = series.rows();
    const Eigen::Index L = series.cols();
    degenerate.assign(static_cast<std::size_t>(n), false);

    // Standardized rows scaled by 1/sqrt(L) so that Z * Z^T is the correlation.
    Eigen::MatrixXd z(n, L);
    const double inv_len = 1.0 / static_cast<double>(L);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mean = series.row(i).sum() * inv_len;
        Eigen::RowVectorXd centered = series.row(i).array() - mean;
        const double sigma = std::sqrt(centered.squaredNorm() * inv_len);
        const double scale = series.row(i).cwiseAbs().maxCoeff();
        // sigma relative to the series magnitude, so constant series whose
        // mean does not round back exactly still count as constant.
        if (scale == 0.0 || !(sigma > 1e-12 * scale)) {
            degenerate[static_cast<std::size_t>(i)] = true;
            z.row(i).setZero();
            continue;
        }
        z.row(i) = centered / (sigma * std::sqrt(static_cast<double>(L)));
    }

    Eigen::MatrixXd c = z * z.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        c(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = std::clamp(c(i, j), -1.0, 1.0);
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

namespace {

void check_window(const ReturnsMatrix& r, const Window& w) {
    if (w.begin >= w.end || w.end > r.n_returns()) throw DataError("epoch window out of bounds");
}

EpochCorrelation make_epoch(const ReturnsMatrix& r, const Window& w, int id, CorrelationKind kind) {
    EpochCorrelation e;
    e.epoch_id = id;
    e.start = r.return_dates[w.begin];
    e.end = r.return_dates[w.end - 1];
    e.kind = kind;
    return e;
}

void name_degenerate(EpochCorrelation& e, const ReturnsMatrix& r, const std::vector<bool>& flags) {
    for (std::size_t i = 0; i < r.n_tickers(); ++i) {
        if (flags[i]) e.degenerate_tickers.push_back(r.tickers[i]);
    }
}

constexpr double kRelativeDenominatorFloor = 1e-12;

Eigen::MatrixXd relative_from_pearson(const Eigen::MatrixXd& full, std::vector<bool>& degenerate) {
    // `full` holds the N tickers followed by the index in its last row/column.
    const Eigen::Index n = full.rows() - 1;
    Eigen::VectorXd c_index = full.col(n).head(n);
    Eigen::VectorXd denom(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        denom(i) = 1.0 - c_index(i) * c_index(i);
        if (denom(i) < kRelativeDenominatorFloor) degenerate[static_cast<std::size_t>(i)] = true;
    }
    Eigen::MatrixXd rc = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (degenerate[static_cast<std::size_t>(i)]) continue;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (degenerate[static_cast<std::size_t>(j)]) continue;
            const double v = (full(i, j) - c_index(i) * c_index(j)) / std::sqrt(denom(i) * denom(j));
            rc(i, j) = rc(j, i) = std::clamp(v, -1.0, 1.0);
        }
    }
    return rc;
}

Eigen::MatrixXd with_index(const ReturnsMatrix& r, const Window& w) {
    const auto n = static_cast<Eigen::Index>(r.n_tickers());
    const auto b = static_cast<Eigen::Index>(w.begin);
    const auto L = static_cast<Eigen::Index>(w.length());
    Eigen::MatrixXd x(n + 1, L);
    x.topRows(n) = r.returns.middleCols(b, L);
    x.row(n) = r.index_returns.segment(b, L).transpose();
    return x;
}

}  // namespace

EpochCorrelation pearson_epoch(const ReturnsMatrix& returns, const Window& window, int epoch_id) {
    check_window(returns, window);
    auto e = make_epoch(returns, window, epoch_id, CorrelationKind::pearson);
    std::vector<bool> degenerate;
    e.matrix = pearson_rows(returns.returns.middleCols(static_cast<Eigen::Index>(window.begin),
                                                       static_cast<Eigen::Index>(window.length())),
                            degenerate);
    name_degenerate(e, returns, degenerate);
    return e;
}

EpochCorrelation relative_epoch(const ReturnsMatrix& returns, const Window& window, int epoch_id) {
    check_window(returns, window);
    auto e = make_epoch(returns, window, epoch_id, CorrelationKind::relative);
    std::vector<bool> degenerate;
    Eigen::MatrixXd full = pearson_rows(with_index(returns, window), degenerate);
    degenerate.pop_back();  // the index itself is never reported
    e.matrix = relative_from_pearson(full, degenerate);
    name_degenerate(e, returns, degenerate);
    return e;
}

double average_correlation(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    if (n < 2) throw DataError("average_correlation: need N >= 2");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) sum += m(i, j);
    }
    return sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

std::size_t upper_size(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

Eigen::VectorXd upper_triangle(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    Eigen::VectorXd out(static_cast<Eigen::Index>(upper_size(static_cast<std::size_t>(n))));
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) out(k++) = m(i, j);
    }
    return out;
}

Eigen::MatrixXd from_upper_triangle(const Eigen::Ref<const Eigen::RowVectorXd>& upper, std::size_t n) {
    if (static_cast<std::size_t>(upper.size()) != upper_size(n)) {
        throw DataError("from_upper_triangle: size mismatch");
    }
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(N, N);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = i + 1; j < N; ++j) {
            m(i, j) = m(j, i) = upper(k++);
        }
    }
    return m;
}

EpochCorrelation EpochStack::at(std::size_t e) const {
    EpochCorrelation out;
    const auto& meta = epochs.at(e);
    out.epoch_id = meta.epoch_id;
    out.start = meta.start;
    out.end = meta.end;
    out.kind = kind;
    out.matrix = from_upper_triangle(upper.row(static_cast<Eigen::Index>(e)), tickers.size());
    for (auto i : meta.degenerate) out.degenerate_tickers.push_back(tickers[i]);
    return out;
}

std::vector<Date> EpochStack::end_dates() const {
    std::vector<Date> out;
    out.reserve(epochs.size());
    for (const auto& m : epochs) out.push_back(m.end);
    return out;
}

EpochStack compute_epochs(const ReturnsMatrix& returns, const EpochSpec& spec, CorrelationKind kind) {
    const auto windows = epoch_windows(returns.n_returns(), spec);
    EpochStack stack;
    stack.tickers = returns.tickers;
    stack.kind = kind;
    stack.spec = spec;
    stack.epochs.resize(windows.size());
    const auto n = returns.n_tickers();
    stack.upper.resize(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(upper_size(n)));

    const auto count = static_cast<std::ptrdiff_t>(windows.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t e = 0; e < count; ++e) {
        const auto& w = windows[static_cast<std::size_t>(e)];
        std::vector<bool> degenerate;
        Eigen::MatrixXd m;
        if (kind == CorrelationKind::pearson) {
            m = pearson_rows(returns.returns.middleCols(static_cast<Eigen::Index>(w.begin),
                                                        static_cast<Eigen::Index>(w.length())),
                             degenerate);
        } else {
            m = pearson_rows(with_index(returns, w), degenerate);
            degenerate.pop_back();
            m = relative_from_pearson(m, degenerate);
        }
        auto& meta = stack.epochs[static_cast<std::size_t>(e)];
        meta.epoch_id = static_cast<int>(e);
        meta.start = returns.return_dates[w.begin];
        meta.end = returns.return_dates[w.end - 1];
        for (std::size_t i = 0; i < n; ++i) {
            if (degenerate[i]) meta.degenerate.push_back(static_cast<std::uint32_t>(i));
        }
        auto row = stack.upper.row(e);
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = i + 1; j < m.cols(); ++j) row(k++) = m(i, j);
        }
    }
    return stack;
}

EpochStack stack_from(const std::vector<EpochCorrelation>& matrices) {
    if (matrices.empty()) throw DataError("no epoch matrices given");
    EpochStack stack;
    const auto n = static_cast<std::size_t>(matrices.front().matrix.rows());
    stack.kind = matrices.front().kind;
    for (std::size_t i = 0; i < n; ++i) stack.tickers.push_back("T" + std::to_string(i));
    stack.upper.resize(static_cast<Eigen::Index>(matrices.size()), static_cast<Eigen::Index>(upper_size(n)));
    for (std::size_t e = 0; e < matrices.size(); ++e) {
        const auto& m = matrices[e];
        if (static_cast<std::size_t>(m.matrix.rows()) != n) throw DataError("epoch matrices differ in size");
        stack.upper.row(static_cast<Eigen::Index>(e)) = upper_triangle(m.matrix).transpose();
        stack.epochs.push_back({m.epoch_id, m.start, m.end, {}});
    }
    return stack;
}

}  // namespace mstates
