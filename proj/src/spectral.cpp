#include "mstates/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "mstates/error.hpp"

namespace mstates {

EpochSpectrum spectrum(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw NumericError("spectrum: matrix must be square and nonempty");
    if (!m.allFinite()) throw NumericError("spectrum: non-finite matrix entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw NumericError("spectrum: eigendecomposition failed");

    const Eigen::Index n = m.rows();
    EpochSpectrum s;
    s.eigenvalues = solver.eigenvalues().reverse();
    s.eigenvectors = solver.eigenvectors().rowwise().reverse();
    s.top_eigenvector = s.eigenvectors.col(0);
    s.top_eigenvector.normalize();
    if (s.top_eigenvector.sum() < 0.0) s.top_eigenvector = -s.top_eigenvector;
    s.pr_top = participation_ratio(s.top_eigenvector);
    s.degenerate = n > 1 && s.eigenvalues(0) - s.eigenvalues(1) <= kDegenerateGap;
    return s;
}

EpochSpectrum spectrum(const EpochCorrelation& m) {
    auto s = spectrum(m.matrix);
    s.epoch_id = m.epoch_id;
    s.end = m.end;
    s.kind = m.kind;
    return s;
}

double inverse_participation_ratio(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double norm = v.norm();
    if (!(std::abs(norm - 1.0) <= 1e-10)) throw NumericError("participation ratio needs a unit vector");
    return v.array().square().square().sum();
}

double participation_ratio(const Eigen::Ref<const Eigen::VectorXd>& v) { return 1.0 / inverse_participation_ratio(v); }

std::vector<PrPoint> pr_series(const std::vector<EpochCorrelation>& matrices) {
    if (matrices.empty()) throw DataError("pr_series: no matrices");
    std::vector<PrPoint> out;
    out.reserve(matrices.size());
    for (const auto& m : matrices) {
        const auto s = spectrum(m);
        out.push_back({m.epoch_id, m.end, s.pr_top, s.degenerate, s.eigenvalues(0)});
    }
    return out;
}

std::vector<PrPoint> pr_series(const EpochStack& stack, std::vector<Eigen::VectorXd>* leading, int n_leading) {
    if (stack.size() == 0) throw DataError("pr_series: no matrices");
    const auto count = static_cast<std::ptrdiff_t>(stack.size());
    std::vector<PrPoint> out(stack.size());
    if (leading) leading->assign(stack.size(), {});
    bool failed = false;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t e = 0; e < count; ++e) {
        const auto& meta = stack.epochs[static_cast<std::size_t>(e)];
        try {
            const auto s = spectrum(from_upper_triangle(stack.upper.row(e), stack.n_tickers()));
            out[static_cast<std::size_t>(e)] = {meta.epoch_id, meta.end, s.pr_top, s.degenerate, s.eigenvalues(0)};
            if (leading) {
                const auto m = std::min<Eigen::Index>(n_leading, s.eigenvalues.size());
                (*leading)[static_cast<std::size_t>(e)] = s.eigenvalues.head(m);
            }
        } catch (const NumericError&) {
#pragma omp atomic write
            failed = true;
        }
    }
    if (failed) throw NumericError("pr_series: eigendecomposition failed for at least one epoch");
    return out;
}

Moments moments(std::span<const double> sample) {
    if (sample.empty()) throw DataError("moments: empty sample");
    Moments m;
    m.count = sample.size();
    const double n = static_cast<double>(sample.size());
    double sum = 0.0;
    for (double x : sample) sum += x;
    m.mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : sample) {
        const double d = x - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.variance = m2;
    // Spread below rounding noise of the mean counts as constant.
    if (m2 > 0.0 && std::sqrt(m2) > 1e-14 * std::max(1.0, std::abs(m.mean))) {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

Moments pr_period_moments(const std::vector<PrPoint>& series, DateRange period) {
    std::vector<double> values;
    for (const auto& p : series) {
        if (p.end_date >= period.start && p.end_date < period.end) values.push_back(p.pr_top);
    }
    if (values.empty()) {
        throw DataError("pr_period_moments: no epochs end in " + period.start.iso() + " .. " + period.end.iso());
    }
    return moments(values);
}

std::vector<double> histogram_edges(int bins) {
    if (bins < 2) throw ConfigError("histogram needs at least 2 bins");
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (int j = 0; j <= bins; ++j) edges[static_cast<std::size_t>(j)] = -1.0 + 2.0 * j / bins;
    edges.back() = 1.0;
    return edges;
}

ElementHistogram element_histogram(std::span<const double> entries, int bins, int epoch_id) {
    ElementHistogram h;
    h.epoch_id = epoch_id;
    h.bin_edges = histogram_edges(bins);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const auto& edges = h.bin_edges;
    for (double x : entries) {
        const double c = std::clamp(x, -1.0, 1.0);
        auto j = static_cast<int>(std::floor((c + 1.0) * 0.5 * bins));
        j = std::clamp(j, 0, bins - 1);
        // Snap to the exact edge comparison so results agree with [e_j, e_{j+1}).
        while (j > 0 && c < edges[static_cast<std::size_t>(j)]) --j;
        while (j < bins - 1 && c >= edges[static_cast<std::size_t>(j) + 1]) ++j;
        ++h.counts[static_cast<std::size_t>(j)];
    }
    if (!entries.empty()) h.moments = moments(entries);
    return h;
}

ElementHistogram element_histogram(const EpochCorrelation& m, int bins) {
    const Eigen::VectorXd upper = upper_triangle(m.matrix);
    return element_histogram(std::span<const double>(upper.data(), static_cast<std::size_t>(upper.size())), bins,
                             m.epoch_id);
}

}  // namespace mstates
