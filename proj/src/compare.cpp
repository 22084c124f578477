#include "mstates/compare.hpp"

#include <algorithm>
#include <limits>

#include "mstates/error.hpp"

namespace mstates {

namespace {

int nearest_row(const FeatureMatrix& rows, const Eigen::Ref<const Eigen::RowVectorXd>& x, double* dist) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index s = 0; s < rows.rows(); ++s) {
        const double d = (rows.row(s) - x).norm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(s);
        }
    }
    if (dist) *dist = best_d;
    return best;
}

}  // namespace

AlignmentReport compare_states(const SavedStates& a, const SavedStates& b, const CompareOptions& options) {
    if (a.tickers != b.tickers) throw DataError("compare_states: runs use different ticker universes");
    if (a.spec.length != b.spec.length || a.spec.shift != b.spec.shift) {
        throw DataError("compare_states: runs use different epoch specs");
    }
    if (a.kind != b.kind) throw DataError("compare_states: runs use different correlation kinds");
    const auto& da = a.seq.epoch_dates;
    const auto& db = b.seq.epoch_dates;
    if (da.empty() || db.empty()) throw DataError("compare_states: empty run");
    AlignmentReport rep;
    rep.overlap_start = std::max(da.front(), db.front());
    rep.overlap_end = std::min(da.back(), db.back());
    if (rep.overlap_end < rep.overlap_start) throw DataError("compare_states: disjoint horizons");
    rep.overlap_epochs = static_cast<std::size_t>(
        std::count_if(db.begin(), db.end(), [&](Date d) { return d >= rep.overlap_start && d <= rep.overlap_end; }));

    const auto& ca = a.seq.centroids;
    const auto& cb = b.seq.centroids;
    if (ca.cols() != cb.cols()) throw DataError("compare_states: centroid dimensions differ");
    for (Eigen::Index s = 0; s < cb.rows(); ++s) {
        StateMatch m;
        m.state_b = static_cast<int>(s) + 1;
        const int na = nearest_row(ca, cb.row(s), &m.distance);
        m.nearest_a = na + 1;
        m.mutual = nearest_row(cb, ca.row(na), nullptr) == static_cast<int>(s);
        rep.matches.push_back(m);
    }

    for (const auto& m : rep.matches) {
        if (m.mutual) continue;
        NewStateSpan span;
        span.state_b = m.state_b;
        span.runs = label_runs(b.seq.labels, m.state_b);
        if (span.runs.empty()) continue;
        for (const auto& r : span.runs) span.epochs += r.last - r.first + 1;

        // Merge runs across short gaps and keep the span holding most members.
        struct Span {
            std::size_t first, last, members;
        };
        std::vector<Span> merged;
        for (const auto& r : span.runs) {
            const std::size_t n = r.last - r.first + 1;
            if (!merged.empty() && r.first - merged.back().last - 1 <= options.merge_gap) {
                merged.back().last = r.last;
                merged.back().members += n;
            } else {
                merged.push_back({r.first, r.last, n});
            }
        }
        const auto best = std::max_element(merged.begin(), merged.end(),
                                           [](const Span& x, const Span& y) { return x.members < y.members; });
        span.first_epoch = best->first;
        span.last_epoch = best->last;
        span.onset = db[best->first];
        span.offset = db[best->last];
        rep.new_states.push_back(std::move(span));
    }
    return rep;
}

nlohmann::json to_json(const AlignmentReport& report) {
    nlohmann::json j;
    j["overlap_epochs"] = report.overlap_epochs;
    j["overlap_start"] = report.overlap_start.iso();
    j["overlap_end"] = report.overlap_end.iso();
    auto matches = nlohmann::json::array();
    for (const auto& m : report.matches) {
        matches.push_back(
            {{"state_b", m.state_b}, {"nearest_a", m.nearest_a}, {"distance", m.distance}, {"mutual", m.mutual}});
    }
    j["matches"] = std::move(matches);
    auto fresh = nlohmann::json::array();
    for (const auto& s : report.new_states) {
        nlohmann::json runs = nlohmann::json::array();
        for (const auto& r : s.runs) runs.push_back({r.first, r.last});
        fresh.push_back({{"state_b", s.state_b},
                         {"epochs", s.epochs},
                         {"onset", s.onset.iso()},
                         {"offset", s.offset.iso()},
                         {"first_epoch", s.first_epoch},
                         {"last_epoch", s.last_epoch},
                         {"runs", runs}});
    }
    j["new_states"] = std::move(fresh);
    return j;
}

}  // namespace mstates
