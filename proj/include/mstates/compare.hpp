#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "mstates/clustering.hpp"
#include "mstates/io.hpp"

namespace mstates {

struct StateMatch {
    int state_b = 0;
    int nearest_a = 0;
    double distance = 0.0;  // Euclidean distance between centroids
    bool mutual = false;    // state_b is also the nearest b-state of nearest_a
};

struct NewStateSpan {
    int state_b = 0;
    std::size_t epochs = 0;       // epochs labelled state_b in run b
    std::size_t first_epoch = 0;  // dominant span, after merging short gaps
    std::size_t last_epoch = 0;
    Date onset;
    Date offset;
    std::vector<LabelRun> runs;
};

struct AlignmentReport {
    std::vector<StateMatch> matches;
    std::vector<NewStateSpan> new_states;
    std::size_t overlap_epochs = 0;
    Date overlap_start;
    Date overlap_end;
};

struct CompareOptions {
    std::size_t merge_gap = 20;  // runs separated by at most this many epochs form one span
};

/// Aligns the states of run b to run a by mutual nearest centroid. States of
/// b without a mutual partner are reported as new, with their dominant span.
/// Throws DataError when the runs use different tickers or epoch specs, or
/// when their epoch ranges do not overlap.
AlignmentReport compare_states(const SavedStates& a, const SavedStates& b, const CompareOptions& options = {});

nlohmann::json to_json(const AlignmentReport& report);

}  // namespace mstates
