#pragma once

// File helpers shared by the pipeline stages: digests, number formatting and
// the on-disk form of a clustering run.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mstates/clustering.hpp"
#include "mstates/correlation.hpp"

namespace mstates {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// 64-bit seed for a named stage: the first eight bytes of
/// sha256("<stage>:<base>") read big-endian.
std::uint64_t derive_seed(std::uint64_t base, const std::string& stage);

/// Shortest round-tripping decimal form.
std::string fmt(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

std::string to_string(ClusterMetric metric);

/// A clustering run on disk: states.csv (epoch_id,end_date,state_id),
/// centroids.epcm (+ sidecar) and summary.json.
struct SavedStates {
    StateSequence seq;
    std::vector<std::string> tickers;
    CorrelationKind kind = CorrelationKind::pearson;
    EpochSpec spec;
    std::vector<int> epoch_ids;
};

void save_states(const std::filesystem::path& dir, const StateSequence& seq, const EpochStack& stack,
                 const nlohmann::json& extra = nlohmann::json::object());
SavedStates load_states(const std::filesystem::path& dir);

nlohmann::json summary_json(const StateSequence& seq, const std::vector<StateSummary>& report);

}  // namespace mstates
