#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mstates/clustering.hpp"
#include "mstates/config.hpp"
#include "mstates/correlation.hpp"
#include "mstates/ingest.hpp"

namespace mstates {

struct StageRecord {
    std::string name;
    double seconds = 0.0;
    bool cached = false;
};

struct RunReport {
    std::filesystem::path output_dir;
    std::string config_hash;
    std::vector<StageRecord> stages;
    std::map<std::string, std::string> checksums;  // bundle-relative path -> sha256
};

/// Stage-by-stage driver. Each public stage runs its prerequisites on demand,
/// reusing cached stores under <output_dir>/cache when `cache` is enabled and
/// the cache key (input data digest + relevant settings) matches.
///
/// Bundle layout:
///   ingest_manifest.json
///   fig1_states.csv fig3_transitions.csv fig3_diagnostics.json
///   fig4_histograms.csv fig5_pr.csv eigenvalues_top10.csv fig6_moments.json
///   figS3_mds.csv mds.json manifest.json
///   <kind>/k<k>/{states.csv, centroids.epcm, summary.json, transitions.csv, diagnostics.json}
///   cache/<kind>.epcm (+ .json sidecar)
class Pipeline {
public:
    explicit Pipeline(RunConfig config);

    const RunConfig& config() const { return cfg_; }

    const PriceTable& ingest();
    const ReturnsMatrix& returns();
    const EpochStack& correlations(CorrelationKind kind);
    const StateSequence& states(CorrelationKind kind, int k);

    void correlate();
    void cluster();
    void transitions();
    void spectra();
    void histograms();
    void mds();

    /// Writes manifest.json over everything currently in the bundle.
    RunReport finish();

    /// All stages, then finish().
    RunReport report();

    const std::vector<StageRecord>& stages() const { return stages_; }

private:
    template <typename F>
    void run_stage(const std::string& name, F&& body);

    const std::string& data_digest();
    std::string correlation_key(CorrelationKind kind);
    std::string states_key(CorrelationKind kind, int k);
    std::filesystem::path states_dir(CorrelationKind kind, int k) const;

    RunConfig cfg_;
    std::optional<std::string> data_digest_;
    std::optional<PriceTable> prices_;
    std::optional<ReturnsMatrix> returns_;
    std::map<CorrelationKind, EpochStack> stacks_;
    std::map<std::pair<CorrelationKind, int>, StateSequence> states_;
    std::vector<StageRecord> stages_;
    std::vector<std::string> done_;
};

RunReport run_pipeline(const RunConfig& config);

/// Serializes a run report as the manifest document.
std::string manifest_text(const RunConfig& cfg, const RunReport& report);

}  // namespace mstates
