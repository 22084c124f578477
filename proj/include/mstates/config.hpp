#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mstates/clustering.hpp"
#include "mstates/correlation.hpp"
#include "mstates/date.hpp"
#include "mstates/mds.hpp"

namespace mstates {

struct NamedPeriod {
    std::string name;
    DateRange range;  // [start, end)
};

/// Every field is addressable as `key = value` in a config file and as
/// `--key value` on the command line. Keys are listed by config_keys().
struct RunConfig {
    std::filesystem::path data_dir = "data";
    std::string index_ticker = "^GSPC";
    DateRange horizon{Date::ymd(2006, 1, 3), Date::ymd(2023, 8, 10)};
    EpochSpec epoch;
    std::vector<CorrelationKind> kinds{CorrelationKind::pearson};
    std::vector<int> k_values{5, 6};
    std::uint64_t seed = 20240101;
    int restarts = 100;
    int max_iterations = 500;
    ClusterMetric cluster_metric = ClusterMetric::euclidean;
    int bins = 201;
    std::vector<NamedPeriod> periods{
        {"noncalm", {Date::ymd(2013, 1, 1), Date::ymd(2014, 6, 1)}},
        {"calm", {Date::ymd(2017, 1, 1), Date::ymd(2018, 1, 1)}},
        {"covid", {Date::ymd(2020, 6, 1), Date::ymd(2022, 9, 1)}},
    };
    std::filesystem::path output_dir = "out";
    bool mds = true;
    DistanceMetric mds_metric = DistanceMetric::l1_mean;
    CorrelationKind mds_kind = CorrelationKind::pearson;
    int mds_k = 5;
    int mds_dims = 3;
    double ck_threshold = 0.05;
    double tv_threshold = 0.05;
    int threads = 0;  // 0 = library default
    bool cache = true;
};

std::vector<std::string> config_keys();

/// Sets one key from its text form. Throws ConfigError on unknown keys or
/// unparseable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads `key = value` lines; '#' starts a comment.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Throws ConfigError if any field is out of range.
void validate(const RunConfig& cfg);

/// One `key = value` line per key in config_keys() order.
std::string canonical_text(const RunConfig& cfg);

std::string kind_list(const std::vector<CorrelationKind>& kinds);

}  // namespace mstates
