#include "mstates/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mstates/error.hpp"

namespace mstates {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

Date parse_config_date(const std::string& key, const std::string& v) {
    auto d = parse_date(v);
    if (!d) throw ConfigError(key + ": malformed date '" + v + "'");
    return *d;
}

std::vector<int> parse_k_values(const std::string& v) {
    std::vector<int> out;
    for (const auto& part : split(v, ',')) {
        const auto dash = part.find('-', 1);
        if (dash != std::string::npos) {
            const int lo = parse_number<int>("k_values", trim(part.substr(0, dash)));
            const int hi = parse_number<int>("k_values", trim(part.substr(dash + 1)));
            if (hi < lo) throw ConfigError("k_values: empty range '" + part + "'");
            for (int k = lo; k <= hi; ++k) out.push_back(k);
        } else {
            out.push_back(parse_number<int>("k_values", part));
        }
    }
    if (out.empty()) throw ConfigError("k_values: empty list");
    return out;
}

std::vector<NamedPeriod> parse_periods(const std::string& v) {
    std::vector<NamedPeriod> out;
    for (const auto& part : split(v, ',')) {
        const auto bits = split(part, ':');
        if (bits.size() != 3) throw ConfigError("periods: expected name:start:end, got '" + part + "'");
        out.push_back({bits[0], {parse_config_date("periods", bits[1]), parse_config_date("periods", bits[2])}});
    }
    return out;
}

std::string metric_name(ClusterMetric m) { return m == ClusterMetric::euclidean ? "euclidean" : "l1"; }

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
    std::string name;
    Setter set;
    Getter get;
};

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        {"data_dir", [](RunConfig& c, const std::string& v) { c.data_dir = v; },
         [](const RunConfig& c) { return c.data_dir.string(); }},
        {"index_ticker", [](RunConfig& c, const std::string& v) { c.index_ticker = v; },
         [](const RunConfig& c) { return c.index_ticker; }},
        {"horizon_start", [](RunConfig& c, const std::string& v) { c.horizon.start = parse_config_date("horizon_start", v); },
         [](const RunConfig& c) { return c.horizon.start.iso(); }},
        {"horizon_end", [](RunConfig& c, const std::string& v) { c.horizon.end = parse_config_date("horizon_end", v); },
         [](const RunConfig& c) { return c.horizon.end.iso(); }},
        {"epoch_length", [](RunConfig& c, const std::string& v) { c.epoch.length = parse_number<int>("epoch_length", v); },
         [](const RunConfig& c) { return std::to_string(c.epoch.length); }},
        {"epoch_shift", [](RunConfig& c, const std::string& v) { c.epoch.shift = parse_number<int>("epoch_shift", v); },
         [](const RunConfig& c) { return std::to_string(c.epoch.shift); }},
        {"correlation_kind",
         [](RunConfig& c, const std::string& v) {
             if (v == "both") {
                 c.kinds = {CorrelationKind::pearson, CorrelationKind::relative};
             } else {
                 c.kinds = {parse_kind(v)};
             }
         },
         [](const RunConfig& c) { return kind_list(c.kinds); }},
        {"k_values", [](RunConfig& c, const std::string& v) { c.k_values = parse_k_values(v); },
         [](const RunConfig& c) { return join_ints(c.k_values); }},
        {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        {"restarts", [](RunConfig& c, const std::string& v) { c.restarts = parse_number<int>("restarts", v); },
         [](const RunConfig& c) { return std::to_string(c.restarts); }},
        {"max_iterations",
         [](RunConfig& c, const std::string& v) { c.max_iterations = parse_number<int>("max_iterations", v); },
         [](const RunConfig& c) { return std::to_string(c.max_iterations); }},
        {"cluster_metric",
         [](RunConfig& c, const std::string& v) {
             if (v == "euclidean") c.cluster_metric = ClusterMetric::euclidean;
             else if (v == "l1") c.cluster_metric = ClusterMetric::l1;
             else throw ConfigError("cluster_metric: expected euclidean or l1, got '" + v + "'");
         },
         [](const RunConfig& c) { return metric_name(c.cluster_metric); }},
        {"bins", [](RunConfig& c, const std::string& v) { c.bins = parse_number<int>("bins", v); },
         [](const RunConfig& c) { return std::to_string(c.bins); }},
        {"periods", [](RunConfig& c, const std::string& v) { c.periods = parse_periods(v); },
         [](const RunConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.periods.size(); ++i) {
                 const auto& p = c.periods[i];
                 s += (i ? "," : "") + p.name + ":" + p.range.start.iso() + ":" + p.range.end.iso();
             }
             return s;
         }},
        {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
         [](const RunConfig& c) { return c.output_dir.string(); }},
        {"mds", [](RunConfig& c, const std::string& v) { c.mds = parse_bool("mds", v); },
         [](const RunConfig& c) { return std::string(c.mds ? "true" : "false"); }},
        {"mds_metric", [](RunConfig& c, const std::string& v) { c.mds_metric = parse_distance_metric(v); },
         [](const RunConfig& c) { return to_string(c.mds_metric); }},
        {"mds_kind", [](RunConfig& c, const std::string& v) { c.mds_kind = parse_kind(v); },
         [](const RunConfig& c) { return to_string(c.mds_kind); }},
        {"mds_k", [](RunConfig& c, const std::string& v) { c.mds_k = parse_number<int>("mds_k", v); },
         [](const RunConfig& c) { return std::to_string(c.mds_k); }},
        {"mds_dims", [](RunConfig& c, const std::string& v) { c.mds_dims = parse_number<int>("mds_dims", v); },
         [](const RunConfig& c) { return std::to_string(c.mds_dims); }},
        {"ck_threshold", [](RunConfig& c, const std::string& v) { c.ck_threshold = parse_number<double>("ck_threshold", v); },
         [](const RunConfig& c) { return fmt_double(c.ck_threshold); }},
        {"tv_threshold", [](RunConfig& c, const std::string& v) { c.tv_threshold = parse_number<double>("tv_threshold", v); },
         [](const RunConfig& c) { return fmt_double(c.tv_threshold); }},
        {"threads", [](RunConfig& c, const std::string& v) { c.threads = parse_number<int>("threads", v); },
         [](const RunConfig& c) { return std::to_string(c.threads); }},
        {"cache", [](RunConfig& c, const std::string& v) { c.cache = parse_bool("cache", v); },
         [](const RunConfig& c) { return std::string(c.cache ? "true" : "false"); }},
    };
    return table;
}

}  // namespace

std::string kind_list(const std::vector<CorrelationKind>& kinds) {
    if (kinds.size() == 2) return "both";
    return kinds.empty() ? "" : to_string(kinds.front());
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : keys()) out.push_back(k.name);
    return out;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = keys();
    auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->set(cfg, trim(value));
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        }
        apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

void validate(const RunConfig& cfg) {
    if (!(cfg.horizon.start < cfg.horizon.end)) throw ConfigError("horizon_start must precede horizon_end");
    cfg.epoch.validate();
    if (cfg.kinds.empty()) throw ConfigError("correlation_kind is empty");
    if (cfg.k_values.empty()) throw ConfigError("k_values is empty");
    for (int k : cfg.k_values) {
        if (k < 1) throw ConfigError("k_values must all be >= 1 (got " + std::to_string(k) + ")");
    }
    if (cfg.restarts < 1) throw ConfigError("restarts must be >= 1");
    if (cfg.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (cfg.bins < 2) throw ConfigError("bins must be >= 2");
    for (const auto& p : cfg.periods) {
        if (!(p.range.start < p.range.end)) throw ConfigError("period '" + p.name + "' is empty");
    }
    if (cfg.mds) {
        if (cfg.mds_dims < 1) throw ConfigError("mds_dims must be >= 1");
        if (std::find(cfg.k_values.begin(), cfg.k_values.end(), cfg.mds_k) == cfg.k_values.end()) {
            throw ConfigError("mds_k must be one of k_values");
        }
        if (std::find(cfg.kinds.begin(), cfg.kinds.end(), cfg.mds_kind) == cfg.kinds.end()) {
            throw ConfigError("mds_kind must be one of the computed correlation kinds");
        }
    }
    if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
    if (cfg.index_ticker.empty()) throw ConfigError("index_ticker is empty");
}

std::string canonical_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& k : keys()) out += k.name + " = " + k.get(cfg) + "\n";
    return out;
}

}  // namespace mstates
