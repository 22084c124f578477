#include "mstates/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "mstates/epoch_store.hpp"
#include "mstates/error.hpp"

namespace mstates {

namespace {

std::string hex(const unsigned char* data, unsigned len) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        s.push_back(digits[data[i] >> 4]);
        s.push_back(digits[data[i] & 0xF]);
    }
    return s;
}

struct Digest {
    Digest() : ctx(EVP_MD_CTX_new()) {
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) throw NumericError("sha256 init failed");
    }
    ~Digest() { EVP_MD_CTX_free(ctx); }
    Digest(const Digest&) = delete;
    Digest& operator=(const Digest&) = delete;

    void update(const void* p, std::size_t n) { EVP_DigestUpdate(ctx, p, n); }
    std::string finish() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned len = 0;
        EVP_DigestFinal_ex(ctx, md, &len);
        return hex(md, len);
    }

    EVP_MD_CTX* ctx;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    Digest d;
    d.update(bytes.data(), bytes.size());
    return d.finish();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    Digest d;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return d.finish();
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& stage) {
    const auto h = sha256_hex(stage + ":" + std::to_string(base));
    std::uint64_t out = 0;
    std::from_chars(h.data(), h.data() + 16, out, 16);
    return out;
}

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, p);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string to_string(ClusterMetric metric) { return metric == ClusterMetric::euclidean ? "euclidean" : "l1"; }

nlohmann::json summary_json(const StateSequence& seq, const std::vector<StateSummary>& report) {
    nlohmann::json j;
    j["k"] = seq.k;
    j["seed"] = seq.seed;
    j["best_seed"] = seq.best_seed;
    j["inertia"] = seq.inertia;
    j["iterations"] = seq.iterations;
    j["metric"] = to_string(seq.metric);
    j["state_avg_corr"] = seq.state_avg_corr;
    auto states = nlohmann::json::array();
    for (const auto& s : report) {
        nlohmann::json row;
        row["state"] = s.state;
        row["count"] = s.count;
        row["avg_corr"] = s.avg_corr;
        row["first_date"] = s.first_date ? s.first_date->iso() : "";
        row["last_date"] = s.last_date ? s.last_date->iso() : "";
        auto runs = nlohmann::json::array();
        for (const auto& r : s.runs) {
            nlohmann::json rj = {{"first_epoch", r.first}, {"last_epoch", r.last}};
            if (!seq.epoch_dates.empty()) {
                rj["start_date"] = seq.epoch_dates[r.first].iso();
                rj["end_date"] = seq.epoch_dates[r.last].iso();
            }
            runs.push_back(std::move(rj));
        }
        row["runs"] = std::move(runs);
        states.push_back(std::move(row));
    }
    j["states"] = std::move(states);
    return j;
}

void save_states(const std::filesystem::path& dir, const StateSequence& seq, const EpochStack& stack,
                 const nlohmann::json& extra) {
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    csv << "epoch_id,end_date,state_id\n";
    for (std::size_t e = 0; e < seq.labels.size(); ++e) {
        csv << stack.epochs[e].epoch_id << ',' << stack.epochs[e].end.iso() << ',' << seq.labels[e] << '\n';
    }
    write_text(dir / "states.csv", csv.str());

    const auto report = state_report(seq, stack);
    EpochStack cents;
    cents.tickers = stack.tickers;
    cents.kind = stack.kind;
    cents.spec = stack.spec;
    cents.upper = seq.centroids;
    for (const auto& s : report) {
        cents.epochs.push_back({s.state, s.first_date.value_or(Date{}), s.last_date.value_or(Date{}), {}});
    }
    write_epoch_store(dir / "centroids.epcm", cents);

    auto summary = summary_json(seq, report);
    summary["kind"] = to_string(stack.kind);
    summary["extra"] = extra;
    write_json(dir / "summary.json", summary);
}

SavedStates load_states(const std::filesystem::path& dir) {
    SavedStates out;
    const auto summary = read_json(dir / "summary.json");
    const auto cents = read_epoch_store(dir / "centroids.epcm");
    try {
        out.seq.k = summary.at("k").get<int>();
        out.seq.seed = summary.at("seed").get<std::uint64_t>();
        out.seq.best_seed = summary.at("best_seed").get<std::uint64_t>();
        out.seq.inertia = summary.at("inertia").get<double>();
        out.seq.iterations = summary.at("iterations").get<int>();
        out.seq.metric = summary.at("metric").get<std::string>() == "l1" ? ClusterMetric::l1 : ClusterMetric::euclidean;
        out.seq.state_avg_corr = summary.at("state_avg_corr").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError((dir / "summary.json").string() + ": " + e.what());
    }
    out.seq.centroids = cents.upper;
    out.tickers = cents.tickers;
    out.kind = cents.kind;
    out.spec = cents.spec;

    std::ifstream in(dir / "states.csv");
    if (!in) throw DataError("cannot read " + (dir / "states.csv").string());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) throw DataError("states.csv: malformed row");
        out.epoch_ids.push_back(std::stoi(line.substr(0, c1)));
        out.seq.epoch_dates.push_back(parse_date_or_throw(line.substr(c1 + 1, c2 - c1 - 1), "states.csv"));
        out.seq.labels.push_back(std::stoi(line.substr(c2 + 1)));
    }
    return out;
}

}  // namespace mstates
