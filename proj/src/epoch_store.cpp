#include "mstates/epoch_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "mstates/error.hpp"

namespace mstates {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::ostream& out, T value) {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& where) {
    std::array<unsigned char, sizeof(T)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw DataError(where + ": truncated epoch store");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    auto p = path;
    p += ".json";
    return p;
}

void write_epoch_store(const std::filesystem::path& path, const EpochStack& stack, const nlohmann::json& extra) {
    const auto n = stack.n_tickers();
    const auto width = upper_size(n);
    if (static_cast<std::size_t>(stack.upper.cols()) != width ||
        static_cast<std::size_t>(stack.upper.rows()) != stack.size()) {
        throw DataError("write_epoch_store: packed matrix does not match tickers/epochs");
    }
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + path.string());
        out.write("EPCM", 4);
        put<std::uint32_t>(out, kEpochStoreVersion);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(n));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(stack.size()));
        put<std::uint8_t>(out, static_cast<std::uint8_t>(stack.kind));
        for (std::size_t e = 0; e < stack.size(); ++e) {
            const auto& m = stack.epochs[e];
            put<std::uint32_t>(out, static_cast<std::uint32_t>(m.epoch_id));
            put<std::int32_t>(out, m.start.days_since_epoch());
            put<std::int32_t>(out, m.end.days_since_epoch());
            const auto row = stack.upper.row(static_cast<Eigen::Index>(e));
            if constexpr (std::endian::native == std::endian::little) {
                out.write(reinterpret_cast<const char*>(row.data()),
                          static_cast<std::streamsize>(width * sizeof(double)));
            } else {
                for (Eigen::Index k = 0; k < row.size(); ++k) put<double>(out, row(k));
            }
        }
        if (!out) throw DataError("write failed: " + path.string());
    }

    nlohmann::json side;
    side["format"] = "EPCM";
    side["version"] = kEpochStoreVersion;
    side["kind"] = to_string(stack.kind);
    side["tickers"] = stack.tickers;
    side["epoch"] = {{"length", stack.spec.length}, {"shift", stack.spec.shift}};
    auto epochs = nlohmann::json::array();
    for (const auto& m : stack.epochs) {
        nlohmann::json e = {{"epoch_id", m.epoch_id}, {"start", m.start.iso()}, {"end", m.end.iso()}};
        if (!m.degenerate.empty()) e["degenerate"] = m.degenerate;
        epochs.push_back(std::move(e));
    }
    side["epochs"] = std::move(epochs);
    side["extra"] = extra;
    std::ofstream js(sidecar_path(path), std::ios::trunc);
    if (!js) throw DataError("cannot write " + sidecar_path(path).string());
    js << side.dump(1) << '\n';
}

nlohmann::json read_sidecar(const std::filesystem::path& path) {
    std::ifstream in(sidecar_path(path));
    if (!in) throw DataError("missing sidecar " + sidecar_path(path).string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(sidecar_path(path).string() + ": " + e.what());
    }
}

EpochStack read_epoch_store(const std::filesystem::path& path) {
    const std::string where = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + where);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "EPCM", 4) != 0) throw DataError(where + ": bad magic");
    const auto version = get<std::uint32_t>(in, where);
    if (version != kEpochStoreVersion) throw DataError(where + ": unsupported version " + std::to_string(version));
    const auto n = get<std::uint32_t>(in, where);
    const auto count = get<std::uint32_t>(in, where);
    const auto kind = get<std::uint8_t>(in, where);
    if (kind > 1) throw DataError(where + ": unknown kind byte");

    EpochStack stack;
    stack.kind = static_cast<CorrelationKind>(kind);
    const auto width = upper_size(n);
    stack.upper.resize(count, static_cast<Eigen::Index>(width));
    stack.epochs.resize(count);
    for (std::uint32_t e = 0; e < count; ++e) {
        auto& m = stack.epochs[e];
        m.epoch_id = static_cast<int>(get<std::uint32_t>(in, where));
        m.start = Date::from_days(get<std::int32_t>(in, where));
        m.end = Date::from_days(get<std::int32_t>(in, where));
        auto row = stack.upper.row(e);
        for (Eigen::Index k = 0; k < row.size(); ++k) row(k) = get<double>(in, where);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError(where + ": trailing bytes");

    const auto side = read_sidecar(path);
    try {
        stack.tickers = side.at("tickers").get<std::vector<std::string>>();
        stack.spec.length = side.at("epoch").at("length").get<int>();
        stack.spec.shift = side.at("epoch").at("shift").get<int>();
        const auto& eps = side.at("epochs");
        if (eps.size() != count) throw DataError(where + ": sidecar epoch count mismatch");
        for (std::uint32_t e = 0; e < count; ++e) {
            if (eps[e].contains("degenerate")) {
                stack.epochs[e].degenerate = eps[e]["degenerate"].get<std::vector<std::uint32_t>>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(where + ": bad sidecar: " + e.what());
    }
    if (stack.tickers.size() != n) throw DataError(where + ": sidecar ticker count mismatch");
    return stack;
}

}  // namespace mstates
