#pragma once

// Little-endian binary store for packed correlation matrices:
//
//   header:    "EPCM" | version u32 | N u32 | epoch_count u32 | kind u8
//   per epoch: epoch_id u32 | start i32 | end i32 | N(N-1)/2 x f64
//
// Dates are days since 1970-01-01. The JSON sidecar (<file>.json) carries
// tickers, epoch dates, the epoch spec and per-epoch degenerate tickers.

#include <filesystem>

#include <json.hpp>

#include "mstates/correlation.hpp"

namespace mstates {

inline constexpr std::uint32_t kEpochStoreVersion = 1;

/// Writes `path` and its sidecar `path + ".json"`. `extra` is merged into the
/// sidecar under the key "extra".
void write_epoch_store(const std::filesystem::path& path, const EpochStack& stack,
                       const nlohmann::json& extra = nlohmann::json::object());

/// Reads a store and its sidecar. Throws DataError on a malformed file.
EpochStack read_epoch_store(const std::filesystem::path& path);

nlohmann::json read_sidecar(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace mstates
