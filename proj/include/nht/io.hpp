#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nht/fss.hpp"
#include "nht/stats.hpp"
#include "nht/symmetry.hpp"

namespace nht {

inline constexpr const char* kCsvSchema = "nht-csv-1";
inline constexpr const char* kJsonSchema = "nht-json-1";

/// Writes to path + ".tmp" and renames over path, creating parent directories.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Shortest-safe round-trip decimal: always 17 significant digits.
std::string fmt17(double x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t x);

/// First line "# <schema> config_hash=<hex>", then a header row.
std::string csv_preamble(std::uint64_t config_hash, const std::string& header);

/// Dataset CSV with columns L,W,gamma_obs,sigma. Comment lines start with '#'.
std::string dataset_csv(const FssDataset& data, std::uint64_t config_hash);
/// Reads a dataset CSV; the config hash from the preamble is returned through hash (0 if absent).
FssDataset read_dataset_csv(const std::string& path, std::uint64_t* hash = nullptr);

std::string fit_json(const FitResult& fit, std::uint64_t config_hash);
std::string histogram_json(const Histogram& h, const GaussianFit* gauss, std::uint64_t config_hash);
std::string report_json_line(const SymmetryReport& r, std::uint64_t config_hash);

}  // namespace nht
