// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ptest/core_types.hpp"

namespace ptest {

/// Input error carrying a file/line/field diagnostic.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BundleObjective {
    std::string id;
    bool controlled = false;
    std::optional<double> alpha;  // default bound for controlled objectives
};

struct Bundle {
    LossTable table;
    std::vector<BundleObjective> objectives;
};

/// 17 significant digits, shortest form that still round-trips.
std::string format_number(double v);

/// FNV-1a 64 of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Writes manifest.json plus <id>.csv per objective into `dir` (created if needed).
void write_bundle(const std::filesystem::path& dir, const LossTable& table,
                  const std::vector<BundleObjective>& objectives);

/// Reads and verifies a bundle. Throws InputError naming the file and line.
Bundle read_bundle(const std::filesystem::path& dir);

/// Reads a JSON file, throwing InputError with the path on failure.
json read_json_file(const std::filesystem::path& path);

}  // namespace ptest
