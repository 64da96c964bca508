// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Artifact writers: key-sorted JSON and RFC-4180 CSV, each stamped with the
// config hash and seed.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace lunar {

struct Stamp {
    std::string config_hash;
    std::uint64_t seed = 0;
};

// Two-space indented, keys sorted, trailing newline.
std::string json_text(const nlohmann::json& j);
// Adds "config_hash" and "seed" to an object payload.
nlohmann::json stamped(nlohmann::json j, const Stamp& stamp);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Quotes fields containing a comma, quote, CR or LF; doubles embedded quotes;
// CRLF record separators.
std::string csv_field(const std::string& field);
std::string csv_text(const std::vector<std::vector<std::string>>& rows);
// Appends config_hash and seed columns (header row gets the names).
std::vector<std::vector<std::string>> stamp_rows(std::vector<std::vector<std::string>> rows, const Stamp& stamp);
void write_csv(const std::filesystem::path& path, const std::vector<std::vector<std::string>>& rows);

// Writes text exactly; throws IoError naming the path.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lunar
