// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "lunar/report.hpp"

#include <fstream>
#include <sstream>

#include "lunar/errors.hpp"

namespace lunar {

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json stamped(nlohmann::json j, const Stamp& stamp) {
    j["config_hash"] = stamp.config_hash;
    j["seed"] = stamp.seed;
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot write " + path.string());
    }
    os << text;
    if (!os) {
        throw IoError("write failed for " + path.string());
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, json_text(j)); }

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot read " + path.string());
    }
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string csv_field(const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
        return f;
    }
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_text(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out += ',';
            }
            out += csv_field(row[i]);
        }
        out += "\r\n";
    }
    return out;
}

std::vector<std::vector<std::string>> stamp_rows(std::vector<std::vector<std::string>> rows, const Stamp& stamp) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == 0) {
            rows[i].push_back("config_hash");
            rows[i].push_back("seed");
        } else {
            rows[i].push_back(stamp.config_hash);
            rows[i].push_back(std::to_string(stamp.seed));
        }
    }
    return rows;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::vector<std::string>>& rows) {
    write_text(path, csv_text(rows));
}

}  // namespace lunar
