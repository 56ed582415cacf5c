#pragma once

// File-driven scenario runner behind the CLI. Each scenario reads one
// JSON config, evaluates its checks, and emits a machine-readable
// summary.json plus a per-node/per-row series.csv. Everything is seeded
// and deterministic: identical configs produce byte-identical summaries
// (timestamp aside).

#include <string>

#include "json.hpp"

namespace gravqnd {

// exit statuses: 0 ok, 1 assertion failure, 2 config parse error,
// 3 domain/precondition error
struct RunResult {
    int status = 0;
    nlohmann::ordered_json summary;
    std::string series_csv;
    std::string summary_path;
    std::string series_path;
};

RunResult run_config(const nlohmann::ordered_json& config, bool write_files = true);
RunResult run_file(const std::string& config_path);

RunResult sweep_config(const nlohmann::ordered_json& config, const std::string& axis,
                       const std::vector<double>& values, bool write_files = true);
RunResult sweep_file(const std::string& config_path, const std::string& axis,
                     const std::vector<double>& values);

} // namespace gravqnd
