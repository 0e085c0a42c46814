#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcf/profiles.hpp"

namespace mcf::cli {

// One experiment invocation: global settings plus a flat subcommand-specific
// parameter record. Serializes to canonical JSON (sorted params, shortest
// round-trip floats) so parse(serialize(c)) == c holds byte-for-byte and the
// config hash is stable. Unknown fields are rejected on parse.
struct RunConfig {
    std::string version = "1";
    std::string subcommand;
    std::string out = ".";
    double tol = 0.0;  // 0 = subcommand default
    bool seedless = false;
    // values are doubles, strings, bools, or double lists (as "a,b,c")
    std::map<std::string, std::string> params;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_run_config(const std::string& json_text);
std::string serialize_run_config(const RunConfig& c);

// manifest.json written next to every run's outputs; wall time is metadata
// only and never enters data files or the report
struct ManifestEntry {
    std::string path;
    std::string fnv1a;
};

struct RunManifest {
    std::string version = "1";
    std::string config_hash;
    long long wall_time_ms = 0;
    RunConfig config;
    std::vector<ManifestEntry> files;
};

std::string serialize_manifest(const RunManifest& m);
RunManifest parse_manifest(const std::string& json_text);

// parses argv (without the program name), runs the subcommand, writes outputs
// plus manifest.json under the output directory; returns the process exit
// code: 0 success, 1 domain error, 2 usage error
int dispatch(const std::vector<std::string>& args);

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string status;  // "pass", "fail", "skipped"
    std::string detail;
};

struct AcceptanceReport {
    std::vector<CriterionResult> criteria;
    std::vector<std::string> integrity_errors;
    std::size_t runs = 0;
    bool all_pass = false;
};

// loads the manifests under the given run directories, re-verifies every
// checksum, and evaluates the acceptance table against the stored outputs
AcceptanceReport evaluate_acceptance(const std::vector<std::string>& run_dirs);

std::string acceptance_report_json(const AcceptanceReport& r);
std::string acceptance_report_text(const AcceptanceReport& r);

}  // namespace mcf::cli
