#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "shelab/experiments.hpp"

namespace shelab {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Parsed, schema-validated run configuration. Sections: model, scheme,
/// study, output, seed. Unknown keys are rejected; missing keys take the
/// documented defaults before hashing, so the hash identifies the resolved
/// configuration regardless of key order or omission.
struct RunConfig {
    nlohmann::json resolved; // defaults filled in, keys sorted

    ModelSpec model;
    SchemeConfig scheme;

    std::string study_kind; // weak | density | affine | small_drift |
                            // asymptotics | kernel_checks
    StudyMetric metric = StudyMetric::WeakError;
    double probe_x = 0.5;
    std::vector<long> ladder;
    std::vector<double> eps_ladder;
    std::vector<double> delta_ladder; // asymptotics
    std::vector<double> z_values;     // asymptotics
    long paths = 10000;
    std::string test_function = "tanh";
    int grid_points = 1025;
    double zeta_override = 0.0;
    bool coupled = true;

    std::uint64_t master_seed = 1;
    std::string out_dir; // empty -> environment/default
    long snapshot_paths = 4;
    bool write_noise_dump = false;

    std::string config_hash; // 64-bit FNV-1a of the resolved document, hex
};

/// Parse + validate a JSON config document. Throws std::domain_error with a
/// schema diagnostic on any violation.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);

/// Apply `--section.key=value` overrides onto a raw JSON document.
void apply_override(nlohmann::json& doc, const std::string& dotted_key,
                    const std::string& value);

/// FNV-1a 64-bit hash rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

} // namespace shelab
