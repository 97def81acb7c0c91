#pragma once

// Pipeline configuration loaded from one JSON file, sectioned by module.
// Command-line flags override file values; file values override defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "baas/datagen.hpp"
#include "baas/json_io.hpp"
#include "baas/mlcore.hpp"
#include "baas/planner.hpp"
#include "baas/simcore.hpp"

namespace baas {

inline constexpr const char* kConfigEnvVar = "BAAS_PLANNER_CONFIG";

struct RunPaths {
    std::string dataset = "dataset.csv";
    std::string success_model = "success_model.json";
    std::string throughput_model = "throughput_model.json";
    std::string sim_params = "sim_params.json";
    std::string reports = "reports";
};

struct RunConfig {
    sim::SimParams sim;
    data::GridSpec grid;
    ml::ForestHyperparams success_forest = ml::kSuccessSelected;
    ml::ForestHyperparams throughput_forest = ml::kThroughputSelected;
    plan::PlanQuery plan;
    RunPaths paths;
    std::uint64_t seed = 42;
    unsigned threads = 0;  // 0 = machine parallelism

    unsigned effective_threads() const;
    /// Re-checks every embedded invariant.
    void validate() const;
};

RunConfig run_config_from_json(const Json& j);
Json run_config_to_json(const RunConfig& c);

/// Reads `path`, or the file named by BAAS_PLANNER_CONFIG when `path` is
/// empty; defaults when neither is set.
RunConfig load_run_config(const std::optional<std::filesystem::path>& path);

}  // namespace baas

namespace baas::ml {
void to_json(Json& j, const ForestHyperparams& hp);
void from_json(const Json& j, ForestHyperparams& hp);
}  // namespace baas::ml
