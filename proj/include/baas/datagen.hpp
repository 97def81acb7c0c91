#pragma once

// Configuration sweeps over the host core budget and the on-disk dataset.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "baas/simcore.hpp"

namespace baas::data {

struct GridSpec {
    int peer_min = 1;
    int peer_max = 10;
    int max_quota = 0;  // 0 = no cap beyond the core budget
    std::vector<double> rates{250.0, 350.0, 450.0, 550.0};
    int repetitions = 1;
    std::uint64_t base_seed = 42;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// SimParams (and optionally the grid) a dataset was generated with.
struct Provenance {
    sim::SimParams params;
    std::optional<GridSpec> grid;

    /// Stable hash of params + grid, recorded in trained models.
    std::string fingerprint() const;
    friend bool operator==(const Provenance&, const Provenance&) = default;
};

inline const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names{"num_peers", "cpu_quota_per_peer", "tx_request_rate"};
    return names;
}

struct Dataset {
    std::vector<sim::PerfRecord> records;
    std::optional<Provenance> provenance;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Admissible quota ceiling for `num_peers` under the budget rule.
int max_quota_for(int num_peers, int host_cores, int orderer_cpu, int cap = 0);

/// Peers ascending, then quota ascending, then rate ascending.
std::vector<sim::ScalingConfig> build_grid(const GridSpec& spec, int host_cores = sim::kDefaultHostCores,
                                           int orderer_cpu = 2);

/// Per-record seed; depends only on (base_seed, config index, repetition).
std::uint64_t record_seed(std::uint64_t base_seed, std::size_t config_index, int repetition);

/// Runs every (config, repetition) pair; output order is config-major and
/// independent of `threads`.
Dataset collect_dataset(const std::vector<sim::ScalingConfig>& grid, const sim::SimParams& params,
                        int repetitions, std::uint64_t base_seed, unsigned threads = 1);

inline constexpr const char* kCsvHeader =
    "num_peers,cpu_quota_per_peer,tx_request_rate,success_rate,throughput_tps,seed";

void write_csv(const Dataset& dataset, std::ostream& out);
Dataset read_csv(std::istream& in, const std::string& source_name = "<stream>");

/// Writes `path` and, when provenance is set, `path + ".meta.json"` beside it.
void write_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_csv(const std::filesystem::path& path);

std::filesystem::path meta_path(const std::filesystem::path& csv_path);

/// Shortest round-trip decimal representation without exponent.
std::string format_double(double v);

}  // namespace baas::data
