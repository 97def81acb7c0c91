#pragma once

// Discrete-event model of the execute -> order -> validate transaction
// pipeline of a single-channel permissioned blockchain.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace baas::sim {

inline constexpr int kDefaultHostCores = 24;

struct ScalingConfig {
    int num_peers = 1;
    int cpu_quota_per_peer = 1;
    double tx_request_rate = 1.0;  // tps

    friend bool operator==(const ScalingConfig&, const ScalingConfig&) = default;
};

struct SimParams {
    double endorse_ms = 2.0;
    double validate_ms = 1.5;
    double order_ms = 3.7;
    int block_size = 10;
    double block_timeout_ms = 2000.0;
    double tx_timeout_ms = 3000.0;
    int orderer_cpu = 2;
    int total_txs = 20000;
    double service_time_cv = 0.1;
    int host_cores = kDefaultHostCores;

    friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct PerfRecord {
    ScalingConfig config;
    double success_rate = 0.0;    // percent
    double throughput_tps = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const PerfRecord&, const PerfRecord&) = default;
};

enum class TxStatus { committed, timed_out };

struct TxTrace {
    double submit_ms = 0.0;
    double endorsed_ms = 0.0;
    double ordered_ms = 0.0;  // block sealed
    std::vector<double> peer_commit_ms;
    double committed_ms = 0.0;  // max over peer_commit_ms
    TxStatus status = TxStatus::timed_out;

    friend bool operator==(const TxTrace&, const TxTrace&) = default;
};

struct EventTrace {
    std::vector<TxTrace> txs;

    std::size_t committed_count() const;
    std::size_t timed_out_count() const;
    friend bool operator==(const EventTrace&, const EventTrace&) = default;
};

struct SimResult {
    PerfRecord record;
    std::optional<EventTrace> trace;
};

void validate(const SimParams& params);
/// Checks the config against itself and against the host core budget in `params`.
void validate(const ScalingConfig& config, const SimParams& params);

/// Pure function of its arguments: identical inputs give bit-identical output.
SimResult simulate(const ScalingConfig& config, const SimParams& params, std::uint64_t seed,
                   bool with_trace = false);

inline PerfRecord simulate_record(const ScalingConfig& config, const SimParams& params,
                                  std::uint64_t seed) {
    return simulate(config, params, seed).record;
}

/// Bottleneck bound (tps) on sustainable throughput: each peer must absorb its
/// 1/n share of endorsements plus validation of every transaction; the
/// orderer must sequence every transaction.
double analytic_capacity(const ScalingConfig& config, const SimParams& params);

struct CapacityTerms {
    double peer_tps;
    double orderer_tps;
};
CapacityTerms capacity_terms(const ScalingConfig& config, const SimParams& params);

/// Writes one row per transaction: tx_id,submit_ms,endorsed_ms,ordered_ms,committed_ms,status
void write_trace_csv(const EventTrace& trace, std::ostream& out);

// ---------------------------------------------------------------------------
// Calibration

enum class Metric { success_rate, throughput_tps };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& name);

struct Anchor {
    ScalingConfig config;
    Metric metric = Metric::throughput_tps;
    double lo = 0.0;
    double hi = 0.0;
    std::optional<int> total_txs;  // overrides SimParams::total_txs for this anchor
    std::uint64_t seed = 1;
};

struct SearchSpace {
    std::vector<double> endorse_ms;
    std::vector<double> validate_ms;
    std::vector<double> order_ms;
};

struct AnchorOutcome {
    Anchor anchor;
    double value;
    bool inside() const { return value >= anchor.lo && value <= anchor.hi; }
    /// Distance from the target range, zero when inside.
    double miss() const;
};

struct CalibrationResult {
    SimParams params;
    std::vector<AnchorOutcome> outcomes;
    std::size_t points_tried = 0;
};

/// Anchors reproducing the reference testbed behaviour: the overload collapse
/// of success at one peer / one core, the 4x4 saturation plateau near 509 tps,
/// and the measured 4x4 throughputs at 300/400/500 tps.
std::vector<Anchor> default_anchors();
SearchSpace default_search_space();

/// Grid-searches (endorse, validate, order) service times in the given order
/// and returns the first point whose simulated outputs satisfy every anchor.
/// Throws ValidationError listing the nearest miss per anchor otherwise.
CalibrationResult calibrate_defaults(const std::vector<Anchor>& anchors, const SearchSpace& space,
                                     const SimParams& base = {});

std::vector<AnchorOutcome> evaluate_anchors(const std::vector<Anchor>& anchors,
                                            const SimParams& params);

}  // namespace baas::sim
