#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "baas/errors.hpp"
#include "baas/simcore.hpp"

namespace baas::sim {

std::string to_string(Metric m) {
    return m == Metric::success_rate ? "success_rate" : "throughput_tps";
}

Metric metric_from_string(const std::string& name) {
    if (name == "success_rate") return Metric::success_rate;
    if (name == "throughput_tps") return Metric::throughput_tps;
    throw ValidationError("unknown metric '" + name + "' (expected success_rate or throughput_tps)");
}

double AnchorOutcome::miss() const {
    if (value < anchor.lo) return anchor.lo - value;
    if (value > anchor.hi) return value - anchor.hi;
    return 0.0;
}

std::vector<Anchor> default_anchors() {
    auto tps_band = [](double measured, double rate) {
        return Anchor{{4, 4, rate}, Metric::throughput_tps, measured * 0.9, measured * 1.1, std::nullopt, 11};
    };
    return {
        // One peer, one core: success collapses as the rate goes 250 -> 550.
        Anchor{{1, 1, 250.0}, Metric::success_rate, 95.0, 100.0, 5000, 7},
        Anchor{{1, 1, 550.0}, Metric::success_rate, 0.0, 65.0, 5000, 7},
        // Four peers, four cores: plateau around 509 tps at 550 tps offered.
        Anchor{{4, 4, 550.0}, Metric::throughput_tps, 450.0, 570.0, std::nullopt, 11},
        Anchor{{4, 4, 650.0}, Metric::throughput_tps, 450.0, 570.0, std::nullopt, 11},
        tps_band(298.9, 300.0),
        tps_band(398.6, 400.0),
        tps_band(497.2, 500.0),
    };
}

SearchSpace default_search_space() {
    return {
        {2.0, 1.5, 2.5, 3.0},
        {1.5, 1.0, 2.0},
        {3.7, 3.5, 3.9, 4.1},
    };
}

std::vector<AnchorOutcome> evaluate_anchors(const std::vector<Anchor>& anchors, const SimParams& params) {
    std::vector<AnchorOutcome> out;
    out.reserve(anchors.size());
    for (const Anchor& a : anchors) {
        SimParams p = params;
        if (a.total_txs) p.total_txs = *a.total_txs;
        const PerfRecord r = simulate_record(a.config, p, a.seed);
        out.push_back({a, a.metric == Metric::success_rate ? r.success_rate : r.throughput_tps});
    }
    return out;
}

CalibrationResult calibrate_defaults(const std::vector<Anchor>& anchors, const SearchSpace& space,
                                     const SimParams& base) {
    require(!anchors.empty(), "calibration needs at least one anchor");
    require(!space.endorse_ms.empty() && !space.validate_ms.empty() && !space.order_ms.empty(),
            "calibration search space is empty");
    for (const Anchor& a : anchors) require(a.lo <= a.hi, "anchor range must satisfy lo <= hi");

    std::vector<AnchorOutcome> nearest;
    std::size_t tried = 0;
    for (double e : space.endorse_ms) {
        for (double v : space.validate_ms) {
            for (double o : space.order_ms) {
                SimParams p = base;
                p.endorse_ms = e;
                p.validate_ms = v;
                p.order_ms = o;
                validate(p);
                auto outcomes = evaluate_anchors(anchors, p);
                ++tried;
                if (std::all_of(outcomes.begin(), outcomes.end(), [](const auto& x) { return x.inside(); })) {
                    return {p, std::move(outcomes), tried};
                }
                if (nearest.empty()) {
                    nearest = outcomes;
                } else {
                    for (std::size_t i = 0; i < outcomes.size(); ++i) {
                        if (outcomes[i].miss() < nearest[i].miss()) nearest[i] = outcomes[i];
                    }
                }
            }
        }
    }

    std::ostringstream os;
    os << "no parameter set satisfies all anchors (" << tried << " points tried); nearest miss per anchor:";
    for (const auto& n : nearest) {
        os << "\n  peers=" << n.anchor.config.num_peers << " quota=" << n.anchor.config.cpu_quota_per_peer
           << " rate=" << n.anchor.config.tx_request_rate << ' ' << to_string(n.anchor.metric) << '='
           << n.value << " target=[" << n.anchor.lo << ',' << n.anchor.hi << ']';
    }
    throw ValidationError(os.str());
}

}  // namespace baas::sim
