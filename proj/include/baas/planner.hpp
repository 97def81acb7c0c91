#pragma once

// Capacity-planning queries over trained success/throughput models:
// minimum-cost (CPU quota, peer count) selection and throughput curves.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "baas/mlcore.hpp"
#include "baas/simcore.hpp"

namespace baas::plan {

struct PlanQuery {
    double request_rate = 500.0;
    double min_success_rate = 100.0;  // percent
    std::optional<double> min_throughput_tps;  // absolute; overrides the fraction when set
    double min_throughput_frac = 0.9;          // of request_rate
    double success_slack = 0.5;                // percentage points tolerated below min_success_rate
    double w_c = 1.0;
    double w_p = 1.0;
    std::vector<int> n_c{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22};
    std::vector<int> n_p{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    double throughput_threshold() const {
        return min_throughput_tps ? *min_throughput_tps : min_throughput_frac * request_rate;
    }
};

void validate(const PlanQuery& q);

struct GridCell {
    int n_c = 0;
    int n_p = 0;
    double pred_success = 0.0;
    double pred_throughput = 0.0;
    bool success_ok = false;
    bool throughput_ok = false;
    bool feasible = false;
};

struct FeasibilityGrid {
    std::vector<GridCell> cells;  // n_p ascending, then n_c ascending
    std::vector<int> n_c;         // sorted candidate axes
    std::vector<int> n_p;

    const GridCell* find(int n_c, int n_p) const;
};

struct CoreBudget {
    int host_cores = sim::kDefaultHostCores;
    int orderer_cpu = 2;
};

/// (n_c, n_p) pairs from the candidate sets that fit the core budget.
std::vector<std::pair<int, int>> candidate_pairs(const PlanQuery& q, const CoreBudget& budget = {});

/// Predicts both labels at (n_p, n_c, request_rate) for every admissible
/// pair. Throws ValidationError if the models disagree on training data
/// provenance or carry the wrong labels.
FeasibilityGrid feasibility_grid(const ml::Model& success_model, const ml::Model& throughput_model,
                                 const PlanQuery& q, const CoreBudget& budget = {});

struct PlanResult {
    FeasibilityGrid grid;
    std::optional<GridCell> chosen;
    double cost = 0.0;
};

/// argmin of n_c * w_c + n_p * w_p over feasible cells; ties prefer fewer
/// peers, then fewer cores.
PlanResult optimal_config(const FeasibilityGrid& grid, double w_c, double w_p);

struct CurvePoint {
    double rate;
    double predicted_tps;
};

struct ThroughputCurve {
    std::vector<CurvePoint> points;
    double peak_rate = 0.0;
    double peak_tps = 0.0;
};

/// Peak ties resolve to the lowest rate.
ThroughputCurve throughput_curve(const ml::Model& throughput_model, int n_c, int n_p, const std::vector<double>& rates);

/// Parses "lo:hi:step" (inclusive) or a comma-separated list.
std::vector<double> parse_rates(const std::string& text);

struct PlanValidation {
    int n_c = 0;
    int n_p = 0;
    double predicted_success = 0.0;
    double predicted_throughput = 0.0;
    double measured_success = 0.0;  // mean over seeds
    double measured_throughput = 0.0;
    double min_measured_success = 0.0;
    double min_measured_throughput = 0.0;
    std::vector<sim::PerfRecord> runs;
    bool meets_requirements = false;

    double success_error_pct() const;
    double throughput_error_pct() const;
};

/// Re-simulates the chosen pair at the query rate for each seed. The
/// requirement check uses the same slack as the feasibility predicate and is
/// applied to every run.
PlanValidation validate_plan(const GridCell& chosen, const PlanQuery& q, const sim::SimParams& params,
                             const std::vector<std::uint64_t>& seeds);

struct CurveCheckRow {
    double rate;
    double predicted_tps;
    double measured_tps;  // mean over seeds
};

struct CurveCheck {
    std::vector<CurveCheckRow> rows;
    double mean_abs_error_pct = 0.0;
};

CurveCheck validate_curve(const ml::Model& throughput_model, int n_c, int n_p, const std::vector<double>& rates,
                          const sim::SimParams& params, const std::vector<std::uint64_t>& seeds);

void write_grid_csv(const FeasibilityGrid& grid, std::ostream& out);
void write_curve_csv(const ThroughputCurve& curve, std::ostream& out);

enum class GridView { feasible, success, throughput };
/// Rows are peer counts (largest on top), columns CPU quotas; O satisfies,
/// X does not, '.' is outside the core budget.
std::string render_ascii(const FeasibilityGrid& grid, GridView view = GridView::feasible);

}  // namespace baas::plan
