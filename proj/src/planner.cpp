#include "baas/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "baas/errors.hpp"

namespace baas::plan {

namespace {

std::vector<int> sorted_unique(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

double pct_error(double predicted, double measured) {
    if (measured == 0.0) return predicted == 0.0 ? 0.0 : 100.0;
    return 100.0 * std::abs(predicted - measured) / std::abs(measured);
}

}  // namespace

void validate(const PlanQuery& q) {
    require(std::isfinite(q.request_rate) && q.request_rate > 0.0, "plan: request rate must be > 0");
    require(q.min_success_rate >= 0.0 && q.min_success_rate <= 100.0, "plan: min success rate must lie in [0,100]");
    require(q.success_slack >= 0.0, "plan: success slack must be >= 0");
    if (q.min_throughput_tps) require(*q.min_throughput_tps >= 0.0, "plan: min throughput must be >= 0");
    require(q.min_throughput_frac >= 0.0, "plan: min throughput fraction must be >= 0");
    require(q.w_c > 0.0 && q.w_p > 0.0 && std::isfinite(q.w_c) && std::isfinite(q.w_p),
            "plan: weights w_c and w_p must be > 0");
    require(!q.n_c.empty() && !q.n_p.empty(), "plan: candidate sets must be non-empty");
    for (int c : q.n_c) require(c >= 1, "plan: CPU quota candidates must be >= 1");
    for (int p : q.n_p) require(p >= 1, "plan: peer candidates must be >= 1");
}

const GridCell* FeasibilityGrid::find(int c, int p) const {
    for (const auto& cell : cells) {
        if (cell.n_c == c && cell.n_p == p) return &cell;
    }
    return nullptr;
}

std::vector<std::pair<int, int>> candidate_pairs(const PlanQuery& q, const CoreBudget& budget) {
    std::vector<std::pair<int, int>> out;
    for (int p : sorted_unique(q.n_p)) {
        for (int c : sorted_unique(q.n_c)) {
            if (static_cast<long>(p) * c + budget.orderer_cpu <= budget.host_cores) out.emplace_back(c, p);
        }
    }
    return out;
}

FeasibilityGrid feasibility_grid(const ml::Model& success_model, const ml::Model& throughput_model,
                                 const PlanQuery& q, const CoreBudget& budget) {
    validate(q);
    require(success_model.label == ml::Label::success_rate, "plan: success model is not a success_rate model");
    require(throughput_model.label == ml::Label::throughput_tps,
            "plan: throughput model is not a throughput_tps model");
    if (!success_model.training_fingerprint.empty() && !throughput_model.training_fingerprint.empty() &&
        success_model.training_fingerprint != throughput_model.training_fingerprint) {
        throw ValidationError("plan: models were trained on different data (fingerprints " +
                              success_model.training_fingerprint + " vs " + throughput_model.training_fingerprint + ")");
    }

    FeasibilityGrid grid;
    grid.n_c = sorted_unique(q.n_c);
    grid.n_p = sorted_unique(q.n_p);
    const double min_success = q.min_success_rate - q.success_slack;
    const double min_tps = q.throughput_threshold();
    for (auto [c, p] : candidate_pairs(q, budget)) {
        const ml::Features x{static_cast<double>(p), static_cast<double>(c), q.request_rate};
        GridCell cell;
        cell.n_c = c;
        cell.n_p = p;
        cell.pred_success = ml::predict(success_model, x);
        cell.pred_throughput = ml::predict(throughput_model, x);
        cell.success_ok = cell.pred_success >= min_success;
        cell.throughput_ok = cell.pred_throughput >= min_tps;
        cell.feasible = cell.success_ok && cell.throughput_ok;
        grid.cells.push_back(cell);
    }
    return grid;
}

PlanResult optimal_config(const FeasibilityGrid& grid, double w_c, double w_p) {
    require(w_c > 0.0 && w_p > 0.0, "plan: weights must be > 0");
    PlanResult result;
    result.grid = grid;
    for (const auto& cell : grid.cells) {
        if (!cell.feasible) continue;
        const double cost = cell.n_c * w_c + cell.n_p * w_p;
        bool better = !result.chosen || cost < result.cost;
        if (!better && cost == result.cost) {
            better = std::pair(cell.n_p, cell.n_c) < std::pair(result.chosen->n_p, result.chosen->n_c);
        }
        if (better) {
            result.chosen = cell;
            result.cost = cost;
        }
    }
    return result;
}

ThroughputCurve throughput_curve(const ml::Model& throughput_model, int n_c, int n_p, const std::vector<double>& rates) {
    require(!rates.empty(), "curve: rate list must be non-empty");
    require(n_c >= 1 && n_p >= 1, "curve: n_c and n_p must be >= 1");
    require(throughput_model.label == ml::Label::throughput_tps, "curve: model is not a throughput_tps model");
    ThroughputCurve curve;
    for (double r : rates) {
        require(std::isfinite(r) && r > 0.0, "curve: rates must be positive");
        const double tps = ml::predict(throughput_model, {static_cast<double>(n_p), static_cast<double>(n_c), r});
        curve.points.push_back({r, tps});
    }
    const CurvePoint* peak = &curve.points.front();
    for (const auto& pt : curve.points) {
        if (pt.predicted_tps > peak->predicted_tps ||
            (pt.predicted_tps == peak->predicted_tps && pt.rate < peak->rate)) {
            peak = &pt;
        }
    }
    curve.peak_rate = peak->rate;
    curve.peak_tps = peak->predicted_tps;
    return curve;
}

std::vector<double> parse_rates(const std::string& text) {
    auto to_double = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw ValidationError("cannot parse rate '" + s + "' in '" + text + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ':')) parts.push_back(part);
        if (parts.size() != 3) throw ValidationError("rate range must be lo:hi:step, got '" + text + "'");
        const double lo = to_double(parts[0]), hi = to_double(parts[1]), step = to_double(parts[2]);
        require(step > 0.0 && lo > 0.0 && hi >= lo, "rate range needs 0 < lo <= hi and step > 0");
        const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    } else {
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) out.push_back(to_double(part));
    }
    require(!out.empty(), "rate list is empty");
    for (double r : out) require(r > 0.0, "rates must be positive");
    return out;
}

double PlanValidation::success_error_pct() const { return pct_error(predicted_success, measured_success); }
double PlanValidation::throughput_error_pct() const { return pct_error(predicted_throughput, measured_throughput); }

PlanValidation validate_plan(const GridCell& chosen, const PlanQuery& q, const sim::SimParams& params,
                             const std::vector<std::uint64_t>& seeds) {
    validate(q);
    require(!seeds.empty(), "validate_plan: at least one seed is required");
    PlanValidation v;
    v.n_c = chosen.n_c;
    v.n_p = chosen.n_p;
    v.predicted_success = chosen.pred_success;
    v.predicted_throughput = chosen.pred_throughput;
    v.min_measured_success = 100.0;
    v.min_measured_throughput = std::numeric_limits<double>::infinity();
    const sim::ScalingConfig cfg{chosen.n_p, chosen.n_c, q.request_rate};
    for (auto seed : seeds) {
        const auto r = sim::simulate_record(cfg, params, seed);
        v.runs.push_back(r);
        v.measured_success += r.success_rate;
        v.measured_throughput += r.throughput_tps;
        v.min_measured_success = std::min(v.min_measured_success, r.success_rate);
        v.min_measured_throughput = std::min(v.min_measured_throughput, r.throughput_tps);
    }
    v.measured_success /= static_cast<double>(seeds.size());
    v.measured_throughput /= static_cast<double>(seeds.size());
    v.meets_requirements = v.min_measured_success >= q.min_success_rate - q.success_slack &&
                           v.min_measured_throughput >= q.throughput_threshold();
    return v;
}

CurveCheck validate_curve(const ml::Model& throughput_model, int n_c, int n_p, const std::vector<double>& rates,
                          const sim::SimParams& params, const std::vector<std::uint64_t>& seeds) {
    require(!seeds.empty(), "validate_curve: at least one seed is required");
    const auto curve = throughput_curve(throughput_model, n_c, n_p, rates);
    CurveCheck check;
    double err = 0.0;
    for (const auto& pt : curve.points) {
        double measured = 0.0;
        for (auto seed : seeds) measured += sim::simulate_record({n_p, n_c, pt.rate}, params, seed).throughput_tps;
        measured /= static_cast<double>(seeds.size());
        check.rows.push_back({pt.rate, pt.predicted_tps, measured});
        err += pct_error(pt.predicted_tps, measured);
    }
    check.mean_abs_error_pct = err / static_cast<double>(check.rows.size());
    return check;
}

void write_grid_csv(const FeasibilityGrid& grid, std::ostream& out) {
    out << "n_c,n_p,pred_success,pred_throughput,feasible\n";
    for (const auto& c : grid.cells) {
        out << c.n_c << ',' << c.n_p << ',' << data::format_double(c.pred_success) << ','
            << data::format_double(c.pred_throughput) << ',' << (c.feasible ? 1 : 0) << '\n';
    }
}

void write_curve_csv(const ThroughputCurve& curve, std::ostream& out) {
    out << "rate,predicted_tps\n";
    for (const auto& p : curve.points) out << data::format_double(p.rate) << ',' << data::format_double(p.predicted_tps) << '\n';
}

std::string render_ascii(const FeasibilityGrid& grid, GridView view) {
    std::ostringstream os;
    os << "n_p\\n_c";
    for (int c : grid.n_c) os << ' ' << (c < 10 ? " " : "") << c;
    os << '\n';
    for (auto it = grid.n_p.rbegin(); it != grid.n_p.rend(); ++it) {
        const int p = *it;
        os << (p < 10 ? "      " : "     ") << p;
        for (int c : grid.n_c) {
            const GridCell* cell = grid.find(c, p);
            char mark = '.';
            if (cell) {
                const bool ok = view == GridView::feasible  ? cell->feasible
                                : view == GridView::success ? cell->success_ok
                                                            : cell->throughput_ok;
                mark = ok ? 'O' : 'X';
            }
            os << "  " << mark;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace baas::plan
