#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "baas/datagen.hpp"
#include "baas/errors.hpp"
#include "baas/evaluation.hpp"
#include "baas/json_io.hpp"
#include "baas/mlcore.hpp"
#include "baas/planner.hpp"
#include "baas/run_config.hpp"
#include "baas/simcore.hpp"

namespace baas::cli {

namespace {

namespace fs = std::filesystem;

template <typename T>
void override_with(const std::optional<T>& flag, T& target) {
    if (flag) target = *flag;
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    if (text.find(':') != std::string::npos) {
        int lo = 0, hi = 0;
        char colon = 0;
        std::istringstream is(text);
        if (!(is >> lo >> colon >> hi) || colon != ':' || !is.eof() || lo > hi) {
            throw ValidationError(std::string(what) + ": cannot parse range '" + text + "' (expected lo:hi)");
        }
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw ValidationError(std::string(what) + ": cannot parse integer '" + part + "'");
        }
    }
    if (out.empty()) throw ValidationError(std::string(what) + ": empty list");
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (int v : parse_int_list(text, "--validate-seeds")) {
        require(v >= 0, "--validate-seeds: seeds must be >= 0");
        out.push_back(static_cast<std::uint64_t>(v));
    }
    return out;
}

sim::SimParams load_sim_params(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sim params '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
    // Accept either a bare SimParams object or a config with a "sim" section.
    const Json& section = j.contains("sim") ? j.at("sim") : j;
    sim::SimParams p = section.get<sim::SimParams>();
    sim::validate(p);
    return p;
}

// Options shared by every subcommand.
struct Common {
    std::optional<std::string> config_path;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> sim_params_path;
};

struct Context {
    RunConfig cfg;
    std::ostream& out;
    unsigned threads() const { return cfg.effective_threads(); }
};

// ---------------------------------------------------------------------------

struct SimulateOpts {
    int np = 0, nc = 0;
    double rate = 0.0;
    std::optional<int> txs;
    std::optional<std::string> trace;
};

void cmd_simulate(Context& ctx, const SimulateOpts& o) {
    sim::SimParams p = ctx.cfg.sim;
    override_with(o.txs, p.total_txs);
    const sim::ScalingConfig c{o.np, o.nc, o.rate};
    const auto result = sim::simulate(c, p, ctx.cfg.seed, o.trace.has_value());
    const auto cap = sim::capacity_terms(c, p);
    ctx.out << "config: peers=" << c.num_peers << " quota=" << c.cpu_quota_per_peer << " rate=" << c.tx_request_rate
            << " tps, seed=" << ctx.cfg.seed << ", txs=" << p.total_txs << '\n'
            << "success_rate: " << fmt("%.3f", result.record.success_rate) << " %\n"
            << "throughput:   " << fmt("%.3f", result.record.throughput_tps) << " tps\n"
            << "capacity:     " << fmt("%.3f", std::min(cap.peer_tps, cap.orderer_tps))
            << " tps (peer bound " << fmt("%.1f", cap.peer_tps) << ", orderer bound " << fmt("%.1f", cap.orderer_tps)
            << ")\n";
    if (o.trace) {
        auto f = open_output(*o.trace);
        sim::write_trace_csv(*result.trace, f);
        ctx.out << "trace: " << *o.trace << " (" << result.trace->txs.size() << " rows)\n";
    }
}

struct CalibrateOpts {
    std::optional<std::string> endorse, validate, order, out;
};

std::vector<double> parse_double_list(const std::string& text) { return plan::parse_rates(text); }

void cmd_calibrate(Context& ctx, const CalibrateOpts& o) {
    auto space = sim::default_search_space();
    if (o.endorse) space.endorse_ms = parse_double_list(*o.endorse);
    if (o.validate) space.validate_ms = parse_double_list(*o.validate);
    if (o.order) space.order_ms = parse_double_list(*o.order);
    const auto result = sim::calibrate_defaults(sim::default_anchors(), space, ctx.cfg.sim);
    const std::string path = o.out.value_or(ctx.cfg.paths.sim_params);
    {
        auto f = open_output(path);
        f << Json{{"sim", result.params}}.dump(2) << '\n';
    }
    ctx.out << "calibrated after " << result.points_tried << " grid point(s): endorse_ms=" << result.params.endorse_ms
            << " validate_ms=" << result.params.validate_ms << " order_ms=" << result.params.order_ms << '\n';
    for (const auto& a : result.outcomes) {
        ctx.out << "  peers=" << a.anchor.config.num_peers << " quota=" << a.anchor.config.cpu_quota_per_peer
                << " rate=" << a.anchor.config.tx_request_rate << "  " << sim::to_string(a.anchor.metric) << '='
                << fmt("%.2f", a.value) << " in [" << a.anchor.lo << ", " << a.anchor.hi << "]\n";
    }
    ctx.out << "wrote " << path << '\n';
}

struct DatasetOpts {
    std::optional<std::string> out, peers, rates;
    std::optional<int> reps, txs, max_quota;
};

void cmd_dataset(Context& ctx, const DatasetOpts& o) {
    auto& g = ctx.cfg.grid;
    override_with(o.reps, g.repetitions);
    override_with(o.max_quota, g.max_quota);
    override_with(o.txs, ctx.cfg.sim.total_txs);
    g.base_seed = ctx.cfg.seed;
    if (o.peers) {
        const auto v = parse_int_list(*o.peers, "--peers");
        g.peer_min = v.front();
        g.peer_max = v.back();
    }
    if (o.rates) g.rates = plan::parse_rates(*o.rates);
    ctx.cfg.validate();

    const auto t0 = std::chrono::steady_clock::now();
    const auto grid = data::build_grid(g, ctx.cfg.sim.host_cores, ctx.cfg.sim.orderer_cpu);
    auto ds = data::collect_dataset(grid, ctx.cfg.sim, g.repetitions, g.base_seed, ctx.threads());
    ds.provenance->grid = g;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string path = o.out.value_or(ctx.cfg.paths.dataset);
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    data::write_csv(ds, fs::path(path));
    ctx.out << "configs: " << grid.size() << ", repetitions: " << g.repetitions << ", records: " << ds.size() << '\n'
            << "fingerprint: " << ds.provenance->fingerprint() << '\n'
            << "simulated in " << fmt("%.1f", secs) << " s\n"
            << "wrote " << path << '\n';
}

data::Dataset load_dataset(const Context& ctx, const std::optional<std::string>& flag) {
    return data::read_csv(fs::path(flag.value_or(ctx.cfg.paths.dataset)));
}

std::vector<ml::Label> labels_for(const std::string& which) {
    if (which == "both") return {ml::Label::success_rate, ml::Label::throughput_tps};
    return {ml::label_from_string(which)};
}

struct HpFlags {
    std::optional<int> n_estimators, max_depth, min_samples_split, min_samples_leaf;
    void apply_to(ml::ForestHyperparams& hp) const {
        override_with(n_estimators, hp.n_estimators);
        override_with(max_depth, hp.max_depth);
        override_with(min_samples_split, hp.min_samples_split);
        override_with(min_samples_leaf, hp.min_samples_leaf);
    }
};

struct TrainOpts {
    std::optional<std::string> data, out_success, out_throughput;
    std::string label = "both";
    std::string algorithm = "forest";
    bool all_records = false;
    HpFlags hp;
};

void cmd_train(Context& ctx, const TrainOpts& o) {
    const auto ds = load_dataset(ctx, o.data);
    o.hp.apply_to(ctx.cfg.success_forest);
    o.hp.apply_to(ctx.cfg.throughput_forest);
    ctx.cfg.validate();
    const auto split = eval::split_train_test(ds, 0.8, ctx.cfg.seed);
    const data::Dataset& train = o.all_records ? ds : split.train;

    for (auto label : labels_for(o.label)) {
        eval::ModelRecipe recipe;
        if (o.algorithm == "forest") {
            const auto hp = label == ml::Label::success_rate ? ctx.cfg.success_forest : ctx.cfg.throughput_forest;
            recipe = eval::forest_recipe(hp, ctx.cfg.seed, ctx.threads());
        } else if (o.algorithm == "linear") {
            recipe = eval::linear_recipe();
        } else if (o.algorithm == "polynomial") {
            recipe = eval::polynomial_recipe();
        } else if (o.algorithm == "gbm") {
            recipe = eval::gbm_recipe();
        } else {
            throw ValidationError("--algorithm: unknown algorithm '" + o.algorithm + "'");
        }
        const auto model = recipe(train, label);
        const bool success = label == ml::Label::success_rate;
        const std::string path = success ? o.out_success.value_or(ctx.cfg.paths.success_model)
                                         : o.out_throughput.value_or(ctx.cfg.paths.throughput_model);
        if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
        ml::save_model(model, path);
        ctx.out << ml::to_string(label) << ": " << model.kind() << " trained on " << train.size() << " records";
        if (!o.all_records) ctx.out << ", holdout SMAPE " << fmt("%.3f", eval::score(model, split.test, label)) << " %";
        ctx.out << " -> " << path << '\n';
    }
}

struct GridSearchOpts {
    std::optional<std::string> data, out, n_estimators, max_depth, min_samples_split, min_samples_leaf;
    std::string label = "both";
};

void cmd_gridsearch(Context& ctx, const GridSearchOpts& o) {
    const auto ds = load_dataset(ctx, o.data);
    auto space = eval::default_hyperparam_space();
    if (o.n_estimators) space.n_estimators = parse_int_list(*o.n_estimators, "--n-estimators");
    if (o.max_depth) space.max_depth = parse_int_list(*o.max_depth, "--max-depth");
    if (o.min_samples_split) space.min_samples_split = parse_int_list(*o.min_samples_split, "--min-samples-split");
    if (o.min_samples_leaf) space.min_samples_leaf = parse_int_list(*o.min_samples_leaf, "--min-samples-leaf");
    for (auto label : labels_for(o.label)) {
        const auto result = eval::grid_search(ds, label, space, ctx.cfg.seed, ctx.threads());
        const std::string path =
            o.out && o.label != "both" ? *o.out : ctx.cfg.paths.reports + "/gridsearch_" + ml::to_string(label) + ".csv";
        auto f = open_output(path);
        eval::write_grid_search_csv(result, f);
        const auto& b = result.best;
        ctx.out << ml::to_string(label) << ": best (n_estimators=" << b.n_estimators << ", max_depth=" << b.max_depth
                << ", min_samples_split=" << b.min_samples_split << ", min_samples_leaf=" << b.min_samples_leaf
                << ") validation SMAPE " << fmt("%.3f", result.best_score) << " % over " << result.table.size()
                << " points -> " << path << '\n';
    }
}

struct EvalOpts {
    std::optional<std::string> data, out, success_model, throughput_model;
};

void cmd_eval(Context& ctx, const EvalOpts& o) {
    const auto ds = load_dataset(ctx, o.data);
    const auto rows = eval::compare_algorithms(ds, ctx.cfg.seed, ctx.threads());
    const std::string path = o.out.value_or(ctx.cfg.paths.reports + "/comparison.csv");
    {
        auto f = open_output(path);
        eval::write_comparison_csv(rows, f);
    }
    ctx.out << "80/20 holdout, seed " << ctx.cfg.seed << ", " << ds.size() << " records\n";
    for (const auto& r : rows) {
        char line[128];
        std::snprintf(line, sizeof line, "  %-18s %-15s SMAPE %8.3f %%\n", r.algorithm.c_str(),
                      ml::to_string(r.label).c_str(), r.smape);
        ctx.out << line;
    }
    const auto split = eval::split_train_test(ds, 0.8, ctx.cfg.seed);
    for (const auto& [label, model_path] :
         {std::pair{ml::Label::success_rate, o.success_model}, std::pair{ml::Label::throughput_tps, o.throughput_model}}) {
        if (!model_path) continue;
        const auto model = ml::load_model(*model_path);
        if (auto w = ml::fingerprint_warning(model, ds)) ctx.out << "warning: " << *w << '\n';
        ctx.out << "  " << *model_path << " on test split: SMAPE "
                << fmt("%.3f", eval::score(model, split.test, label)) << " %\n";
    }
    ctx.out << "wrote " << path << '\n';
}

struct CrossvalOpts {
    std::optional<std::string> data, out;
    int k = 10;
    std::string label = "both";
};

void cmd_crossval(Context& ctx, const CrossvalOpts& o) {
    const auto ds = load_dataset(ctx, o.data);
    eval::EvalReport report;
    report.split = "kfold:" + std::to_string(o.k);
    report.seed = ctx.cfg.seed;
    const auto split = eval::split_train_test(ds, 0.8, ctx.cfg.seed);
    for (auto label : labels_for(o.label)) {
        const auto hp = label == ml::Label::success_rate ? ctx.cfg.success_forest : ctx.cfg.throughput_forest;
        const auto recipe = eval::forest_recipe(hp, ctx.cfg.seed);
        auto entry = eval::kfold_cv(ds, recipe, label, o.k, ctx.cfg.seed, ctx.threads(), "random_forest");
        const double holdout = eval::score(recipe(split.train, label), split.test, label);
        ctx.out << ml::to_string(label) << ": " << o.k << "-fold mean SMAPE " << fmt("%.3f", entry.smape)
                << " %, holdout SMAPE " << fmt("%.3f", holdout) << " %, difference "
                << fmt("%.3f", std::abs(entry.smape - holdout)) << " points\n";
        report.entries.push_back(std::move(entry));
    }
    const std::string path = o.out.value_or(ctx.cfg.paths.reports + "/crossval.csv");
    auto f = open_output(path);
    eval::write_folds_csv(report, f);
    ctx.out << "wrote " << path << '\n';
}

struct PlanOpts {
    std::optional<std::string> success_model, throughput_model, out, nc_list, np_list, validate_seeds;
    std::optional<double> rate, min_success, min_throughput, min_throughput_frac, wc, wp, slack;
    bool extrapolate = false;
};

void cmd_plan(Context& ctx, const PlanOpts& o) {
    auto& q = ctx.cfg.plan;
    override_with(o.rate, q.request_rate);
    override_with(o.min_success, q.min_success_rate);
    override_with(o.min_throughput_frac, q.min_throughput_frac);
    if (o.min_throughput) q.min_throughput_tps = *o.min_throughput;
    if (o.min_throughput_frac && !o.min_throughput) q.min_throughput_tps.reset();
    override_with(o.wc, q.w_c);
    override_with(o.wp, q.w_p);
    override_with(o.slack, q.success_slack);
    if (o.nc_list) q.n_c = parse_int_list(*o.nc_list, "--nc-list");
    if (o.np_list) q.n_p = parse_int_list(*o.np_list, "--np-list");
    plan::validate(q);

    if (!o.extrapolate) {
        const auto& g = ctx.cfg.grid;
        for (int p : q.n_p) {
            if (p < g.peer_min || p > g.peer_max) {
                throw ValidationError("--np-list: " + std::to_string(p) +
                                      " peers lies outside the training grid; pass --extrapolate to allow it");
            }
        }
        const int max_q = data::max_quota_for(g.peer_min, ctx.cfg.sim.host_cores, ctx.cfg.sim.orderer_cpu, g.max_quota);
        for (int c : q.n_c) {
            if (c > max_q) {
                throw ValidationError("--nc-list: quota " + std::to_string(c) +
                                      " lies outside the training grid; pass --extrapolate to allow it");
            }
        }
        for (double r : {q.request_rate}) {
            const auto [lo, hi] = std::minmax_element(g.rates.begin(), g.rates.end());
            if (r < *lo || r > *hi) {
                throw ValidationError("--rate: " + fmt("%g", r) +
                                      " tps lies outside the training grid; pass --extrapolate to allow it");
            }
        }
    }

    const auto sm = ml::load_model(o.success_model.value_or(ctx.cfg.paths.success_model));
    const auto tm = ml::load_model(o.throughput_model.value_or(ctx.cfg.paths.throughput_model));
    const plan::CoreBudget budget{ctx.cfg.sim.host_cores, ctx.cfg.sim.orderer_cpu};
    const auto grid = plan::feasibility_grid(sm, tm, q, budget);
    const auto result = plan::optimal_config(grid, q.w_c, q.w_p);

    const std::string path = o.out.value_or(ctx.cfg.paths.reports + "/plan_grid.csv");
    {
        auto f = open_output(path);
        plan::write_grid_csv(grid, f);
    }
    ctx.out << "request rate " << q.request_rate << " tps; require success >= " << q.min_success_rate << " % (slack "
            << q.success_slack << "), throughput >= " << q.throughput_threshold() << " tps; w_c=" << q.w_c
            << " w_p=" << q.w_p << "\n\nsuccess rate:\n"
            << plan::render_ascii(grid, plan::GridView::success) << "\nthroughput:\n"
            << plan::render_ascii(grid, plan::GridView::throughput) << "\nfeasible:\n"
            << plan::render_ascii(grid, plan::GridView::feasible) << '\n';
    if (!result.chosen) {
        ctx.out << "no feasible configuration\n";
    } else {
        const auto& c = *result.chosen;
        ctx.out << "chosen: n_c=" << c.n_c << " n_p=" << c.n_p << " cost=" << result.cost
                << " (predicted success " << fmt("%.2f", c.pred_success) << " %, throughput "
                << fmt("%.1f", c.pred_throughput) << " tps)\n";
        if (o.validate_seeds) {
            const auto v = plan::validate_plan(c, q, ctx.cfg.sim, parse_seed_list(*o.validate_seeds));
            ctx.out << "simulated over " << v.runs.size() << " seed(s): success " << fmt("%.2f", v.measured_success)
                    << " %, throughput " << fmt("%.1f", v.measured_throughput) << " tps -> "
                    << (v.meets_requirements ? "requirements met" : "REQUIREMENTS VIOLATED") << '\n';
        }
    }
    ctx.out << "wrote " << path << '\n';
}

struct CurveOpts {
    std::optional<std::string> throughput_model, out, validate_seeds;
    int nc = 4, np = 4;
    std::string rates = "250:650:50";
};

void cmd_curve(Context& ctx, const CurveOpts& o) {
    const auto tm = ml::load_model(o.throughput_model.value_or(ctx.cfg.paths.throughput_model));
    const auto rates = plan::parse_rates(o.rates);
    const auto curve = plan::throughput_curve(tm, o.nc, o.np, rates);
    const std::string path = o.out.value_or(ctx.cfg.paths.reports + "/curve.csv");
    {
        auto f = open_output(path);
        plan::write_curve_csv(curve, f);
    }
    for (const auto& p : curve.points) ctx.out << "  rate " << fmt("%7.1f", p.rate) << "  -> " << fmt("%8.2f", p.predicted_tps) << " tps\n";
    ctx.out << "peak: " << fmt("%.2f", curve.peak_tps) << " tps at rate " << fmt("%g", curve.peak_rate) << '\n';
    if (o.validate_seeds) {
        const auto check = plan::validate_curve(tm, o.nc, o.np, rates, ctx.cfg.sim, parse_seed_list(*o.validate_seeds));
        for (const auto& r : check.rows) {
            ctx.out << "  rate " << fmt("%7.1f", r.rate) << "  predicted " << fmt("%8.2f", r.predicted_tps)
                    << "  simulated " << fmt("%8.2f", r.measured_tps) << '\n';
        }
        ctx.out << "mean absolute error: " << fmt("%.2f", check.mean_abs_error_pct) << " %\n";
    }
    ctx.out << "wrote " << path << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Capacity planning for permissioned-blockchain networks", "baas_planner"};
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    app.add_option("--config", common.config_path, "JSON run config (default: $BAAS_PLANNER_CONFIG)");
    app.add_option("--threads", common.threads, "worker threads (0 = machine parallelism)");
    app.add_option("--seed", common.seed, "global seed (unsigned integer)");
    app.add_option("--sim-params", common.sim_params_path,
                   "JSON file with simulator params (bare object or {\"sim\": {...}}, e.g. calibrate output)");

    std::function<void(Context&)> action;

    SimulateOpts sim_o;
    auto* simulate = app.add_subcommand("simulate", "simulate one configuration");
    simulate->add_option("--np", sim_o.np, "number of peers (count)")->required();
    simulate->add_option("--nc", sim_o.nc, "CPU quota per peer (cores)")->required();
    simulate->add_option("--rate", sim_o.rate, "transaction request rate (tps)")->required();
    simulate->add_option("--txs", sim_o.txs, "transactions to submit (count)");
    simulate->add_option("--trace", sim_o.trace, "write the per-transaction trace CSV to this path");
    simulate->callback([&] { action = [&](Context& c) { cmd_simulate(c, sim_o); }; });

    CalibrateOpts cal_o;
    auto* calibrate = app.add_subcommand("calibrate", "grid-search simulator service times against the anchors");
    calibrate->add_option("--endorse", cal_o.endorse, "endorse_ms candidates (ms, comma list or lo:hi:step)");
    calibrate->add_option("--validate", cal_o.validate, "validate_ms candidates (ms)");
    calibrate->add_option("--order", cal_o.order, "order_ms candidates (ms)");
    calibrate->add_option("--out", cal_o.out, "output JSON (default paths.sim_params)");
    calibrate->callback([&] { action = [&](Context& c) { cmd_calibrate(c, cal_o); }; });

    DatasetOpts ds_o;
    auto* dataset = app.add_subcommand("dataset", "sweep the scaling grid and write the dataset CSV");
    dataset->add_option("--out", ds_o.out, "dataset CSV path (default paths.dataset)");
    dataset->add_option("--reps", ds_o.reps, "repetitions per configuration (count)");
    dataset->add_option("--txs", ds_o.txs, "transactions per run (count)");
    dataset->add_option("--peers", ds_o.peers, "peer range lo:hi (count)");
    dataset->add_option("--rates", ds_o.rates, "request rates (tps, comma list or lo:hi:step)");
    dataset->add_option("--max-quota", ds_o.max_quota, "cap on CPU quota per peer (cores, 0 = budget only)");
    dataset->callback([&] { action = [&](Context& c) { cmd_dataset(c, ds_o); }; });

    TrainOpts tr_o;
    auto* train = app.add_subcommand("train", "train success/throughput models");
    train->add_option("--data", tr_o.data, "dataset CSV (default paths.dataset)");
    train->add_option("--label", tr_o.label, "success_rate | throughput_tps | both")->capture_default_str();
    train->add_option("--algorithm", tr_o.algorithm, "forest | linear | polynomial | gbm")->capture_default_str();
    train->add_flag("--all-records", tr_o.all_records, "train on every record instead of the 80% split");
    train->add_option("--out-success", tr_o.out_success, "success model path (default paths.success_model)");
    train->add_option("--out-throughput", tr_o.out_throughput, "throughput model path (default paths.throughput_model)");
    train->add_option("--n-estimators", tr_o.hp.n_estimators, "trees per forest (count, 1..50)");
    train->add_option("--max-depth", tr_o.hp.max_depth, "maximum tree depth (levels, 1..30)");
    train->add_option("--min-samples-split", tr_o.hp.min_samples_split, "minimum samples to split a node (count, 2..100)");
    train->add_option("--min-samples-leaf", tr_o.hp.min_samples_leaf, "minimum samples per leaf (count, 1..50)");
    train->callback([&] { action = [&](Context& c) { cmd_train(c, tr_o); }; });

    GridSearchOpts gs_o;
    auto* gridsearch = app.add_subcommand("gridsearch", "forest hyperparameter grid search on the 80/20 split");
    gridsearch->add_option("--data", gs_o.data, "dataset CSV (default paths.dataset)");
    gridsearch->add_option("--label", gs_o.label, "success_rate | throughput_tps | both")->capture_default_str();
    gridsearch->add_option("--out", gs_o.out, "score table CSV (single label only)");
    gridsearch->add_option("--n-estimators", gs_o.n_estimators, "candidate tree counts (comma list or lo:hi)");
    gridsearch->add_option("--max-depth", gs_o.max_depth, "candidate depths (levels)");
    gridsearch->add_option("--min-samples-split", gs_o.min_samples_split, "candidate split minimums (count)");
    gridsearch->add_option("--min-samples-leaf", gs_o.min_samples_leaf, "candidate leaf minimums (count)");
    gridsearch->callback([&] { action = [&](Context& c) { cmd_gridsearch(c, gs_o); }; });

    EvalOpts ev_o;
    auto* evaluate = app.add_subcommand("eval", "compare linear, polynomial, boosting and forest (SMAPE %)");
    evaluate->add_option("--data", ev_o.data, "dataset CSV (default paths.dataset)");
    evaluate->add_option("--out", ev_o.out, "comparison CSV (default <reports>/comparison.csv)");
    evaluate->add_option("--success-model", ev_o.success_model, "also score this success model on the test split");
    evaluate->add_option("--throughput-model", ev_o.throughput_model, "also score this throughput model on the test split");
    evaluate->callback([&] { action = [&](Context& c) { cmd_eval(c, ev_o); }; });

    CrossvalOpts cv_o;
    auto* crossval = app.add_subcommand("crossval", "K-fold cross-validation of the forest models (SMAPE %)");
    crossval->add_option("--data", cv_o.data, "dataset CSV (default paths.dataset)");
    crossval->add_option("--k", cv_o.k, "number of folds (count)")->capture_default_str();
    crossval->add_option("--label", cv_o.label, "success_rate | throughput_tps | both")->capture_default_str();
    crossval->add_option("--out", cv_o.out, "per-fold CSV (default <reports>/crossval.csv)");
    crossval->callback([&] { action = [&](Context& c) { cmd_crossval(c, cv_o); }; });

    PlanOpts pl_o;
    auto* planc = app.add_subcommand("plan", "cheapest (CPU quota, peers) meeting the requirements");
    planc->add_option("--success-model", pl_o.success_model, "success model (default paths.success_model)");
    planc->add_option("--throughput-model", pl_o.throughput_model, "throughput model (default paths.throughput_model)");
    planc->add_option("--rate", pl_o.rate, "expected request rate (tps)");
    planc->add_option("--min-success", pl_o.min_success, "required success rate (percent)");
    planc->add_option("--min-throughput", pl_o.min_throughput, "required throughput (tps, absolute)");
    planc->add_option("--min-throughput-frac", pl_o.min_throughput_frac, "required throughput (fraction of --rate)");
    planc->add_option("--slack", pl_o.slack, "success tolerance below the requirement (percentage points)");
    planc->add_option("--wc", pl_o.wc, "cost weight per CPU quota unit");
    planc->add_option("--wp", pl_o.wp, "cost weight per peer");
    planc->add_option("--nc-list", pl_o.nc_list, "candidate CPU quotas (cores, comma list or lo:hi)");
    planc->add_option("--np-list", pl_o.np_list, "candidate peer counts (comma list or lo:hi)");
    planc->add_option("--out", pl_o.out, "grid CSV (default <reports>/plan_grid.csv)");
    planc->add_option("--validate-seeds", pl_o.validate_seeds, "re-simulate the chosen pair with these seeds");
    planc->add_flag("--extrapolate", pl_o.extrapolate, "allow candidates outside the training grid");
    planc->callback([&] { action = [&](Context& c) { cmd_plan(c, pl_o); }; });

    CurveOpts cu_o;
    auto* curve = app.add_subcommand("curve", "predicted throughput over request rates for a fixed configuration");
    curve->add_option("--throughput-model", cu_o.throughput_model, "throughput model (default paths.throughput_model)");
    curve->add_option("--nc", cu_o.nc, "CPU quota per peer (cores)")->capture_default_str();
    curve->add_option("--np", cu_o.np, "number of peers (count)")->capture_default_str();
    curve->add_option("--rates", cu_o.rates, "request rates (tps, lo:hi:step or comma list)")->capture_default_str();
    curve->add_option("--out", cu_o.out, "curve CSV (default <reports>/curve.csv)");
    curve->add_option("--validate-seeds", cu_o.validate_seeds, "compare against simulations with these seeds");
    curve->callback([&] { action = [&](Context& c) { cmd_curve(c, cu_o); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        // Show the help of the subcommand that failed, if any.
        const CLI::App* shown = &app;
        for (const auto* sub : app.get_subcommands()) shown = sub;
        err << shown->help();
        return 1;
    }

    try {
        Context ctx{load_run_config(common.config_path ? std::optional<fs::path>(*common.config_path) : std::nullopt), out};
        override_with(common.threads, ctx.cfg.threads);
        override_with(common.seed, ctx.cfg.seed);
        if (common.sim_params_path) ctx.cfg.sim = load_sim_params(*common.sim_params_path);
        action(ctx);
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace baas::cli
