#include "baas/run_config.hpp"

#include <cstdlib>
#include <fstream>

#include "baas/errors.hpp"
#include "baas/parallel.hpp"

namespace baas::ml {

void to_json(Json& j, const ForestHyperparams& hp) {
    j = Json{{"n_estimators", hp.n_estimators},
             {"max_depth", hp.max_depth},
             {"min_samples_split", hp.min_samples_split},
             {"min_samples_leaf", hp.min_samples_leaf}};
}

void from_json(const Json& j, ForestHyperparams& hp) {
    constexpr std::string_view ctx = "forest";
    reject_unknown_keys(j, {"n_estimators", "max_depth", "min_samples_split", "min_samples_leaf"}, ctx);
    read_key(j, "n_estimators", hp.n_estimators, ctx);
    read_key(j, "max_depth", hp.max_depth, ctx);
    read_key(j, "min_samples_split", hp.min_samples_split, ctx);
    read_key(j, "min_samples_leaf", hp.min_samples_leaf, ctx);
}

}  // namespace baas::ml

namespace baas {

namespace {

void plan_from_json(const Json& j, plan::PlanQuery& q) {
    constexpr std::string_view ctx = "plan";
    reject_unknown_keys(j,
                        {"request_rate", "min_success_rate", "min_throughput_tps", "min_throughput_frac",
                         "success_slack", "w_c", "w_p", "n_c", "n_p"},
                        ctx);
    read_key(j, "request_rate", q.request_rate, ctx);
    read_key(j, "min_success_rate", q.min_success_rate, ctx);
    if (j.contains("min_throughput_tps") && !j.at("min_throughput_tps").is_null()) {
        double v = 0.0;
        read_key(j, "min_throughput_tps", v, ctx);
        q.min_throughput_tps = v;
    }
    read_key(j, "min_throughput_frac", q.min_throughput_frac, ctx);
    read_key(j, "success_slack", q.success_slack, ctx);
    read_key(j, "w_c", q.w_c, ctx);
    read_key(j, "w_p", q.w_p, ctx);
    read_key(j, "n_c", q.n_c, ctx);
    read_key(j, "n_p", q.n_p, ctx);
}

Json plan_to_json(const plan::PlanQuery& q) {
    Json j{{"request_rate", q.request_rate},
           {"min_success_rate", q.min_success_rate},
           {"min_throughput_frac", q.min_throughput_frac},
           {"success_slack", q.success_slack},
           {"w_c", q.w_c},
           {"w_p", q.w_p},
           {"n_c", q.n_c},
           {"n_p", q.n_p}};
    j["min_throughput_tps"] = q.min_throughput_tps ? Json(*q.min_throughput_tps) : Json(nullptr);
    return j;
}

}  // namespace

unsigned RunConfig::effective_threads() const { return threads == 0 ? default_threads() : threads; }

void RunConfig::validate() const {
    sim::validate(sim);
    data::build_grid(grid, sim.host_cores, sim.orderer_cpu);
    require(grid.repetitions >= 1, "grid.repetitions must be >= 1");
    ml::validate(success_forest);
    ml::validate(throughput_forest);
    plan::validate(plan);
}

RunConfig run_config_from_json(const Json& j) {
    reject_unknown_keys(j, {"sim", "grid", "forest", "plan", "paths", "seed", "threads"}, "config");
    RunConfig c;
    if (j.contains("sim")) sim::from_json(j.at("sim"), c.sim);
    if (j.contains("grid")) data::from_json(j.at("grid"), c.grid);
    if (j.contains("forest")) {
        const Json& f = j.at("forest");
        reject_unknown_keys(f, {"success", "throughput"}, "forest");
        if (f.contains("success")) ml::from_json(f.at("success"), c.success_forest);
        if (f.contains("throughput")) ml::from_json(f.at("throughput"), c.throughput_forest);
    }
    if (j.contains("plan")) plan_from_json(j.at("plan"), c.plan);
    if (j.contains("paths")) {
        const Json& p = j.at("paths");
        constexpr std::string_view ctx = "paths";
        reject_unknown_keys(p, {"dataset", "success_model", "throughput_model", "sim_params", "reports"}, ctx);
        read_key(p, "dataset", c.paths.dataset, ctx);
        read_key(p, "success_model", c.paths.success_model, ctx);
        read_key(p, "throughput_model", c.paths.throughput_model, ctx);
        read_key(p, "sim_params", c.paths.sim_params, ctx);
        read_key(p, "reports", c.paths.reports, ctx);
    }
    read_key(j, "seed", c.seed, "config");
    int threads = static_cast<int>(c.threads);
    read_key(j, "threads", threads, "config");
    require(threads >= 0, "config.threads must be >= 0");
    c.threads = static_cast<unsigned>(threads);
    c.validate();
    return c;
}

Json run_config_to_json(const RunConfig& c) {
    return Json{{"sim", c.sim},
                {"grid", c.grid},
                {"forest", {{"success", c.success_forest}, {"throughput", c.throughput_forest}}},
                {"plan", plan_to_json(c.plan)},
                {"paths",
                 {{"dataset", c.paths.dataset},
                  {"success_model", c.paths.success_model},
                  {"throughput_model", c.paths.throughput_model},
                  {"sim_params", c.paths.sim_params},
                  {"reports", c.paths.reports}}},
                {"seed", c.seed},
                {"threads", c.threads}};
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path) {
    std::optional<std::filesystem::path> source = path;
    if (!source) {
        if (const char* env = std::getenv(kConfigEnvVar); env && *env) source = env;
    }
    if (!source) return RunConfig{};
    std::ifstream in(*source, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + source->string() + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("config '" + source->string() + "': " + e.what());
    }
    try {
        return run_config_from_json(j);
    } catch (const ValidationError& e) {
        throw ValidationError("config '" + source->string() + "': " + e.what());
    }
}

}  // namespace baas
