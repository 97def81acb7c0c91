#include "baas/json_io.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#include "baas/errors.hpp"

namespace baas {

void reject_unknown_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view context) {
    if (!j.is_object()) throw ValidationError(std::string(context) + ": expected a JSON object");
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ValidationError(std::string(context) + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
void read_key(const Json& j, const char* key, T& out, std::string_view context) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string(context) + "." + key + ": " + e.what());
    }
}

template void read_key(const Json&, const char*, int&, std::string_view);
template void read_key(const Json&, const char*, double&, std::string_view);
template void read_key(const Json&, const char*, bool&, std::string_view);
template void read_key(const Json&, const char*, std::uint64_t&, std::string_view);
template void read_key(const Json&, const char*, std::string&, std::string_view);
template void read_key(const Json&, const char*, std::vector<int>&, std::string_view);
template void read_key(const Json&, const char*, std::vector<double>&, std::string_view);

}  // namespace baas

namespace baas::sim {

void to_json(Json& j, const ScalingConfig& c) {
    j = Json{{"num_peers", c.num_peers},
             {"cpu_quota_per_peer", c.cpu_quota_per_peer},
             {"tx_request_rate", c.tx_request_rate}};
}

void from_json(const Json& j, ScalingConfig& c) {
    constexpr std::string_view ctx = "scaling_config";
    reject_unknown_keys(j, {"num_peers", "cpu_quota_per_peer", "tx_request_rate"}, ctx);
    read_key(j, "num_peers", c.num_peers, ctx);
    read_key(j, "cpu_quota_per_peer", c.cpu_quota_per_peer, ctx);
    read_key(j, "tx_request_rate", c.tx_request_rate, ctx);
}

void to_json(Json& j, const SimParams& p) {
    j = Json{{"endorse_ms", p.endorse_ms},
             {"validate_ms", p.validate_ms},
             {"order_ms", p.order_ms},
             {"block_size", p.block_size},
             {"block_timeout_ms", p.block_timeout_ms},
             {"tx_timeout_ms", p.tx_timeout_ms},
             {"orderer_cpu", p.orderer_cpu},
             {"total_txs", p.total_txs},
             {"service_time_cv", p.service_time_cv},
             {"host_cores", p.host_cores}};
}

void from_json(const Json& j, SimParams& p) {
    constexpr std::string_view ctx = "sim";
    reject_unknown_keys(j,
                        {"endorse_ms", "validate_ms", "order_ms", "block_size", "block_timeout_ms",
                         "tx_timeout_ms", "orderer_cpu", "total_txs", "service_time_cv", "host_cores"},
                        ctx);
    read_key(j, "endorse_ms", p.endorse_ms, ctx);
    read_key(j, "validate_ms", p.validate_ms, ctx);
    read_key(j, "order_ms", p.order_ms, ctx);
    read_key(j, "block_size", p.block_size, ctx);
    read_key(j, "block_timeout_ms", p.block_timeout_ms, ctx);
    read_key(j, "tx_timeout_ms", p.tx_timeout_ms, ctx);
    read_key(j, "orderer_cpu", p.orderer_cpu, ctx);
    read_key(j, "total_txs", p.total_txs, ctx);
    read_key(j, "service_time_cv", p.service_time_cv, ctx);
    read_key(j, "host_cores", p.host_cores, ctx);
}

}  // namespace baas::sim

namespace baas::data {

void to_json(Json& j, const GridSpec& g) {
    j = Json{{"peer_min", g.peer_min},   {"peer_max", g.peer_max},       {"max_quota", g.max_quota},
             {"rates", g.rates},         {"repetitions", g.repetitions}, {"base_seed", g.base_seed}};
}

void from_json(const Json& j, GridSpec& g) {
    constexpr std::string_view ctx = "grid";
    reject_unknown_keys(j, {"peer_min", "peer_max", "max_quota", "rates", "repetitions", "base_seed"}, ctx);
    read_key(j, "peer_min", g.peer_min, ctx);
    read_key(j, "peer_max", g.peer_max, ctx);
    read_key(j, "max_quota", g.max_quota, ctx);
    read_key(j, "rates", g.rates, ctx);
    read_key(j, "repetitions", g.repetitions, ctx);
    read_key(j, "base_seed", g.base_seed, ctx);
}

void to_json(Json& j, const Provenance& p) {
    j = Json{{"sim", p.params}};
    if (p.grid) j["grid"] = *p.grid;
    j["fingerprint"] = p.fingerprint();
}

void from_json(const Json& j, Provenance& p) {
    reject_unknown_keys(j, {"sim", "grid", "fingerprint"}, "provenance");
    p.params = j.at("sim").get<sim::SimParams>();
    if (j.contains("grid")) p.grid = j.at("grid").get<GridSpec>();
}

}  // namespace baas::data
