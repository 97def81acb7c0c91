#include "baas/datagen.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "baas/errors.hpp"
#include "baas/hashing.hpp"
#include "baas/json_io.hpp"
#include "baas/parallel.hpp"

namespace baas::data {

std::string Provenance::fingerprint() const {
    Json j{{"sim", params}};
    if (grid) j["grid"] = *grid;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

int max_quota_for(int num_peers, int host_cores, int orderer_cpu, int cap) {
    int q = (host_cores - orderer_cpu) / num_peers;
    if (cap > 0) q = std::min(q, cap);
    return q;
}

std::vector<sim::ScalingConfig> build_grid(const GridSpec& spec, int host_cores, int orderer_cpu) {
    require(host_cores > orderer_cpu, "host_cores must exceed orderer_cpu");
    require(spec.peer_min >= 1 && spec.peer_min <= spec.peer_max, "grid peer range must be non-empty and >= 1");
    require(!spec.rates.empty(), "grid rate list must be non-empty");
    require(spec.max_quota >= 0, "grid max_quota must be >= 0");
    std::vector<double> rates = spec.rates;
    for (double r : rates) require(std::isfinite(r) && r > 0.0, "grid rates must be positive");
    std::sort(rates.begin(), rates.end());
    rates.erase(std::unique(rates.begin(), rates.end()), rates.end());

    std::vector<sim::ScalingConfig> out;
    for (int peers = spec.peer_min; peers <= spec.peer_max; ++peers) {
        const int qmax = max_quota_for(peers, host_cores, orderer_cpu, spec.max_quota);
        for (int quota = 1; quota <= qmax; ++quota) {
            for (double rate : rates) out.push_back({peers, quota, rate});
        }
    }
    if (out.empty()) throw ValidationError("grid is empty: no (peers, quota) pair fits the core budget");
    return out;
}

std::uint64_t record_seed(std::uint64_t base_seed, std::size_t config_index, int repetition) {
    return derive_seed(base_seed, config_index, static_cast<std::uint64_t>(repetition));
}

Dataset collect_dataset(const std::vector<sim::ScalingConfig>& grid, const sim::SimParams& params,
                        int repetitions, std::uint64_t base_seed, unsigned threads) {
    require(!grid.empty(), "cannot collect a dataset from an empty grid");
    require(repetitions >= 1, "repetitions must be >= 1 (dataset would be empty)");
    sim::validate(params);

    const auto reps = static_cast<std::size_t>(repetitions);
    Dataset ds;
    ds.records.resize(grid.size() * reps);
    ds.provenance = Provenance{params, std::nullopt};
    parallel_for(ds.records.size(), threads, [&](std::size_t slot) {
        const std::size_t ci = slot / reps;
        const int rep = static_cast<int>(slot % reps);
        const auto& cfg = grid[ci];
        try {
            ds.records[slot] = sim::simulate_record(cfg, params, record_seed(base_seed, ci, rep));
        } catch (const ValidationError& e) {
            std::ostringstream os;
            os << "config #" << ci << " (peers=" << cfg.num_peers << ", quota=" << cfg.cpu_quota_per_peer
               << ", rate=" << cfg.tx_request_rate << "): " << e.what();
            throw ValidationError(os.str());
        }
    });
    return ds;
}

std::string format_double(double v) {
    std::array<char, 400> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
    return std::string(buf.data(), res.ptr);
}

void write_csv(const Dataset& dataset, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : dataset.records) {
        out << r.config.num_peers << ',' << r.config.cpu_quota_per_peer << ','
            << format_double(r.config.tx_request_rate) << ',' << format_double(r.success_rate) << ','
            << format_double(r.throughput_tps) << ',' << r.seed << '\n';
    }
}

namespace {

constexpr std::array<const char*, 6> kColumns{"num_peers",      "cpu_quota_per_peer", "tx_request_rate",
                                              "success_rate",   "throughput_tps",     "seed"};

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

template <typename T>
T parse_cell(const std::string& text, const std::string& where, const char* column) {
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || text.empty()) {
        throw IoError(where + ", column " + column + ": cannot parse '" + text + "'");
    }
    return value;
}

}  // namespace

Dataset read_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(source_name + ": empty file (missing header)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_row(line);
    std::array<int, kColumns.size()> index{};
    index.fill(-1);
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto it = std::find_if(kColumns.begin(), kColumns.end(), [&](const char* n) { return header[c] == n; });
        if (it == kColumns.end()) throw IoError(source_name + ": unknown header column '" + header[c] + "'");
        auto k = static_cast<std::size_t>(it - kColumns.begin());
        if (index[k] >= 0) throw IoError(source_name + ": duplicate header column '" + header[c] + "'");
        index[k] = static_cast<int>(c);
    }
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
        if (index[k] < 0) throw IoError(source_name + ": missing column '" + kColumns[k] + "'");
    }

    Dataset ds;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_row(line);
        const std::string where = source_name + ", line " + std::to_string(line_no);
        if (cells.size() != header.size()) {
            throw IoError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                          std::to_string(cells.size()));
        }
        auto cell = [&](std::size_t k) -> const std::string& { return cells[static_cast<std::size_t>(index[k])]; };
        sim::PerfRecord r;
        r.config.num_peers = parse_cell<int>(cell(0), where, kColumns[0]);
        r.config.cpu_quota_per_peer = parse_cell<int>(cell(1), where, kColumns[1]);
        r.config.tx_request_rate = parse_cell<double>(cell(2), where, kColumns[2]);
        r.success_rate = parse_cell<double>(cell(3), where, kColumns[3]);
        r.throughput_tps = parse_cell<double>(cell(4), where, kColumns[4]);
        r.seed = parse_cell<std::uint64_t>(cell(5), where, kColumns[5]);
        if (r.success_rate < 0.0 || r.success_rate > 100.0) {
            throw IoError(where + ", column success_rate: value outside [0,100]");
        }
        if (r.throughput_tps < 0.0) throw IoError(where + ", column throughput_tps: negative value");
        ds.records.push_back(r);
    }
    return ds;
}

std::filesystem::path meta_path(const std::filesystem::path& csv_path) {
    return std::filesystem::path(csv_path.string() + ".meta.json");
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
        write_csv(dataset, out);
        if (!out) throw IoError("write failed: '" + path.string() + "'");
    }
    const auto meta = meta_path(path);
    if (dataset.provenance) {
        std::ofstream out(meta, std::ios::binary);
        if (!out) throw IoError("cannot open '" + meta.string() + "' for writing");
        out << Json(*dataset.provenance).dump(2) << '\n';
    } else {
        std::error_code ec;
        std::filesystem::remove(meta, ec);
    }
}

Dataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
    Dataset ds = read_csv(in, path.string());
    const auto meta = meta_path(path);
    if (std::filesystem::exists(meta)) {
        std::ifstream min(meta, std::ios::binary);
        try {
            ds.provenance = Json::parse(min).get<Provenance>();
        } catch (const nlohmann::json::exception& e) {
            throw IoError("malformed dataset metadata '" + meta.string() + "': " + e.what());
        }
    }
    return ds;
}

}  // namespace baas::data
