#include "baas/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

#include "baas/errors.hpp"

namespace baas::sim {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

enum class EventKind : std::uint8_t { arrival, endorse_done, order_done, block_timeout, validate_done };

struct Event {
    double time;
    std::uint64_t seq;
    EventKind kind;
    int station;  // peer index for peer events
    int tx;
    int block;    // block index, or timer generation for block_timeout

    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        return seq > o.seq;
    }
};

struct Job {
    int tx;
    int block;
};

// Multi-server FIFO queue.
struct Station {
    int servers = 1;
    int busy = 0;
    std::deque<Job> waiting;
};

struct Block {
    std::vector<int> txs;
    double sealed_ms = 0.0;
    std::vector<int> remaining;  // per peer: validation jobs outstanding
    std::vector<double> peer_commit_ms;
    int peers_committed = 0;
    double final_commit_ms = 0.0;
};

class ServiceSampler {
public:
    ServiceSampler(double cv, std::uint64_t seed) : rng_(seed), cv_(cv) {
        sigma_ = std::sqrt(std::log1p(cv * cv));
    }

    double draw(double mean_ms) {
        if (cv_ <= 0.0) return mean_ms;
        const double mu = std::log(mean_ms) - 0.5 * sigma_ * sigma_;
        return std::exp(mu + sigma_ * normal_(rng_));
    }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double cv_;
    double sigma_;
};

class Engine {
public:
    Engine(const ScalingConfig& config, const SimParams& params, std::uint64_t seed)
        : config_(config), params_(params), sampler_(params.service_time_cv, seed) {
        const auto n = static_cast<std::size_t>(params.total_txs);
        peers_.resize(static_cast<std::size_t>(config.num_peers));
        for (auto& p : peers_) p.servers = config.cpu_quota_per_peer;
        orderer_.servers = params.orderer_cpu;
        submit_ms_.resize(n);
        endorsed_ms_.resize(n);
        tx_block_.assign(n, -1);
        next_commit_.assign(peers_.size(), 0);
        interarrival_ms_ = 1000.0 / config.tx_request_rate;
    }

    SimResult run(bool with_trace) {
        push(0.0, EventKind::arrival, 0, 0, 0);
        while (!events_.empty()) {
            Event ev = events_.top();
            events_.pop();
            now_ = ev.time;
            dispatch(ev);
        }
        return finish(with_trace);
    }

private:
    void push(double t, EventKind kind, int station, int tx, int block) {
        events_.push(Event{t, seq_++, kind, station, tx, block});
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::arrival: on_arrival(ev.tx); break;
            case EventKind::endorse_done: on_endorse_done(ev.station, ev.tx); break;
            case EventKind::order_done: on_order_done(ev.tx); break;
            case EventKind::block_timeout: on_block_timeout(ev.block); break;
            case EventKind::validate_done: on_validate_done(ev.station, ev.block); break;
        }
    }

    void enqueue_peer(int peer, Job job, EventKind done_kind) {
        Station& st = peers_[static_cast<std::size_t>(peer)];
        if (st.busy < st.servers) {
            ++st.busy;
            start_peer_job(peer, job, done_kind);
        } else {
            // The block field distinguishes validation (>= 0) from endorsement.
            st.waiting.push_back(job);
        }
    }

    void start_peer_job(int peer, const Job& job, EventKind kind) {
        const double mean = kind == EventKind::endorse_done ? params_.endorse_ms : params_.validate_ms;
        push(now_ + sampler_.draw(mean), kind, peer, job.tx, job.block);
    }

    void release_peer(int peer) {
        Station& st = peers_[static_cast<std::size_t>(peer)];
        if (st.waiting.empty()) {
            --st.busy;
            return;
        }
        Job next = st.waiting.front();
        st.waiting.pop_front();
        start_peer_job(peer, next, next.block < 0 ? EventKind::endorse_done : EventKind::validate_done);
    }

    void on_arrival(int tx) {
        submit_ms_[static_cast<std::size_t>(tx)] = now_;
        // 1-of-N endorsement, round-robin across peers.
        enqueue_peer(tx % config_.num_peers, Job{tx, -1}, EventKind::endorse_done);
        if (tx + 1 < params_.total_txs) {
            push(static_cast<double>(tx + 1) * interarrival_ms_, EventKind::arrival, 0, tx + 1, 0);
        }
    }

    void on_endorse_done(int peer, int tx) {
        endorsed_ms_[static_cast<std::size_t>(tx)] = now_;
        release_peer(peer);
        if (orderer_.busy < orderer_.servers) {
            ++orderer_.busy;
            push(now_ + sampler_.draw(params_.order_ms), EventKind::order_done, 0, tx, 0);
        } else {
            orderer_.waiting.push_back(Job{tx, -1});
        }
    }

    void on_order_done(int tx) {
        if (orderer_.waiting.empty()) {
            --orderer_.busy;
        } else {
            Job next = orderer_.waiting.front();
            orderer_.waiting.pop_front();
            push(now_ + sampler_.draw(params_.order_ms), EventKind::order_done, 0, next.tx, 0);
        }
        if (pending_.empty()) {
            ++timer_generation_;
            push(now_ + params_.block_timeout_ms, EventKind::block_timeout, 0, 0, timer_generation_);
        }
        pending_.push_back(tx);
        if (static_cast<int>(pending_.size()) >= params_.block_size) seal_block();
    }

    void on_block_timeout(int generation) {
        if (generation == timer_generation_ && !pending_.empty()) seal_block();
    }

    void seal_block() {
        ++timer_generation_;
        const int index = static_cast<int>(blocks_.size());
        Block b;
        b.txs = std::move(pending_);
        pending_.clear();
        b.sealed_ms = now_;
        b.remaining.assign(peers_.size(), static_cast<int>(b.txs.size()));
        b.peer_commit_ms.assign(peers_.size(), 0.0);
        for (int tx : b.txs) tx_block_[static_cast<std::size_t>(tx)] = index;
        blocks_.push_back(std::move(b));
        const auto& txs = blocks_.back().txs;
        for (int p = 0; p < config_.num_peers; ++p) {
            for (int tx : txs) enqueue_peer(p, Job{tx, index}, EventKind::validate_done);
        }
    }

    void on_validate_done(int peer, int block) {
        release_peer(peer);
        const auto p = static_cast<std::size_t>(peer);
        --blocks_[static_cast<std::size_t>(block)].remaining[p];
        // Blocks commit to a peer's ledger strictly in sequence.
        while (next_commit_[p] < blocks_.size() && blocks_[next_commit_[p]].remaining[p] == 0) {
            Block& b = blocks_[next_commit_[p]];
            b.peer_commit_ms[p] = now_;
            if (++b.peers_committed == config_.num_peers) b.final_commit_ms = now_;
            ++next_commit_[p];
        }
    }

    SimResult finish(bool with_trace) {
        const auto n = static_cast<std::size_t>(params_.total_txs);
        std::size_t committed = 0;
        double last_commit = 0.0;
        std::optional<EventTrace> trace;
        if (with_trace) trace.emplace().txs.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Block& b = blocks_[static_cast<std::size_t>(tx_block_[i])];
            const bool ok = b.final_commit_ms <= submit_ms_[i] + params_.tx_timeout_ms;
            if (ok) {
                ++committed;
                last_commit = std::max(last_commit, b.final_commit_ms);
            }
            if (trace) {
                TxTrace& t = trace->txs[i];
                t.submit_ms = submit_ms_[i];
                t.endorsed_ms = endorsed_ms_[i];
                t.ordered_ms = b.sealed_ms;
                t.peer_commit_ms = b.peer_commit_ms;
                t.committed_ms = b.final_commit_ms;
                t.status = ok ? TxStatus::committed : TxStatus::timed_out;
            }
        }
        SimResult out;
        out.record.config = config_;
        out.record.success_rate = 100.0 * static_cast<double>(committed) / static_cast<double>(n);
        const double span_ms = last_commit - submit_ms_.front();
        out.record.throughput_tps =
            committed == 0 || span_ms <= 0.0 ? 0.0 : static_cast<double>(committed) * 1000.0 / span_ms;
        out.trace = std::move(trace);
        return out;
    }

    ScalingConfig config_;
    SimParams params_;
    ServiceSampler sampler_;
    double now_ = 0.0;
    double interarrival_ms_ = 0.0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;

    std::vector<Station> peers_;
    Station orderer_;
    std::vector<int> pending_;
    int timer_generation_ = 0;
    std::vector<Block> blocks_;
    std::vector<std::size_t> next_commit_;

    std::vector<double> submit_ms_;
    std::vector<double> endorsed_ms_;
    std::vector<int> tx_block_;
};

}  // namespace

std::size_t EventTrace::committed_count() const {
    return static_cast<std::size_t>(
        std::count_if(txs.begin(), txs.end(), [](const TxTrace& t) { return t.status == TxStatus::committed; }));
}

std::size_t EventTrace::timed_out_count() const { return txs.size() - committed_count(); }

void validate(const SimParams& p) {
    require(positive_finite(p.endorse_ms), "SimParams.endorse_ms must be > 0");
    require(positive_finite(p.validate_ms), "SimParams.validate_ms must be > 0");
    require(positive_finite(p.order_ms), "SimParams.order_ms must be > 0");
    require(positive_finite(p.block_timeout_ms), "SimParams.block_timeout_ms must be > 0");
    require(positive_finite(p.tx_timeout_ms), "SimParams.tx_timeout_ms must be > 0");
    require(p.block_size >= 1, "SimParams.block_size must be >= 1");
    require(p.orderer_cpu >= 1, "SimParams.orderer_cpu must be >= 1");
    require(p.total_txs >= p.block_size, "SimParams.total_txs must be >= block_size");
    require(std::isfinite(p.service_time_cv) && p.service_time_cv >= 0.0,
            "SimParams.service_time_cv must be finite and >= 0");
    require(p.host_cores > p.orderer_cpu, "SimParams.host_cores must exceed orderer_cpu");
}

void validate(const ScalingConfig& c, const SimParams& p) {
    validate(p);
    require(c.num_peers >= 1, "ScalingConfig.num_peers must be >= 1");
    require(c.cpu_quota_per_peer >= 1, "ScalingConfig.cpu_quota_per_peer must be >= 1");
    require(positive_finite(c.tx_request_rate), "ScalingConfig.tx_request_rate must be > 0");
    const long used = static_cast<long>(c.num_peers) * c.cpu_quota_per_peer + p.orderer_cpu;
    if (used > p.host_cores) {
        std::ostringstream os;
        os << "core budget exceeded: num_peers x cpu_quota_per_peer + orderer_cpu = " << used << " > "
           << p.host_cores << " host cores";
        throw ValidationError(os.str());
    }
}

SimResult simulate(const ScalingConfig& config, const SimParams& params, std::uint64_t seed,
                   bool with_trace) {
    validate(config, params);
    Engine engine(config, params, seed);
    SimResult result = engine.run(with_trace);
    result.record.seed = seed;
    return result;
}

CapacityTerms capacity_terms(const ScalingConfig& c, const SimParams& p) {
    validate(c, p);
    // Per peer, per second: (rate / n_p) * s_e + rate * s_v <= 1000 * n_c.
    const double peer = 1000.0 * c.cpu_quota_per_peer / (p.endorse_ms / c.num_peers + p.validate_ms);
    const double orderer = 1000.0 * p.orderer_cpu / p.order_ms;
    return {peer, orderer};
}

double analytic_capacity(const ScalingConfig& c, const SimParams& p) {
    const auto t = capacity_terms(c, p);
    return std::min(t.peer_tps, t.orderer_tps);
}

void write_trace_csv(const EventTrace& trace, std::ostream& out) {
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << "tx_id,submit_ms,endorsed_ms,ordered_ms,committed_ms,status\n";
    for (std::size_t i = 0; i < trace.txs.size(); ++i) {
        const TxTrace& t = trace.txs[i];
        out << i << ',' << t.submit_ms << ',' << t.endorsed_ms << ',' << t.ordered_ms << ','
            << t.committed_ms << ',' << (t.status == TxStatus::committed ? "committed" : "timed_out") << '\n';
    }
    out.precision(old_precision);
}

}  // namespace baas::sim
