#include "qrsim/engine/simulator.hpp"

#include "qrsim/engine/link_model.hpp"
#include "qrsim/engine/purification.hpp"
#include "qrsim/error.hpp"
#include "qrsim/network/routing.hpp"
#include "qrsim/state/measurement.hpp"
#include "qrsim/state/teleport.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace qrsim::engine {

std::string to_string(ConnState s) {
    switch (s) {
        case ConnState::SettingUp: return "setting_up";
        case ConnState::Running: return "running";
        case ConnState::Aborted: return "aborted";
        case ConnState::Done: return "done";
    }
    return "?";
}

const ConnectionStats* RunResult::connection(const std::string& id) const {
    for (const auto& c : connections)
        if (c.id == id) return &c;
    return nullptr;
}

bool RunResult::conserved() const {
    std::size_t total = 0;
    for (const auto& [_, n] : fates) total += n;
    return total == pairs_created;
}

net::Scenario honest_baseline(const net::Scenario& scenario) {
    net::Scenario s = scenario;
    s.attacks.clear();
    return s;
}

namespace {

using adversary::AttackAction;
using adversary::AttackKind;
using state::Fate;
using state::PairId;
using state::Side;

constexpr int kLeft = 0;
constexpr int kRight = 1;

struct SlotRef {
    int conn = 0;
    int node = 0;  // index into the connection path
    int side = 0;  // kLeft: toward link node-1, kRight: toward link node
    bool operator==(const SlotRef& o) const { return conn == o.conn && node == o.node && side == o.side; }
};

struct Pending {
    int attack = -1;
    std::string attacker;
    state::PauliChannel channel;
    bool leaks = false;
    bool skips_sampled = false;
    bool evades_link_sampling = false;
};

struct RecMeta {
    std::vector<SlotRef> refs;
    std::vector<int> swaps;
    std::vector<Pending> pending;
    std::set<int> touched;
    std::optional<AttackerMeasurement> attacker_meas[2];
    bool complete = false;
};

struct SwapInfo {
    std::string dest[2];
    int conn[2] = {-1, -1};
    bool arrived[2] = {false, false};
};

struct Conn {
    ConnectionStats stats;
    net::Demand demand;
    net::Path path;
    std::vector<const net::LinkSpec*> links;
    std::vector<std::array<std::optional<PairId>, 2>> slots;
    std::vector<char> generating;
    std::vector<char> swap_pending;
    std::vector<std::unique_ptr<PurifyPump>> pumps;
    std::vector<Rng> link_rng;
    Rng secret;
    Rng app;
    double rtt = 0.0;
    double sacrifice = 0.1;
    bool flagged = false;
    std::set<int> touched;
    std::optional<KeySessionBuilder> key;
    monitor::CertAccumulator e2e;
    bool e2e_fresh = false;
    double fidelity_sum = 0.0;
    long fidelity_n = 0;
    double teleport_sum = 0.0;
    bool started = false;

    int hops() const { return static_cast<int>(links.size()); }
    bool terminal() const { return stats.state == ConnState::Aborted || stats.state == ConnState::Done; }
};

struct Event {
    double t;
    bool deadline;  // deadlines run after every other event with the same timestamp
    std::uint64_t seq;
    bool essential;
    std::function<void()> fn;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.t, a.deadline, a.seq) > std::tie(b.t, b.deadline, b.seq);
    }
};

state::MeasurementBasis basis_of(int zx) { return zx ? state::MeasurementBasis::x() : state::MeasurementBasis::z(); }

class Sim {
public:
    Sim(const net::Scenario& s, const RunOptions& o)
        : sc_(s),
          topo_(s.topology),
          seed_(o.seed.value_or(s.seed)),
          scope_(o.cert_scope.value_or(s.protocol.cert_scope)),
          log_(o.keep_log),
          plan_(adversary::build_scripts(s)),
          reputation_(s.protocol.monitor.policy, s.protocol.monitor.k),
          monitor_rng_(derive_stream(seed_, "monitor")) {
        actions_ = plan_.actions();
        for (std::size_t i = 0; i < actions_.size(); ++i) {
            attack_index_[actions_[i]->id] = static_cast<int>(i);
            AttackEffect e;
            e.attack_id = actions_[i]->id;
            e.attacker = actions_[i]->attacker;
            e.kind = adversary::to_string(actions_[i]->kind);
            e.represents = std::string(adversary::entry(actions_[i]->kind).represents);
            effects_.push_back(std::move(e));
        }
        for (const auto& l : topo_.links()) link_stats_[l.id].id = l.id;
        thresholds_ = {s.protocol.monitor.fidelity_floor, s.protocol.monitor.qber_ceiling,
                       s.protocol.monitor.min_samples};
        for (const auto& d : s.demands) add_connection(d, false);
    }

    RunResult run();

private:
    // ---- infrastructure -------------------------------------------------------------
    void schedule(double t, bool essential, std::function<void()> fn, bool deadline = false) {
        if (essential) ++essential_pending_;
        queue_.push(Event{t, deadline, next_seq_++, essential, std::move(fn)});
    }

    template <class F>
    void log(EventKind kind, const std::string& node, const std::string& conn, F&& detail, int attack = -1,
             std::string verdict = {}, std::vector<std::string> attributed = {}) {
        if (!log_.keeping()) {
            log_.add({});
            return;
        }
        LogRow r;
        r.time_s = now_;
        r.seq = log_.count();
        r.kind = kind;
        r.node = node;
        r.connection = conn;
        r.detail = detail();
        if (attack >= 0) r.attack = actions_[attack]->id;
        r.verdict = std::move(verdict);
        r.attacks = std::move(attributed);
        log_.add(std::move(r));
    }

    template <class F>
    void log_attack(int idx, const std::string& node, const std::string& conn, F&& detail) {
        auto& e = effects_[idx];
        ++e.actions;
        if (!e.first_effect_s) e.first_effect_s = now_;
        log(EventKind::AttackAction, node, conn, std::forward<F>(detail), idx);
    }

    Rng& attacker_rng(const std::string& attacker) {
        auto it = attacker_rngs_.find(attacker);
        if (it == attacker_rngs_.end())
            it = attacker_rngs_.emplace(attacker, derive_stream(seed_, "attacker/" + attacker)).first;
        return it->second;
    }

    Rng& node_rng(const std::string& node) {
        auto it = node_rngs_.find(node);
        if (it == node_rngs_.end()) it = node_rngs_.emplace(node, derive_stream(seed_, "node/" + node)).first;
        return it->second;
    }

    const net::ClassicalChannel& channel(const std::string& a, const std::string& b) {
        auto key = net::channel_key(a, b);
        auto it = channels_.find(key);
        if (it == channels_.end()) it = channels_.emplace(key, topo_.classical_channel(a, b)).first;
        return it->second;
    }

    bool can_forge(const std::string& attacker, const std::string& a, const std::string& b) {
        if (!channel(a, b).authenticated) return true;
        if (plan_.script(attacker).knowledge.holds_auth_keys) return true;
        auto it = stolen_keys_.find(attacker);
        return it != stolen_keys_.end() && (it->second.count(a) || it->second.count(b));
    }

    bool removed(const std::string& node) const {
        return isolated_.count(node) || failed_.count(node) || destroyed_.count(node);
    }

    std::set<std::string> removed_nodes() const {
        std::set<std::string> out = isolated_;
        out.insert(failed_.begin(), failed_.end());
        out.insert(destroyed_.begin(), destroyed_.end());
        return out;
    }

    std::optional<PairId>& slot(const SlotRef& r) { return conns_[r.conn].slots[r.node][r.side]; }
    bool is_endpoint(const SlotRef& r) const {
        const auto& c = conns_[r.conn];
        return (r.node == 0 && r.side == kRight) || (r.node == c.hops() && r.side == kLeft);
    }
    const std::string& node_of(const SlotRef& r) const { return conns_[r.conn].path.nodes[r.node]; }

    std::vector<std::string> names(const std::set<int>& idx) const {
        std::vector<std::string> out;
        for (int i : idx) out.push_back(actions_[i]->id);
        return out;
    }

    // ---- classical plane ------------------------------------------------------------
    enum class Msg { Setup, Ack, Frame, Cert, Accusation, Report };

    static const char* msg_name(Msg m) {
        switch (m) {
            case Msg::Setup: return "setup";
            case Msg::Ack: return "ack";
            case Msg::Frame: return "frame";
            case Msg::Cert: return "cert";
            case Msg::Accusation: return "accusation";
            case Msg::Report: return "report";
        }
        return "?";
    }

    /// Sends a message; `on_arrive` receives the index of an attack that altered it in
    /// transit, or -1.
    void send(const std::string& from, const std::string& to, Msg kind, int conn, bool essential,
              std::function<void(int)> on_arrive) {
        const std::string cid = conn >= 0 ? conns_[conn].stats.id : std::string();
        double latency = channel(from, to).latency_s;
        int altered = -1;
        if (!plan_.empty()) {
            if (kind == Msg::Setup || kind == Msg::Frame) {
                if (const auto* a = plan_.node_behavior(from, AttackKind::RerouteMessages, now_)) {
                    log_attack(attack_index_.at(a->id), from, cid,
                               [&] { return fmt::format("misrouted {} to={}", msg_name(kind), to); });
                    ++effects_[attack_index_.at(a->id)].dropped_messages;
                    return;
                }
            }
            for (const auto* a : plan_.on_channel(from, to, AttackKind::EavesdropClassical, now_))
                log_attack(attack_index_.at(a->id), from, cid,
                           [&] { return fmt::format("observed {} {}->{}", msg_name(kind), from, to); });
            for (const auto* a : plan_.on_channel(from, to, AttackKind::DropMessages, now_)) {
                if (!bernoulli(attacker_rng(a->attacker), a->strength)) continue;
                const int idx = attack_index_.at(a->id);
                ++effects_[idx].dropped_messages;
                log_attack(idx, from, cid, [&] { return fmt::format("dropped {} {}->{}", msg_name(kind), from, to); });
                return;
            }
            for (const auto* a : plan_.on_channel(from, to, AttackKind::ClassicalDos, now_)) {
                const int idx = attack_index_.at(a->id);
                if (bernoulli(attacker_rng(a->attacker), a->suppress)) {
                    ++effects_[idx].dropped_messages;
                    log_attack(idx, from, cid,
                               [&] { return fmt::format("suppressed {} {}->{}", msg_name(kind), from, to); });
                    return;
                }
                latency += a->delay_s;
                log_attack(idx, from, cid,
                           [&] { return fmt::format("delayed {} {}->{} by={}", msg_name(kind), from, to, a->delay_s); });
            }
            for (const auto* a : plan_.on_channel(from, to, AttackKind::ModifyMessages, now_)) {
                if (!bernoulli(attacker_rng(a->attacker), a->strength)) continue;
                const int idx = attack_index_.at(a->id);
                if (!can_forge(a->attacker, from, to)) {
                    ++effects_[idx].dropped_messages;
                    log_attack(idx, from, cid, [&] {
                        return fmt::format("modified {} {}->{} rejected by integrity check", msg_name(kind), from, to);
                    });
                    return;
                }
                altered = idx;
                ++effects_[idx].forged_messages;
                log_attack(idx, from, cid, [&] { return fmt::format("modified {} {}->{}", msg_name(kind), from, to); });
                break;
            }
        }
        log(EventKind::ClassicalMessage, from, cid,
            [&] { return fmt::format("{} to={} latency={:.9f}", msg_name(kind), to, latency); });
        schedule(now_ + latency, essential, [fn = std::move(on_arrive), altered] { fn(altered); });
    }

    // ---- connections ----------------------------------------------------------------
    int add_connection(const net::Demand& d, bool injected) {
        Conn c;
        c.demand = d;
        c.stats.id = d.id;
        c.stats.src = d.src;
        c.stats.dst = d.dst;
        c.stats.application = net::to_string(d.application);
        c.stats.injected = injected;
        c.secret = derive_stream(seed_, "conn/" + d.id + "/cert-secret");
        c.app = derive_stream(seed_, "conn/" + d.id + "/app");
        c.sacrifice = d.sacrifice_fraction.value_or(sc_.protocol.sacrifice_fraction);
        conns_.push_back(std::move(c));
        const int ci = static_cast<int>(conns_.size()) - 1;
        schedule(std::max(d.start_s, now_), false, [this, ci] { start_connection(ci); });
        return ci;
    }

    void set_state(int ci, ConnState s, const std::string& cause = {}) {
        auto& c = conns_[ci];
        c.stats.state = s;
        if (!cause.empty()) c.stats.abort_cause = cause;
        if (s == ConnState::Running) c.stats.running_at_s = now_;
        if (s == ConnState::Aborted || s == ConnState::Done) c.stats.finished_at_s = now_;
        log(EventKind::ConnectionState, c.stats.src, c.stats.id, [&] {
            return cause.empty() ? to_string(s) : fmt::format("{} cause={}", to_string(s), cause);
        });
    }

    void start_connection(int ci) {
        auto& c = conns_[ci];
        c.started = true;
        const auto excluded = removed_nodes();
        auto honest = net::shortest_path(topo_, c.demand.src, c.demand.dst, sc_.protocol.routing_cost, excluded,
                                         down_links_);
        std::optional<net::Path> route = honest;
        int hole = -1;
        for (const auto* a : plan_.of_kind(AttackKind::PathBlackHole)) {
            if (!a->window.contains(now_) || a->node == c.demand.src) continue;
            if (std::find(a->advertised.begin(), a->advertised.end(), c.demand.dst) == a->advertised.end()) continue;
            if (auto p = net::shortest_path(topo_, c.demand.src, a->node, sc_.protocol.routing_cost, excluded,
                                            down_links_)) {
                route = p;
                hole = attack_index_.at(a->id);
                break;
            }
        }
        if (!route) {
            set_state(ci, ConnState::Aborted, "NoRoute");
            return;
        }
        const net::Path& timing = honest ? *honest : *route;
        double one_way = 0.0;
        for (std::size_t i = 0; i + 1 < timing.nodes.size(); ++i)
            one_way += channel(timing.nodes[i], timing.nodes[i + 1]).latency_s;
        c.rtt = 2.0 * one_way;
        c.path = *route;
        c.stats.path = route->nodes;
        c.stats.hops = route->hops();
        log(EventKind::ConnectionState, c.demand.src, c.stats.id, [&] {
            std::string p;
            for (const auto& n : route->nodes) p += (p.empty() ? "" : ">") + n;
            return fmt::format("setting_up path={}", p);
        });
        schedule(now_ + sc_.protocol.setup_timeout_rtts * c.rtt, false, [this, ci] {
            if (conns_[ci].stats.state != ConnState::SettingUp) return;
            log(EventKind::Timeout, conns_[ci].stats.src, conns_[ci].stats.id, [] { return "path_setup"; });
            set_state(ci, ConnState::Aborted, "PathSetupTimeout");
        }, true);
        forward_setup(ci, 0, hole);
    }

    void forward_setup(int ci, int i, int hole) {
        auto& c = conns_[ci];
        if (c.stats.state != ConnState::SettingUp) return;
        const int last = static_cast<int>(c.path.nodes.size()) - 1;
        const std::string& here = c.path.nodes[i];
        if (i == last) {
            if (hole >= 0) {
                log_attack(hole, here, c.stats.id, [&] { return fmt::format("absorbed setup for dst={}", c.demand.dst); });
                return;
            }
            send(here, c.demand.src, Msg::Ack, ci, false, [this, ci](int) { on_setup_ack(ci); });
            return;
        }
        send(here, c.path.nodes[i + 1], Msg::Setup, ci, false,
             [this, ci, i, hole](int) { forward_setup(ci, i + 1, hole); });
    }

    void on_setup_ack(int ci) {
        auto& c = conns_[ci];
        if (c.stats.state != ConnState::SettingUp) return;
        const int h = c.path.hops();
        for (const auto& lid : c.path.links) c.links.push_back(&topo_.link(lid));
        c.slots.assign(h + 1, {});
        c.generating.assign(h, 0);
        c.swap_pending.assign(h + 1, 0);
        c.pumps.resize(h);
        for (int i = 0; i < h; ++i) {
            c.link_rng.push_back(derive_stream(seed_, "link/" + c.links[i]->id + "/" + c.stats.id));
            if (c.demand.link_f_target > 0.0) {
                const auto& na = topo_.node(c.links[i]->a);
                const auto& nb = topo_.node(c.links[i]->b);
                if (na.qubits.buffer > 0 && nb.qubits.buffer > 0)
                    c.pumps[i] = std::make_unique<PurifyPump>(c.demand.link_f_target, c.demand.purify_budget);
                else
                    c.stats.purify_disabled = true;
            }
        }
        if (c.demand.application == net::Application::Bbm92) {
            bool forged = false;
            for (const auto* a : plan_.of_kind(AttackKind::MitmBbm92))
                if (a->demands.front() == c.demand.id && a->window.contains(now_) &&
                    can_forge(a->attacker, c.demand.src, c.demand.dst))
                    forged = true;
            c.key.emplace(c.demand.key_length, sc_.protocol.qber_threshold, forged);
        }
        set_state(ci, ConnState::Running);
        for (const auto* l : c.links) ++link_users_[l->id];
        for (int i = 0; i < h; ++i) schedule_generation(ci, i);
    }

    void release_links(int ci) {
        auto& c = conns_[ci];
        if (c.stats.state != ConnState::Running) return;
        for (const auto* l : c.links) --link_users_[l->id];
    }

    void free_slot(const SlotRef& r, Fate fate) {
        auto& s = slot(r);
        if (!s) return;
        const PairId pid = *s;
        s.reset();
        auto it = meta_.find(pid);
        if (it != meta_.end()) {
            auto& refs = it->second.refs;
            refs.erase(std::remove(refs.begin(), refs.end(), r), refs.end());
        }
        if (!store_.is_live(pid)) return;
        const auto& rec = store_.get(pid);
        const Side side = rec.side_of(node_of(r));
        if (!rec.half_consumed[static_cast<int>(side)]) store_.consume_half(pid, side, fate);
        if (!store_.is_live(pid)) meta_.erase(pid);
    }

    void clear_connection(int ci, Fate fate, int attack = -1) {
        auto& c = conns_[ci];
        for (int j = 0; j < static_cast<int>(c.slots.size()); ++j)
            for (int s = 0; s < 2; ++s) {
                if (!c.slots[j][s]) continue;
                const PairId pid = *c.slots[j][s];
                if (fate == Fate::Destroyed && store_.is_live(pid)) {
                    ++ledger_.destroyed_by_attack;
                    if (attack >= 0) ++effects_[attack].destroyed_pairs;
                }
                free_slot({ci, j, s}, fate);
            }
        for (auto& p : c.pumps)
            if (p)
                for (auto id : p->drain()) {
                    store_.consume(id, fate);
                    meta_.erase(id);
                }
    }

    void abort_connection(int ci, const std::string& cause, int attack = -1, Fate fate = Fate::Discarded) {
        auto& c = conns_[ci];
        if (c.terminal()) return;
        release_links(ci);
        clear_connection(ci, fate, attack);
        if (attack >= 0) ++effects_[attack].aborted_connections;
        set_state(ci, ConnState::Aborted, cause);
    }

    void finish_connection(int ci) {
        auto& c = conns_[ci];
        if (c.terminal()) return;
        release_links(ci);
        clear_connection(ci, Fate::Discarded);
        set_state(ci, ConnState::Done);
    }

    bool all_terminal() const {
        for (const auto& c : conns_)
            if (!c.terminal()) return false;
        return true;
    }

    // ---- quantum plane --------------------------------------------------------------
    void schedule_generation(int ci, int i) {
        auto& c = conns_[ci];
        if (c.stats.state != ConnState::Running || c.generating[i]) return;
        if (c.slots[i][kRight] || c.slots[i + 1][kLeft]) return;
        const auto& l = *c.links[i];
        if (down_links_.count(l.id)) return;
        const int users = std::max(1, link_users_[l.id]);
        const long k = attempts_until_success(attempt_probability(l), c.link_rng[i]);
        const double t = now_ + static_cast<double>(k) * users / l.attempt_rate_hz + channel(l.a, l.b).latency_s;
        c.stats.attempts += k;
        link_stats_[l.id].attempts += k;
        c.generating[i] = 1;
        schedule(t, false, [this, ci, i, k] { on_link_pair(ci, i, k); });
    }

    void realize(PairId pid, bool sampled, bool link_scope) {
        auto it = meta_.find(pid);
        if (it == meta_.end() || it->second.pending.empty()) return;
        auto pending = std::move(it->second.pending);
        it->second.pending.clear();
        for (const auto& p : pending) {
            if (sampled && p.skips_sampled) continue;
            if (sampled && link_scope && p.evades_link_sampling) continue;
            store_.apply_channel(pid, p.channel, Side::A);
            if (p.leaks) store_.get_mut(pid).tag_leak(p.attacker);
        }
    }

    void on_link_pair(int ci, int i, long k) {
        auto& c = conns_[ci];
        c.generating[i] = 0;
        if (c.stats.state != ConnState::Running) return;
        const auto& l = *c.links[i];
        if (down_links_.count(l.id)) return;
        ++link_stats_[l.id].successes;
        ++c.stats.link_pairs;
        const std::string& na = c.path.nodes[i];
        const std::string& nb = c.path.nodes[i + 1];
        PairId pid = store_.create_werner(na, nb, l.base_fidelity, now_);
        meta_[pid];
        const auto kind = l.architecture == net::Architecture::MemoryToMemory ? EventKind::LinkAttempt
                                                                                : EventKind::BSAOutcome;
        log(kind, na, c.stats.id, [&] { return fmt::format("link={} attempts={} pair={}", l.id, k, pid); });

        if (!plan_.empty()) {
            for (auto& t : plan_.on_link_pair(l.id, na, nb, now_)) {
                const int idx = attack_index_.at(t.attack_id);
                const auto* a = actions_[idx];
                if ((a->kind == AttackKind::InterceptResend || a->kind == AttackKind::EavesdropQuantum) &&
                    !bernoulli(attacker_rng(a->attacker), a->strength))
                    continue;
                c.touched.insert(idx);
                link_touched_[l.id].insert(idx);
                if (t.destroys) {
                    store_.consume(pid, Fate::Destroyed);
                    meta_.erase(pid);
                    ++ledger_.destroyed_by_attack;
                    ++effects_[idx].destroyed_pairs;
                    log_attack(idx, na, c.stats.id, [&] { return fmt::format("read and destroyed pair={}", pid); });
                    schedule_generation(ci, i);
                    return;
                }
                auto& m = meta_[pid];
                m.touched.insert(idx);
                m.pending.push_back({idx, t.attacker, t.channel, t.leaks, t.skips_sampled, t.evades_link_sampling});
                log_attack(idx, na, c.stats.id, [&] { return fmt::format("tampered pair={} link={}", pid, l.id); });
            }
        }

        if (scope_ == net::CertScope::Link && bernoulli(c.secret, c.sacrifice)) {
            realize(pid, true, true);
            const auto sample = draw_sample(c.secret);
            measure_joint(pid, na, sample, c.app);
            store_.consume(pid, Fate::Sacrificed);
            meta_.erase(pid);
            ++c.stats.sacrificed;
            log(EventKind::CertSample, na, c.stats.id, [&] { return fmt::format("link={} pair={}", l.id, pid); });
            auto s = last_sample_;
            const std::string lid = l.id;
            send(na, nb, Msg::Cert, ci, true, [this, s, lid](int altered) mutable {
                if (altered >= 0) s.bit_b = s.bit_a;
                link_acc_[lid].add(s);
                link_fresh_.insert(lid);
            });
            schedule_generation(ci, i);
            return;
        }

        if (c.pumps[i]) {
            auto& pump = *c.pumps[i];
            std::set<int> touched = meta_[pid].touched;
            const int before = pump.rounds();
            auto out = pump.feed(store_, pid, now_, c.link_rng[i], [this, &touched](PairId x) {
                realize(x, false, false);
                auto it = meta_.find(x);
                if (it != meta_.end()) touched.insert(it->second.touched.begin(), it->second.touched.end());
            });
            const int rounds = pump.rounds() - before;
            c.stats.purify_rounds += rounds;
            if (rounds > 0)
                log(EventKind::PurifyRound, na, c.stats.id,
                    [&] { return fmt::format("link={} rounds={} parked={}", l.id, rounds, pump.parked()); });
            if (!out && pump.exhausted()) {
                out = pump.take_best(store_);
                for (auto id : pump.drain()) {
                    store_.consume(id, Fate::Discarded);
                    meta_.erase(id);
                }
                ++c.stats.purify_target_missed;
                log(EventKind::PurifyRound, na, c.stats.id, [&] { return fmt::format("link={} target_missed", l.id); });
            }
            for (auto it = meta_.begin(); it != meta_.end();)
                it = (it->second.refs.empty() && !store_.is_live(it->first)) ? meta_.erase(it) : std::next(it);
            if (!out) {
                schedule_generation(ci, i);
                return;
            }
            if (*out != pid) {
                auto& m = meta_[*out];
                m.touched = touched;
            }
            pid = *out;
        }

        auto& m = meta_[pid];
        m.refs = {{ci, i, kRight}, {ci, i + 1, kLeft}};
        c.slots[i][kRight] = pid;
        c.slots[i + 1][kLeft] = pid;
        after_place(pid);
    }

    void after_place(PairId pid) {
        auto it = meta_.find(pid);
        if (it == meta_.end() || !store_.is_live(pid)) return;
        auto& m = it->second;
        const auto& rec = store_.get(pid);
        int settled = (rec.half_consumed[0] ? 1 : 0) + (rec.half_consumed[1] ? 1 : 0);
        for (const auto& r : m.refs) settled += is_endpoint(r);
        if (settled == 2 && !m.complete) {
            m.complete = true;
            if (!m.swaps.empty() && !m.refs.empty()) {
                const double rtt = conns_[m.refs.front().conn].rtt;
                schedule(now_ + sc_.protocol.setup_timeout_rtts * rtt, false, [this, pid] { on_frame_timeout(pid); }, true);
            }
        }
        auto refs = m.refs;
        std::sort(refs.begin(), refs.end(), [this](const SlotRef& a, const SlotRef& b) {
            const double h = conns_[a.conn].hops() / 2.0;
            const double da = std::abs(a.node - h), db = std::abs(b.node - conns_[b.conn].hops() / 2.0);
            return da != db ? da < db : a.node < b.node;
        });
        for (const auto& r : refs) {
            if (is_endpoint(r))
                try_deliver(r.conn);
            else
                maybe_swap(r.conn, r.node);
        }
    }

    void maybe_swap(int ci, int j) {
        auto& c = conns_[ci];
        if (c.swap_pending[j]) return;
        c.swap_pending[j] = 1;
        schedule(now_, false, [this, ci, j] {
            conns_[ci].swap_pending[j] = 0;
            execute_swap(ci, j);
        });
    }

    const AttackAction* demand_behavior(const std::string& node, AttackKind kind, const std::string& demand) {
        const auto* a = plan_.empty() ? nullptr : plan_.node_behavior(node, kind, now_);
        if (!a) return nullptr;
        return std::find(a->demands.begin(), a->demands.end(), demand) != a->demands.end() ? a : nullptr;
    }

    void execute_swap(int ci, int j) {
        auto& c = conns_[ci];
        if (c.stats.state != ConnState::Running) return;
        const std::string node = c.path.nodes[j];
        if (removed(node)) return;
        if (const auto* a = demand_behavior(node, AttackKind::MitmBbm92, c.demand.id)) {
            mitm_measure(ci, j, attack_index_.at(a->id));
            return;
        }
        if (const auto* a = demand_behavior(node, AttackKind::SwitchDisrupt, c.demand.id)) {
            const std::string& other = a->demands[0] == c.demand.id ? a->demands[1] : a->demands[0];
            for (int k = 0; k < static_cast<int>(conns_.size()); ++k) {
                auto& d = conns_[k];
                if (d.stats.id != other || d.stats.state != ConnState::Running) continue;
                auto pos = std::find(d.path.nodes.begin(), d.path.nodes.end(), node);
                if (pos == d.path.nodes.end()) continue;
                const int jj = static_cast<int>(pos - d.path.nodes.begin());
                if (jj == 0 || jj == d.hops()) continue;
                const int idx = attack_index_.at(a->id);
                if (c.slots[j][kLeft] && d.slots[jj][kRight]) do_swap({ci, j, kLeft}, {k, jj, kRight}, idx);
                if (d.slots[jj][kLeft] && c.slots[j][kRight]) do_swap({k, jj, kLeft}, {ci, j, kRight}, idx);
                return;
            }
            return;
        }
        if (c.slots[j][kLeft] && c.slots[j][kRight]) do_swap({ci, j, kLeft}, {ci, j, kRight}, -1);
    }

    void do_swap(const SlotRef& L, const SlotRef& R, int attack) {
        const PairId pl = *slot(L), pr = *slot(R);
        const std::string node = node_of(L);
        if (pl == pr) return;
        const double tau = sc_.protocol.decoherence_tau_s;
        if (tau > 0) {
            store_.age(pl, now_, tau);
            store_.age(pr, now_, tau);
        }
        RecMeta ml = std::move(meta_[pl]);
        RecMeta mr = std::move(meta_[pr]);
        meta_.erase(pl);
        meta_.erase(pr);
        auto out = store_.swap(pl, pr, node, now_, node_rng(node));
        slot(L).reset();
        slot(R).reset();

        RecMeta m;
        for (const auto& r : ml.refs)
            if (!(r == L)) m.refs.push_back(r);
        for (const auto& r : mr.refs)
            if (!(r == R)) m.refs.push_back(r);
        m.swaps = ml.swaps;
        m.swaps.insert(m.swaps.end(), mr.swaps.begin(), mr.swaps.end());
        m.pending = std::move(ml.pending);
        m.pending.insert(m.pending.end(), mr.pending.begin(), mr.pending.end());
        m.touched = ml.touched;
        m.touched.insert(mr.touched.begin(), mr.touched.end());
        if (attack >= 0) m.touched.insert(attack);

        const int w = static_cast<int>(swaps_.size());
        SwapInfo info;
        info.dest[0] = conns_[L.conn].demand.src;
        info.dest[1] = conns_[R.conn].demand.dst;
        info.conn[0] = L.conn;
        info.conn[1] = R.conn;
        swaps_.push_back(info);
        m.swaps.push_back(w);
        for (int x : m.swaps) swap_owner_[x] = out.pair;
        for (const auto& r : m.refs) slot(r) = out.pair;
        meta_[out.pair] = std::move(m);

        const std::string& cid = conns_[L.conn].stats.id;
        if (attack >= 0) {
            conns_[L.conn].touched.insert(attack);
            conns_[R.conn].touched.insert(attack);
            log_attack(attack, node, cid, [&] {
                return fmt::format("cross-swapped {}:{} with {}:{}", conns_[L.conn].stats.id, pl,
                                   conns_[R.conn].stats.id, pr);
            });
        }
        log(EventKind::SwapDecision, node, cid, [&] {
            return fmt::format("left={} right={} out={} bell={}", pl, pr, out.pair, static_cast<int>(out.outcome));
        });
        for (int d = 0; d < 2; ++d) {
            const std::string dest = swaps_[w].dest[d];
            send(node, dest, Msg::Frame, swaps_[w].conn[d], false, [this, w, d](int altered) { on_frame(w, d, altered); });
        }
        after_place(out.pair);
        schedule_generation(L.conn, L.node - 1);
        schedule_generation(R.conn, R.node);
    }

    void mitm_measure(int ci, int j, int idx) {
        auto& c = conns_[ci];
        if (!c.slots[j][kLeft] || !c.slots[j][kRight]) return;
        const PairId pl = *c.slots[j][kLeft], pr = *c.slots[j][kRight];
        // Wait until both records reach the connection endpoints.
        auto reaches = [&](PairId p, const SlotRef& end) {
            const auto& refs = meta_[p].refs;
            return std::find(refs.begin(), refs.end(), end) != refs.end();
        };
        if (!reaches(pl, {ci, 0, kRight}) || !reaches(pr, {ci, c.hops(), kLeft})) return;
        const std::string node = c.path.nodes[j];
        Rng& rng = attacker_rng(actions_[idx]->attacker);
        const PairId pids[2] = {pl, pr};
        for (int s = 0; s < 2; ++s) {
            const PairId p = pids[s];
            realize(p, false, false);
            const auto& rec = store_.get(p);
            const Side side = rec.side_of(node);
            const int basis = fair_bit(rng);
            auto hm = state::measure_half(rec.exact(), side, basis_of(basis), rng);
            store_.set_state(p, hm.collapsed);
            store_.consume_half(p, side, Fate::Destroyed);
            auto& m = meta_[p];
            m.attacker_meas[static_cast<int>(side)] = AttackerMeasurement{basis, hm.bit};
            m.touched.insert(idx);
            const SlotRef here{ci, j, s == 0 ? kLeft : kRight};
            m.refs.erase(std::remove(m.refs.begin(), m.refs.end(), here), m.refs.end());
            slot(here).reset();
            const int w = static_cast<int>(swaps_.size());
            SwapInfo info;
            info.dest[s] = s == 0 ? c.demand.src : c.demand.dst;
            info.conn[s] = ci;
            swaps_.push_back(info);
            m.swaps.push_back(w);
            swap_owner_[w] = p;
            send(node, info.dest[s], Msg::Frame, ci, false, [this, w, s](int altered) { on_frame(w, s, altered); });
        }
        c.touched.insert(idx);
        log_attack(idx, node, c.stats.id, [&] { return fmt::format("measured pairs {} and {} instead of swapping", pl, pr); });
        after_place(pl);
        after_place(pr);
        schedule_generation(ci, j - 1);
        schedule_generation(ci, j);
    }

    void on_frame(int w, int d, int altered) {
        auto& info = swaps_[w];
        info.arrived[d] = true;
        if (altered >= 0) {
            auto it = swap_owner_.find(w);
            if (it != swap_owner_.end() && store_.is_live(it->second)) {
                const PairId pid = it->second;
                const auto& rec = store_.get(pid);
                const std::string& dest = info.dest[d];
                if (rec.endpoint_a == dest || rec.endpoint_b == dest) {
                    const Side side = rec.side_of(dest);
                    if (!rec.half_consumed[static_cast<int>(side)]) {
                        store_.apply_channel(pid, state::PauliChannel{0.0, 1.0, 0.0, 0.0}, side);
                        ++ledger_.corrupted_frames_applied;
                        ++effects_[altered].corrupted_frames;
                        if (info.conn[d] >= 0) conns_[info.conn[d]].touched.insert(altered);
                    }
                }
            }
        }
        if (info.conn[d] >= 0) try_deliver(info.conn[d]);
    }

    void on_frame_timeout(PairId pid) {
        if (!store_.is_live(pid)) return;
        auto it = meta_.find(pid);
        if (it == meta_.end()) return;
        auto refs = it->second.refs;
        for (const auto& r : refs) {
            auto& c = conns_[r.conn];
            ++c.stats.timeouts;
            log(EventKind::Timeout, node_of(r), c.stats.id, [&] { return fmt::format("frames pair={}", pid); });
            free_slot(r, Fate::Discarded);
        }
        if (store_.is_live(pid)) {
            const auto& rec = store_.get(pid);
            for (int s = 0; s < 2; ++s)
                if (!rec.half_consumed[s]) store_.consume_half(pid, static_cast<Side>(s), Fate::Discarded);
        }
        meta_.erase(pid);
        for (const auto& r : refs) {
            if (r.node > 0) schedule_generation(r.conn, r.node - 1);
            if (r.node < conns_[r.conn].hops()) schedule_generation(r.conn, r.node);
        }
    }

    bool half_ready(PairId pid, const std::string& node, int ci) {
        auto it = meta_.find(pid);
        if (it == meta_.end() || !it->second.complete) return false;
        int frames = 0;
        for (int w : it->second.swaps)
            for (int d = 0; d < 2; ++d) {
                if (swaps_[w].dest[d] != node) continue;
                if (!swaps_[w].arrived[d]) return false;
                ++frames;
            }
        return conns_[ci].hops() < 2 || frames > 0;
    }

    monitor::CertSample draw_sample(Rng& secret) {
        monitor::CertSample s;
        const double u = uniform01(secret);
        if (u < 0.375)
            s.setting = monitor::SampleSetting::QberZ;
        else if (u < 0.75)
            s.setting = monitor::SampleSetting::QberX;
        else {
            s.setting = monitor::SampleSetting::Chsh;
            s.a_setting = fair_bit(secret);
            s.b_setting = fair_bit(secret);
        }
        return s;
    }

    static std::pair<state::MeasurementBasis, state::MeasurementBasis> bases(const monitor::CertSample& s) {
        using state::BasisLabel;
        using state::MeasurementBasis;
        switch (s.setting) {
            case monitor::SampleSetting::QberZ: return {MeasurementBasis::z(), MeasurementBasis::z()};
            case monitor::SampleSetting::QberX: return {MeasurementBasis::x(), MeasurementBasis::x()};
            case monitor::SampleSetting::Chsh:
                return {MeasurementBasis::of(s.a_setting ? BasisLabel::CHSH_A1 : BasisLabel::CHSH_A0),
                        MeasurementBasis::of(s.b_setting ? BasisLabel::CHSH_B1 : BasisLabel::CHSH_B0)};
        }
        return {MeasurementBasis::z(), MeasurementBasis::z()};
    }

    void measure_joint(PairId pid, const std::string& a_node, monitor::CertSample s, Rng& rng) {
        const auto [ba, bb] = bases(s);
        const auto st = state::oriented(store_.get(pid), a_node, Side::A);
        const auto [x, y] = state::measure_pair(st, ba, bb, rng);
        s.bit_a = x;
        s.bit_b = y;
        last_sample_ = s;
    }

    int measure_half_of(PairId pid, const std::string& node, const state::MeasurementBasis& b, Rng& rng, Fate fate) {
        const auto& rec = store_.get(pid);
        const Side side = rec.side_of(node);
        auto hm = state::measure_half(rec.exact(), side, b, rng);
        store_.set_state(pid, hm.collapsed);
        store_.consume_half(pid, side, fate);
        return hm.bit;
    }

    void note_endpoints(Conn& c, PairId pid) {
        const auto& rec = store_.history(pid);
        auto e = std::minmax(rec.endpoint_a, rec.endpoint_b);
        c.stats.delivered_endpoints.insert({e.first, e.second});
    }

    void try_deliver(int ci) {
        auto& c = conns_[ci];
        if (c.stats.state != ConnState::Running) return;
        const int h = c.hops();
        const auto ps = c.slots[0][kRight];
        const auto pd = c.slots[h][kLeft];
        if (!ps || !pd) return;
        if (!half_ready(*ps, c.demand.src, ci) || !half_ready(*pd, c.demand.dst, ci)) return;
        deliver(ci, *ps, *pd);
    }

    void deliver(int ci, PairId ps, PairId pd) {
        auto& c = conns_[ci];
        const bool same = ps == pd;
        const std::string& src = c.demand.src;
        const std::string& dst = c.demand.dst;
        const auto app = c.demand.application;
        bool sampled = false, check = false;
        if (app == net::Application::Bbm92)
            check = bernoulli(c.secret, c.demand.check_fraction);
        else if (scope_ == net::CertScope::EndToEnd)
            sampled = bernoulli(c.secret, c.sacrifice);
        monitor::CertSample sample;
        if (sampled) sample = draw_sample(c.secret);

        realize(ps, sampled || check, false);
        if (!same) realize(pd, sampled || check, false);
        const double tau = sc_.protocol.decoherence_tau_s;
        if (tau > 0) {
            store_.age(ps, now_, tau);
            if (!same) store_.age(pd, now_, tau);
        }
        std::set<int> touched = meta_[ps].touched;
        if (!same) touched.insert(meta_[pd].touched.begin(), meta_[pd].touched.end());
        c.touched.insert(touched.begin(), touched.end());
        note_endpoints(c, ps);
        if (!same) note_endpoints(c, pd);

        std::optional<AttackerMeasurement> att_a, att_b;
        {
            const auto& rs = store_.get(ps);
            att_a = meta_[ps].attacker_meas[1 - static_cast<int>(rs.side_of(src))];
            const auto& rd = store_.get(pd);
            att_b = meta_[pd].attacker_meas[1 - static_cast<int>(rd.side_of(dst))];
        }
        bool leaked = !store_.get(ps).leak_tags.empty() || (!same && !store_.get(pd).leak_tags.empty());
        int malicious = -1;
        if (!plan_.empty()) {
            for (const auto& n : {src, dst})
                if (const auto* a = plan_.node_behavior(n, AttackKind::MaliciousApplication, now_)) {
                    malicious = attack_index_.at(a->id);
                    break;
                }
        }

        // Detach both halves from the endpoint slots before measuring.
        auto detach = [&](PairId p, const SlotRef& r) {
            slot(r).reset();
            auto& refs = meta_[p].refs;
            refs.erase(std::remove(refs.begin(), refs.end(), r), refs.end());
        };
        detach(ps, {ci, 0, kRight});
        detach(pd, {ci, c.hops(), kLeft});

        if (sampled) {
            const auto [ba, bb] = bases(sample);
            if (same) {
                measure_joint(ps, src, sample, c.app);
                sample = last_sample_;
                store_.consume(ps, Fate::Sacrificed);
            } else {
                sample.bit_a = measure_half_of(ps, src, ba, c.app, Fate::Sacrificed);
                sample.bit_b = measure_half_of(pd, dst, bb, c.app, Fate::Sacrificed);
            }
            ++c.stats.sacrificed;
            log(EventKind::CertSample, src, c.stats.id, [&] {
                return fmt::format("pairs={}/{} setting={} bits={}{}", ps, pd, static_cast<int>(sample.setting),
                                   sample.bit_a, sample.bit_b);
            });
            send(src, dst, Msg::Cert, ci, true, [this, ci, sample](int altered) mutable {
                if (altered >= 0) sample.bit_b = sample.bit_a;
                conns_[ci].e2e.add(sample);
                conns_[ci].e2e_fresh = true;
            });
        } else {
            ++c.stats.delivered;
            if (!same) ++c.stats.cross_delivered;
            if (malicious >= 0) {
                leaked = true;
                log_attack(malicious, src, c.stats.id, [&] { return fmt::format("disclosed delivery {}/{}", ps, pd); });
            }
            switch (app) {
                case net::Application::Pairs: {
                    const double f = same ? store_.get(ps).fidelity() : 0.25;
                    if (same)
                        store_.consume(ps, Fate::Delivered);
                    else {
                        consume_remaining_half(ps, src, Fate::Delivered);
                        consume_remaining_half(pd, dst, Fate::Delivered);
                    }
                    if (same) {
                        c.fidelity_sum += f;
                        ++c.fidelity_n;
                    }
                    account_delivery(c, leaked, f, touched, malicious);
                    log(EventKind::AppMeasure, dst, c.stats.id,
                        [&] { return fmt::format("delivered pairs={}/{} fidelity={:.6f}", ps, pd, f); });
                    break;
                }
                case net::Application::Bbm92: {
                    KeyRound r;
                    r.a_basis = fair_bit(c.app);
                    r.b_basis = fair_bit(c.app);
                    if (same) {
                        const auto st = state::oriented(store_.get(ps), src, Side::A);
                        const auto [x, y] = state::measure_pair(st, basis_of(r.a_basis), basis_of(r.b_basis), c.app);
                        r.a_bit = x;
                        r.b_bit = y;
                        store_.consume(ps, Fate::Delivered);
                    } else {
                        r.a_bit = measure_half_of(ps, src, basis_of(r.a_basis), c.app, Fate::Delivered);
                        r.b_bit = measure_half_of(pd, dst, basis_of(r.b_basis), c.app, Fate::Delivered);
                    }
                    r.check = check;
                    r.leaked = leaked;
                    r.attacker_a = att_a;
                    r.attacker_b = att_b;
                    c.key->add(r);
                    if (leaked && !check) ++ledger_.confidentiality_leaked_pairs;
                    log(EventKind::AppMeasure, src, c.stats.id, [&] {
                        return fmt::format("bbm92 pairs={}/{} bases={}{} bits={}{}{}", ps, pd, r.a_basis, r.b_basis,
                                           r.a_bit, r.b_bit, check ? " check" : "");
                    });
                    break;
                }
                case net::Application::Teleport: {
                    state::FarHolder holder{dst, std::nullopt};
                    if (malicious >= 0) holder.attacker = actions_[malicious]->attacker;
                    double f = 0.5;
                    bool breach = false;
                    if (same) {
                        const int axis = fair_bit(c.app), bit = fair_bit(c.app);
                        const auto v = state::basis_vector(basis_of(axis), bit);
                        const state::Matrix2 payload = v * v.adjoint();
                        auto res = state::teleport(store_, ps, src, payload, holder, true, c.app);
                        f = res.payload_fidelity;
                        breach = res.confidentiality_breach;
                    } else {
                        consume_remaining_half(ps, src, Fate::Delivered);
                        consume_remaining_half(pd, dst, Fate::Delivered);
                    }
                    ++c.stats.teleports;
                    c.teleport_sum += f;
                    if (breach || malicious >= 0) ++ledger_.leaked_teleports;
                    log(EventKind::AppMeasure, dst, c.stats.id,
                        [&] { return fmt::format("teleport pairs={}/{} fidelity={:.6f}", ps, pd, f); });
                    break;
                }
            }
        }
        for (PairId p : {ps, pd})
            if (!store_.is_live(p)) meta_.erase(p);

        if (c.key && c.key->complete()) {
            finish_session(ci);
            return;
        }
        if (app != net::Application::Bbm92 && c.stats.delivered >= c.demand.target_pairs) {
            finish_connection(ci);
            return;
        }
        schedule_generation(ci, 0);
        schedule_generation(ci, c.hops() - 1);
    }

    void consume_remaining_half(PairId pid, const std::string& node, Fate fate) {
        if (!store_.is_live(pid)) return;
        const auto& rec = store_.get(pid);
        const Side side = rec.side_of(node);
        if (!rec.half_consumed[static_cast<int>(side)]) store_.consume_half(pid, side, fate);
    }

    void account_delivery(Conn& c, bool leaked, double f, const std::set<int>& touched, int malicious) {
        if (c.stats.injected) return;
        if (leaked) {
            ++ledger_.confidentiality_leaked_pairs;
            for (int idx : touched) {
                const auto k = actions_[idx]->kind;
                if (k == AttackKind::InterceptResend || k == AttackKind::EntanglingProbe) ++effects_[idx].leaked_pairs;
            }
            if (malicious >= 0) ++effects_[malicious].leaked_pairs;
        } else if (f < thresholds_.fidelity_floor && !c.flagged) {
            ++ledger_.integrity_bad_delivered;
        }
    }

    void finish_session(int ci) {
        auto& c = conns_[ci];
        KeySession ks = c.key->finish();
        if (!plan_.empty() && ks.status == KeyStatus::Completed) {
            for (const auto& n : {c.demand.src, c.demand.dst})
                if (const auto* a = plan_.node_behavior(n, AttackKind::MaliciousApplication, now_)) {
                    ks.leaked_key_bits = ks.emitted_bits();
                    log_attack(attack_index_.at(a->id), n, c.stats.id, [] { return "disclosed session key"; });
                }
            if (ks.forged_sifting)
                for (const auto* a : plan_.of_kind(AttackKind::MitmBbm92))
                    if (a->demands.front() == c.demand.id)
                        log_attack(attack_index_.at(a->id), a->node, c.stats.id,
                                   [&] { return fmt::format("answered sifting for both ends bits={}", ks.leaked_key_bits); });
        }
        if (!c.stats.injected) {
            ledger_.leaked_key_bits += ks.leaked_key_bits;
            // Disagreement between the two ends' emitted keys.
            if (ks.status == KeyStatus::Completed)
                for (std::size_t i = 0; i < ks.key_a.size() && i < ks.key_b.size(); ++i)
                    ledger_.corrupted_key_bits += ks.key_a[i] != ks.key_b[i];
        }
        const auto report = monitor::qber_report("connection", c.stats.id, ks.check_bits, ks.check_errors,
                                                 sc_.protocol.monitor.delta);
        record_verdict(report, c.touched, ci, std::nullopt);
        const bool aborted = ks.status == KeyStatus::Aborted;
        c.stats.key = std::move(ks);
        if (aborted) {
            release_links(ci);
            clear_connection(ci, Fate::Discarded);
            set_state(ci, ConnState::Aborted, "QberAboveThreshold");
        } else {
            finish_connection(ci);
        }
    }

    // ---- monitor ----------------------------------------------------------------------
    void record_verdict(const monitor::CertReport& report, const std::set<int>& touched, int ci,
                        std::optional<std::string> link) {
        const auto v = monitor::detect(report, thresholds_);
        const std::string vs = monitor::to_string(v);
        auto attributed = names(touched);
        log(EventKind::MonitorVerdict, "", ci >= 0 ? conns_[ci].stats.id : std::string(), [&] {
            return fmt::format("scope={} subject={} n={} qber={:.6f} f_hi={:.6f}", report.scope, report.subject,
                               report.n_samples, report.qber, report.fidelity_interval.hi);
        }, -1, vs, attributed);
        final_reports_[report.scope + "/" + report.subject] = CertEntry{report, vs, attributed};
        if (v != monitor::Verdict::AttackSuspected) return;
        for (int idx : touched)
            if (effects_[idx].first_effect_s && !effects_[idx].detection_latency_s)
                effects_[idx].detection_latency_s = now_ - *effects_[idx].first_effect_s;
        if (ci >= 0) {
            auto& c = conns_[ci];
            if (!c.flagged) {
                c.flagged = true;
                for (int j = 1; j < c.path.hops(); ++j) apply_isolation(reputation_.corroborate(c.path.nodes[j]), -1);
            }
        }
        if (link && !accused_links_.count(*link)) {
            accused_links_.insert(*link);
            const auto& l = topo_.link(*link);
            for (const auto& [from, to] : {std::pair{l.a, l.b}, std::pair{l.b, l.a}}) {
                monitor::Accusation acc{from, from, to, channel(from, to).authenticated, now_};
                send(from, to, Msg::Accusation, -1, true,
                     [this, acc](int) { apply_isolation(reputation_.update(acc, monitor::Verdict::AttackSuspected), -1); });
            }
        }
    }

    void evaluate(bool final_pass) {
        const double delta = sc_.protocol.monitor.delta;
        for (int ci = 0; ci < static_cast<int>(conns_.size()); ++ci) {
            auto& c = conns_[ci];
            if (!c.e2e_fresh) continue;
            if (!final_pass && c.e2e.n_samples() == 0) continue;
            c.e2e_fresh = false;
            record_verdict(c.e2e.report("connection", c.stats.id, delta), c.touched, ci, std::nullopt);
        }
        for (const auto& lid : std::set<std::string>(link_fresh_))
            record_verdict(link_acc_[lid].report("link", lid, delta), link_touched_[lid], -1, lid);
        link_fresh_.clear();
    }

    void monitor_tick() {
        evaluate(false);
        if (!all_terminal()) schedule(now_ + exponential(monitor_rng_, sc_.protocol.monitor.verify_mean_s), false,
                                      [this] { monitor_tick(); });
    }

    void apply_isolation(const std::vector<std::string>& nodes, int attack) {
        for (const auto& n : nodes) {
            isolated_.insert(n);
            if (attack >= 0) ++effects_[attack].isolated_nodes;
            log(EventKind::MonitorVerdict, n, "", [&] { return fmt::format("isolated={}", n); }, attack);
            drop_node(n, "NodeIsolated", attack, Fate::Discarded);
        }
    }

    void drop_node(const std::string& n, const std::string& cause, int attack, Fate fate) {
        for (int ci = 0; ci < static_cast<int>(conns_.size()); ++ci) {
            auto& c = conns_[ci];
            if (c.terminal() || !c.started) continue;
            if (std::find(c.path.nodes.begin(), c.path.nodes.end(), n) == c.path.nodes.end()) continue;
            abort_connection(ci, cause, attack, fate);
        }
    }

    void drop_link(const std::string& lid, const std::string& cause, int attack, Fate fate) {
        for (int ci = 0; ci < static_cast<int>(conns_.size()); ++ci) {
            auto& c = conns_[ci];
            if (c.terminal() || !c.started) continue;
            if (std::find(c.path.links.begin(), c.path.links.end(), lid) == c.path.links.end()) continue;
            abort_connection(ci, cause, attack, fate);
        }
    }

    // ---- scheduled attacks ------------------------------------------------------------
    void schedule_attacks() {
        for (std::size_t i = 0; i < actions_.size(); ++i) {
            const auto* a = actions_[i];
            const int idx = static_cast<int>(i);
            switch (a->kind) {
                case AttackKind::FrameNodes:
                case AttackKind::FalseFailureReport:
                case AttackKind::LinkDown:
                case AttackKind::DestroyAsset:
                case AttackKind::StealAsset:
                case AttackKind::QdosOversizedRequest:
                case AttackKind::Qddos:
                    schedule(a->window.start_s, true, [this, idx] { start_attack(idx); });
                    break;
                default:
                    break;
            }
        }
    }

    void start_attack(int idx) {
        const auto* a = actions_[idx];
        switch (a->kind) {
            case AttackKind::FrameNodes: {
                const auto nbrs = topo_.neighbors(a->node);
                for (const auto& v : a->victims) {
                    std::vector<std::string> claimed{a->node};
                    for (const auto& n : nbrs)
                        if (n != v && n != a->node) claimed.push_back(n);
                    for (const auto& s : claimed) {
                        monitor::Accusation acc{s, a->node, v, channel(a->node, v).authenticated, now_};
                        log_attack(idx, a->node, "", [&] { return fmt::format("accuse {} as {}", v, s); });
                        send(a->node, v, Msg::Accusation, -1, true, [this, acc, idx](int) {
                            apply_isolation(reputation_.update(acc, monitor::Verdict::AttackSuspected), idx);
                        });
                    }
                }
                break;
            }
            case AttackKind::FalseFailureReport:
                log_attack(idx, a->node, "", [&] { return fmt::format("reported {} failed", a->victim); });
                send(a->node, a->victim, Msg::Report, -1, true, [this, idx](int) {
                    const auto* act = actions_[idx];
                    failed_.insert(act->victim);
                    log(EventKind::NodeFailure, act->victim, "", [] { return "reported_failed"; }, idx);
                    drop_node(act->victim, "ReportedFailure", idx, Fate::Discarded);
                });
                break;
            case AttackKind::LinkDown:
                down_links_.insert(a->link);
                log_attack(idx, a->node, "", [&] { return fmt::format("reported link {} down", a->link); });
                drop_link(a->link, "LinkDown", idx, Fate::Discarded);
                break;
            case AttackKind::DestroyAsset:
                if (!a->link.empty()) {
                    down_links_.insert(a->link);
                    log_attack(idx, "", "", [&] { return fmt::format("destroyed link {}", a->link); });
                    drop_link(a->link, "AssetDestroyed", idx, Fate::Destroyed);
                } else {
                    destroyed_.insert(a->node);
                    log_attack(idx, a->node, "", [] { return "destroyed node"; });
                    log(EventKind::NodeFailure, a->node, "", [] { return "destroyed"; }, idx);
                    drop_node(a->node, "AssetDestroyed", idx, Fate::Destroyed);
                }
                break;
            case AttackKind::StealAsset:
                if (a->hardware == "classical") {
                    stolen_keys_[a->attacker].insert(a->node);
                    log_attack(idx, a->node, "", [] { return "stole classical credentials"; });
                } else {
                    destroyed_.insert(a->node);
                    log_attack(idx, a->node, "", [] { return "stole quantum hardware"; });
                    log(EventKind::NodeFailure, a->node, "", [] { return "stolen"; }, idx);
                    drop_node(a->node, "AssetStolen", idx, Fate::Destroyed);
                }
                break;
            case AttackKind::QdosOversizedRequest:
            case AttackKind::Qddos: {
                std::vector<std::string> sources = a->nodes;
                if (!a->node.empty()) sources.push_back(a->node);
                for (const auto& s : sources) {
                    if (s == a->dst) continue;
                    net::Demand d;
                    d.id = fmt::format("{}@{}", a->id, s);
                    d.src = s;
                    d.dst = a->dst;
                    d.application = net::Application::Bbm92;
                    d.key_length = a->key_length;
                    d.start_s = now_;
                    ++effects_[idx].injected_connections;
                    log_attack(idx, s, d.id, [&] { return fmt::format("requested key_length={}", a->key_length); });
                    add_connection(d, true);
                }
                break;
            }
            default:
                break;
        }
    }

    // ---- state ------------------------------------------------------------------------
    const net::Scenario& sc_;
    const net::Topology& topo_;
    std::uint64_t seed_;
    net::CertScope scope_;
    EventLog log_;
    adversary::AttackPlan plan_;
    std::vector<const AttackAction*> actions_;
    std::map<std::string, int> attack_index_;
    std::vector<AttackEffect> effects_;
    monitor::ReputationLedger reputation_;
    monitor::Thresholds thresholds_;
    monitor::CiaLedger ledger_;
    Rng monitor_rng_;

    state::PairStore store_;
    std::deque<Conn> conns_;
    std::unordered_map<PairId, RecMeta> meta_;
    std::vector<SwapInfo> swaps_;
    std::unordered_map<int, PairId> swap_owner_;
    std::map<std::string, int> link_users_;
    std::map<std::string, LinkStats> link_stats_;
    std::map<std::string, monitor::CertAccumulator> link_acc_;
    std::set<std::string> link_fresh_;
    std::map<std::string, std::set<int>> link_touched_;
    std::set<std::string> accused_links_;
    std::map<std::string, CertEntry> final_reports_;
    std::map<std::string, Rng> attacker_rngs_;
    std::map<std::string, Rng> node_rngs_;
    std::map<adversary::ChannelId, net::ClassicalChannel> channels_;
    std::map<std::string, std::set<std::string>> stolen_keys_;
    std::set<std::string> isolated_, failed_, destroyed_, down_links_;
    monitor::CertSample last_sample_;

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t next_seq_ = 0;
    long essential_pending_ = 0;
    double now_ = 0.0;
};

RunResult Sim::run() {
    schedule_attacks();
    schedule(exponential(monitor_rng_, sc_.protocol.monitor.verify_mean_s), false, [this] { monitor_tick(); });
    const double horizon = sc_.protocol.horizon_s;
    bool reached_horizon = false;
    while (!queue_.empty()) {
        if (queue_.top().t > horizon) {
            reached_horizon = true;
            break;
        }
        Event e = std::move(const_cast<Event&>(queue_.top()));
        queue_.pop();
        if (e.essential) --essential_pending_;
        now_ = e.t;
        e.fn();
        if (essential_pending_ == 0 && all_terminal()) break;
    }
    double end = 0.0;
    if (reached_horizon || !all_terminal()) {
        end = horizon;
    } else {
        for (const auto& c : conns_)
            if (c.stats.finished_at_s) end = std::max(end, *c.stats.finished_at_s);
        end = std::max(end, now_ > horizon ? horizon : now_);
    }
    now_ = end;
    evaluate(true);

    // Everything still alive at the horizon is discarded.
    for (auto id : store_.live_ids()) {
        const auto& rec = store_.get(id);
        for (int s = 0; s < 2; ++s)
            if (!rec.half_consumed[s]) store_.consume_half(id, static_cast<Side>(s), Fate::Discarded);
    }

    RunResult r;
    r.seed = seed_;
    r.end_time_s = end;
    long delivered = 0;
    for (auto& c : conns_) {
        auto& st = c.stats;
        const double t0 = st.running_at_s.value_or(end);
        const double t1 = st.finished_at_s.value_or(end);
        st.throughput_hz = t1 > t0 ? st.delivered / (t1 - t0) : 0.0;
        st.mean_fidelity = c.fidelity_n ? c.fidelity_sum / c.fidelity_n : 0.0;
        st.mean_teleport_fidelity = st.teleports ? c.teleport_sum / st.teleports : 0.0;
        if (!st.injected) {
            delivered += st.delivered;
            ledger_.delivered_pairs += st.delivered;
            ledger_.sacrificed_pairs += st.sacrificed;
            if (st.state == ConnState::Aborted) ++ledger_.aborted_connections;
        }
        r.connections.push_back(st);
    }
    ledger_.delivered_rate_hz = end > 0 ? delivered / end : 0.0;
    r.removed_nodes = removed_nodes();
    if (!r.removed_nodes.empty())
        ledger_.disconnected_pairs_fraction = net::partition_report(topo_, r.removed_nodes).disconnected_pairs_fraction;
    for (const auto& e : effects_) {
        monitor::DetectionEntry d{e.attack_id, e.kind, e.first_effect_s, e.detection_latency_s};
        ledger_.detection.push_back(d);
    }
    r.ledger = ledger_;
    for (auto& [_, ls] : link_stats_) r.links.push_back(ls);
    for (auto& [_, ce] : final_reports_) r.certification.push_back(ce);
    r.reputation.policy = net::to_string(reputation_.policy());
    r.reputation.k = reputation_.k();
    r.reputation.isolated.assign(reputation_.isolated().begin(), reputation_.isolated().end());
    r.reputation.accusation_counts = reputation_.accusation_counts();
    r.reputation.accusations_received = reputation_.accusations_received();
    r.reputation.accusations_rejected = reputation_.accusations_rejected();
    r.attacks = effects_;
    r.pairs_created = store_.created();
    r.fates = store_.fate_counts();
    r.log = std::move(log_);
    return r;
}

}  // namespace

RunResult run(const net::Scenario& scenario, const RunOptions& options) {
    Sim sim(scenario, options);
    return sim.run();
}

}  // namespace qrsim::engine
