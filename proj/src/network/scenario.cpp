#include "qrsim/network/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>

namespace qrsim::net {

std::string to_string(Application a) {
    switch (a) {
        case Application::Pairs: return "pairs";
        case Application::Bbm92: return "bbm92";
        case Application::Teleport: return "teleport";
    }
    return "?";
}

std::string to_string(CertScope s) { return s == CertScope::Link ? "link" : "e2e"; }
std::string to_string(RoutingCost c) { return c == RoutingCost::Hops ? "hops" : "neg_log_fidelity"; }
std::string to_string(ReputationPolicy p) { return p == ReputationPolicy::Naive ? "naive" : "hardened"; }

namespace {

// Field reader that records schema violations instead of throwing on the first one.
class Reader {
public:
    Reader(std::vector<Violation>& sink, const Json& obj, std::string where)
        : sink_(sink), obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) fail("schema.type", "expected an object");
    }

    bool ok() const { return obj_.is_object(); }

    template <class T>
    void get(const char* key, T& out, bool required = false) {
        seen_.insert(key);
        if (!ok()) return;
        auto it = obj_.find(key);
        if (it == obj_.end()) {
            if (required) fail("schema.required", fmt::format("missing field '{}'", key));
            return;
        }
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!it->is_number()) throw std::invalid_argument("number");
            } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
                if (!it->is_number_integer()) throw std::invalid_argument("integer");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!it->is_boolean()) throw std::invalid_argument("boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!it->is_string()) throw std::invalid_argument("string");
            }
            out = it->template get<T>();
        } catch (const std::exception& e) {
            fail("schema.type", fmt::format("field '{}' must be a {}", key, e.what()));
        }
    }

    template <class T>
    void get_opt(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        if (!ok() || !obj_.contains(key)) return;
        T v{};
        get(key, v);
        out = v;
    }

    const Json* child(const char* key) {
        seen_.insert(key);
        if (!ok()) return nullptr;
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void fail(const std::string& rule, const std::string& msg) { sink_.push_back({rule, where_, msg}); }

    /// Flags keys that were never asked for (typo protection).
    void finish() {
        if (!ok()) return;
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) fail("schema.unknown_field", fmt::format("unknown field '{}'", it.key()));
    }

private:
    std::vector<Violation>& sink_;
    const Json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

template <class E, class F>
void get_enum(Reader& r, const char* key, E& out, F parse) {
    std::optional<std::string> s;
    r.get_opt(key, s);
    if (!s) return;
    if (auto v = parse(*s))
        out = *v;
    else
        r.fail("schema.enum", fmt::format("field '{}' has unknown value '{}'", key, *s));
}

template <class E>
std::optional<E> parse_named(std::string_view s, std::initializer_list<std::pair<std::string_view, E>> table) {
    for (auto& [name, v] : table)
        if (name == s) return v;
    return std::nullopt;
}

const Json& array_or_empty(Reader& r, const char* key) {
    static const Json empty = Json::array();
    const Json* j = r.child(key);
    if (!j) return empty;
    if (!j->is_array()) {
        r.fail("schema.type", fmt::format("field '{}' must be an array", key));
        return empty;
    }
    return *j;
}

NodeSpec read_node(const Json& j, std::vector<Violation>& v, std::size_t idx) {
    NodeSpec n;
    Reader r(v, j, fmt::format("nodes[{}]", idx));
    r.get("id", n.id, true);
    get_enum(r, "kind", n.kind, node_kind_from_string);
    if (r.ok() && !j.contains("kind")) r.fail("schema.required", "missing field 'kind'");
    r.get("hijacked", n.hijacked);
    // Role defaults depend on kind.
    if (n.kind == NodeKind::MNode) n.qubits.buffer = 0;
    if (n.kind == NodeKind::ENode) n.qubits.terminal = 2;
    if (is_inode(n.kind)) n.qubits = {0, 0, 0};
    if (const Json* q = r.child("qubits")) {
        Reader rq(v, *q, fmt::format("nodes[{}].qubits", idx));
        rq.get("interface", n.qubits.interface);
        rq.get("buffer", n.qubits.buffer);
        rq.get("terminal", n.qubits.terminal);
        rq.finish();
    }
    r.finish();
    return n;
}

LinkSpec read_link(const Json& j, std::vector<Violation>& v, std::size_t idx) {
    LinkSpec l;
    Reader r(v, j, fmt::format("links[{}]", idx));
    r.get("id", l.id, true);
    r.get("a", l.a, true);
    r.get("b", l.b, true);
    get_enum(r, "architecture", l.architecture, architecture_from_string);
    r.get_opt("midpoint", l.midpoint);
    r.get("length_km", l.length_km);
    r.get("attenuation_db_per_km", l.attenuation_db_per_km);
    r.get("attempt_rate_hz", l.attempt_rate_hz);
    r.get("bsa_success_cap", l.bsa_success_cap);
    r.get("base_fidelity", l.base_fidelity);
    r.finish();
    return l;
}

ClassicalPlane read_classical(const Json* j, std::vector<Violation>& v) {
    ClassicalPlane c;
    if (!j) return c;
    Reader r(v, *j, "classical");
    r.get("authenticated", c.authenticated);
    r.get("latency_s_per_km", c.latency_s_per_km);
    const Json& ov = array_or_empty(r, "overrides");
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ClassicalOverride o;
        Reader ro(v, ov[i], fmt::format("classical.overrides[{}]", i));
        ro.get("a", o.a, true);
        ro.get("b", o.b, true);
        ro.get_opt("authenticated", o.authenticated);
        ro.get_opt("latency_s_per_km", o.latency_s_per_km);
        ro.finish();
        c.overrides.push_back(o);
    }
    r.finish();
    return c;
}

Demand read_demand(const Json& j, std::vector<Violation>& v, std::size_t idx) {
    Demand d;
    Reader r(v, j, fmt::format("demands[{}]", idx));
    r.get("id", d.id, true);
    r.get("src", d.src, true);
    r.get("dst", d.dst, true);
    get_enum(r, "application", d.application, [](std::string_view s) {
        return parse_named<Application>(
            s, {{"pairs", Application::Pairs}, {"bbm92", Application::Bbm92}, {"teleport", Application::Teleport}});
    });
    r.get("target_pairs", d.target_pairs);
    r.get("key_length", d.key_length);
    r.get("check_fraction", d.check_fraction);
    r.get_opt("sacrifice_fraction", d.sacrifice_fraction);
    r.get("link_f_target", d.link_f_target);
    r.get("purify_budget", d.purify_budget);
    r.get("start_s", d.start_s);
    r.finish();
    return d;
}

AttackSpec read_attack(const Json& j, std::vector<Violation>& v, std::size_t idx) {
    AttackSpec a;
    Reader r(v, j, fmt::format("attacks[{}]", idx));
    r.get("attacker", a.attacker, true);
    r.get("kind", a.kind, true);
    if (const Json* t = r.child("target")) a.target = *t;
    if (const Json* p = r.child("params")) {
        if (p->is_object())
            a.params = *p;
        else
            r.fail("schema.type", "field 'params' must be an object");
    }
    if (const Json* w = r.child("window")) {
        if (w->is_array() && w->size() == 2 && (*w)[0].is_number() &&
            ((*w)[1].is_number() || (*w)[1].is_null())) {
            a.window.start_s = (*w)[0].get<double>();
            if ((*w)[1].is_number()) a.window.end_s = (*w)[1].get<double>();
        } else {
            r.fail("schema.type", "field 'window' must be [start_s, end_s|null]");
        }
    }
    r.finish();
    return a;
}

ProtocolConfig read_protocol(const Json* j, std::vector<Violation>& v) {
    ProtocolConfig p;
    if (!j) return p;
    Reader r(v, *j, "protocol");
    r.get("horizon_s", p.horizon_s);
    get_enum(r, "cert_scope", p.cert_scope, [](std::string_view s) {
        return parse_named<CertScope>(s, {{"link", CertScope::Link}, {"e2e", CertScope::EndToEnd}});
    });
    r.get("qber_threshold", p.qber_threshold);
    r.get("sacrifice_fraction", p.sacrifice_fraction);
    r.get("decoherence_tau_s", p.decoherence_tau_s);
    r.get("setup_timeout_rtts", p.setup_timeout_rtts);
    get_enum(r, "routing_cost", p.routing_cost, [](std::string_view s) {
        return parse_named<RoutingCost>(s, {{"hops", RoutingCost::Hops}, {"neg_log_fidelity", RoutingCost::NegLogFidelity}});
    });
    if (const Json* m = r.child("monitor")) {
        Reader rm(v, *m, "protocol.monitor");
        get_enum(rm, "policy", p.monitor.policy, [](std::string_view s) {
            return parse_named<ReputationPolicy>(s, {{"naive", ReputationPolicy::Naive}, {"hardened", ReputationPolicy::Hardened}});
        });
        rm.get("k", p.monitor.k);
        rm.get("delta", p.monitor.delta);
        rm.get("fidelity_floor", p.monitor.fidelity_floor);
        rm.get("qber_ceiling", p.monitor.qber_ceiling);
        rm.get("min_samples", p.monitor.min_samples);
        rm.get("verify_mean_s", p.monitor.verify_mean_s);
        rm.finish();
    }
    r.finish();
    return p;
}

void check_semantics(const Topology& topo, const std::vector<Demand>& demands, const ProtocolConfig& p,
                     std::vector<Violation>& v) {
    auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
    std::set<std::string> ids;
    for (const auto& d : demands) {
        if (!ids.insert(d.id).second) v.push_back({"demand.duplicate_id", d.id, "demand id declared twice"});
        for (const auto* end : {&d.src, &d.dst}) {
            if (!topo.has_node(*end))
                v.push_back({"demand.endpoint", d.id, fmt::format("unknown node '{}'", *end)});
            else if (!is_end_node(topo.node(*end).kind))
                v.push_back({"demand.endpoint", d.id, fmt::format("'{}' is not an ENode or MNode", *end)});
        }
        if (d.src == d.dst) v.push_back({"demand.endpoint", d.id, "src and dst coincide"});
        if (d.target_pairs < 1) v.push_back({"demand.target_pairs", d.id, "target_pairs must be positive"});
        if (d.application == Application::Bbm92 && d.key_length < 1)
            v.push_back({"demand.key_length", d.id, "key_length must be positive"});
        if (!(d.check_fraction > 0.0 && d.check_fraction < 1.0))
            v.push_back({"demand.check_fraction", d.id, "check_fraction must lie in (0, 1)"});
        if (d.sacrifice_fraction && !in01(*d.sacrifice_fraction))
            v.push_back({"demand.sacrifice_fraction", d.id, "sacrifice_fraction must lie in [0, 1]"});
        if (!in01(d.link_f_target)) v.push_back({"demand.link_f_target", d.id, "link_f_target must lie in [0, 1]"});
        if (d.purify_budget < 0) v.push_back({"demand.purify_budget", d.id, "purify_budget must be non-negative"});
        if (d.link_f_target > 0.0 && d.purify_budget < 1)
            v.push_back({"demand.purify_budget", d.id, "a purification target needs purify_budget >= 1"});
        if (d.start_s < 0) v.push_back({"demand.start_s", d.id, "start_s must be non-negative"});
    }
    if (!(p.horizon_s > 0)) v.push_back({"protocol.horizon", "protocol", "horizon_s must be positive"});
    if (!in01(p.sacrifice_fraction)) v.push_back({"protocol.sacrifice_fraction", "protocol", "must lie in [0, 1]"});
    if (!in01(p.qber_threshold)) v.push_back({"protocol.qber_threshold", "protocol", "must lie in [0, 1]"});
    if (p.decoherence_tau_s < 0) v.push_back({"protocol.decoherence", "protocol", "tau must be non-negative"});
    if (!(p.setup_timeout_rtts > 0)) v.push_back({"protocol.setup_timeout", "protocol", "must be positive"});
    const auto& m = p.monitor;
    if (m.k < 1) v.push_back({"monitor.k", "protocol.monitor", "k must be at least 1"});
    if (!(m.delta > 0 && m.delta < 1)) v.push_back({"monitor.delta", "protocol.monitor", "delta must lie in (0, 1)"});
    if (m.min_samples < 1) v.push_back({"monitor.min_samples", "protocol.monitor", "must be positive"});
    if (!(m.verify_mean_s > 0)) v.push_back({"monitor.verify_mean", "protocol.monitor", "must be positive"});
}

}  // namespace

Scenario load_scenario(const Json& doc) {
    std::vector<Violation> v;
    Reader root(v, doc, "scenario");
    if (!root.ok()) throw ValidationError(std::move(v));

    int format_version = kScenarioFormatVersion;
    std::uint64_t seed = 1;
    root.get("format_version", format_version);
    root.get("seed", seed);
    if (format_version != kScenarioFormatVersion)
        root.fail("schema.format_version", fmt::format("unsupported format_version {}", format_version));

    std::vector<NodeSpec> nodes;
    const Json& jn = array_or_empty(root, "nodes");
    for (std::size_t i = 0; i < jn.size(); ++i) nodes.push_back(read_node(jn[i], v, i));
    std::vector<LinkSpec> links;
    const Json& jl = array_or_empty(root, "links");
    for (std::size_t i = 0; i < jl.size(); ++i) links.push_back(read_link(jl[i], v, i));
    ClassicalPlane classical = read_classical(root.child("classical"), v);
    std::vector<Demand> demands;
    const Json& jd = array_or_empty(root, "demands");
    for (std::size_t i = 0; i < jd.size(); ++i) demands.push_back(read_demand(jd[i], v, i));
    std::vector<AttackSpec> attacks;
    const Json& ja = array_or_empty(root, "attacks");
    for (std::size_t i = 0; i < ja.size(); ++i) attacks.push_back(read_attack(ja[i], v, i));
    ProtocolConfig protocol = read_protocol(root.child("protocol"), v);
    root.finish();
    if (nodes.empty()) root.fail("schema.required", "scenario declares no nodes");
    if (!v.empty()) throw ValidationError(std::move(v));

    Topology topo(std::move(nodes), std::move(links), std::move(classical));
    check_semantics(topo, demands, protocol, v);
    for (std::size_t i = 0; i < attacks.size(); ++i)
        if (attacks[i].window.end_s < attacks[i].window.start_s)
            v.push_back({"attack.window", fmt::format("attacks[{}]", i), "window ends before it starts"});
    if (!v.empty()) throw ValidationError(std::move(v));

    std::sort(demands.begin(), demands.end(), [](auto& x, auto& y) { return x.id < y.id; });
    return Scenario{format_version, seed, std::move(topo), std::move(demands), std::move(attacks), protocol};
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scenario file " + path.string());
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError({{"schema.syntax", path.filename().string(), e.what()}});
    }
    return load_scenario(doc);
}

Json to_json(const Topology& t) {
    Json nodes = Json::array();
    for (const auto& n : t.nodes())
        nodes.push_back({{"id", n.id},
                         {"kind", to_string(n.kind)},
                         {"hijacked", n.hijacked},
                         {"qubits", {{"interface", n.qubits.interface},
                                     {"buffer", n.qubits.buffer},
                                     {"terminal", n.qubits.terminal}}}});
    Json links = Json::array();
    for (const auto& l : t.links()) {
        Json j = {{"id", l.id},
                  {"a", l.a},
                  {"b", l.b},
                  {"architecture", to_string(l.architecture)},
                  {"length_km", l.length_km},
                  {"attenuation_db_per_km", l.attenuation_db_per_km},
                  {"attempt_rate_hz", l.attempt_rate_hz},
                  {"bsa_success_cap", l.bsa_success_cap},
                  {"base_fidelity", l.base_fidelity}};
        if (l.midpoint) j["midpoint"] = *l.midpoint;
        links.push_back(std::move(j));
    }
    auto overrides = t.classical_plane().overrides;
    std::sort(overrides.begin(), overrides.end(),
              [](auto& x, auto& y) { return channel_key(x.a, x.b) < channel_key(y.a, y.b); });
    Json ov = Json::array();
    for (const auto& o : overrides) {
        auto [a, b] = channel_key(o.a, o.b);
        Json j = {{"a", a}, {"b", b}};
        if (o.authenticated) j["authenticated"] = *o.authenticated;
        if (o.latency_s_per_km) j["latency_s_per_km"] = *o.latency_s_per_km;
        ov.push_back(std::move(j));
    }
    return {{"nodes", nodes},
            {"links", links},
            {"classical", {{"authenticated", t.classical_plane().authenticated},
                           {"latency_s_per_km", t.classical_plane().latency_s_per_km},
                           {"overrides", ov}}}};
}

Json normalized(const Scenario& s) {
    Json doc = to_json(s.topology);
    doc["format_version"] = s.format_version;
    doc["seed"] = s.seed;
    Json demands = Json::array();
    for (const auto& d : s.demands) {
        Json j = {{"id", d.id},
                  {"src", d.src},
                  {"dst", d.dst},
                  {"application", to_string(d.application)},
                  {"target_pairs", d.target_pairs},
                  {"key_length", d.key_length},
                  {"check_fraction", d.check_fraction},
                  {"sacrifice_fraction", d.sacrifice_fraction.value_or(s.protocol.sacrifice_fraction)},
                  {"link_f_target", d.link_f_target},
                  {"purify_budget", d.purify_budget},
                  {"start_s", d.start_s}};
        demands.push_back(std::move(j));
    }
    doc["demands"] = demands;
    Json attacks = Json::array();
    for (const auto& a : s.attacks) {
        Json w = Json::array({a.window.start_s});
        if (std::isinf(a.window.end_s))
            w.push_back(nullptr);
        else
            w.push_back(a.window.end_s);
        attacks.push_back({{"attacker", a.attacker},
                           {"kind", a.kind},
                           {"target", a.target},
                           {"params", a.params},
                           {"window", w}});
    }
    doc["attacks"] = attacks;
    const auto& p = s.protocol;
    const auto& m = p.monitor;
    doc["protocol"] = {{"horizon_s", p.horizon_s},
                       {"cert_scope", to_string(p.cert_scope)},
                       {"qber_threshold", p.qber_threshold},
                       {"sacrifice_fraction", p.sacrifice_fraction},
                       {"decoherence_tau_s", p.decoherence_tau_s},
                       {"setup_timeout_rtts", p.setup_timeout_rtts},
                       {"routing_cost", to_string(p.routing_cost)},
                       {"monitor", {{"policy", to_string(m.policy)},
                                    {"k", m.k},
                                    {"delta", m.delta},
                                    {"fidelity_floor", m.fidelity_floor},
                                    {"qber_ceiling", m.qber_ceiling},
                                    {"min_samples", m.min_samples},
                                    {"verify_mean_s", m.verify_mean_s}}}};
    return doc;
}

std::string normalized_dump(const Scenario& s) { return normalized(s).dump(2) + "\n"; }

}  // namespace qrsim::net
