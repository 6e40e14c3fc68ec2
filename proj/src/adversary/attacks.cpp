#include "qrsim/adversary/attacks.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace qrsim::adversary {

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> c = {
        {AttackKind::EavesdropQuantum, "eavesdrop_quantum", TargetType::Link, "fiber tap that breaks states it reads"},
        {AttackKind::InterceptResend, "intercept_resend", TargetType::Link, "malicious entanglement (measure and resend)"},
        {AttackKind::EntanglingProbe, "entangling_probe", TargetType::Link, "malicious entanglement (weak probe)"},
        {AttackKind::FaultInject, "fault_inject", TargetType::Link, "unauthorized optical pulses"},
        {AttackKind::StandoffNoise, "standoff_noise", TargetType::NodeList, "RF / out-of-system standoff attack"},
        {AttackKind::DestroyAsset, "destroy_asset", TargetType::NodeOrLink, "vandalism"},
        {AttackKind::StealAsset, "steal_asset", TargetType::Node, "theft of hardware"},
        {AttackKind::EavesdropClassical, "eavesdrop_classical", TargetType::Channel, "classical eavesdropping"},
        {AttackKind::DropMessages, "drop_messages", TargetType::Channel, "classical message dropping"},
        {AttackKind::ModifyMessages, "modify_messages", TargetType::Channel, "Pauli frame overwriting"},
        {AttackKind::RerouteMessages, "reroute_messages", TargetType::HijackedNode, "disobeying routing information"},
        {AttackKind::ClassicalDos, "classical_dos", TargetType::Channel, "coordination message disruption"},
        {AttackKind::FalseFailureReport, "false_failure_report", TargetType::HijackedNode, "false failure report"},
        {AttackKind::QdosOversizedRequest, "qdos_oversized_request", TargetType::HijackedNode, "QDoS oversized key request"},
        {AttackKind::Qddos, "qddos", TargetType::HijackedNodes, "distributed QDoS"},
        {AttackKind::LinkDown, "link_down", TargetType::HijackedLinkEnd, "misreported link status"},
        {AttackKind::LinkBadFaith, "link_bad_faith", TargetType::HijackedLinkEnd, "bad-faith link operation"},
        {AttackKind::MitmBbm92, "mitm_bbm92", TargetType::HijackedNode, "man-in-the-middle on BBM92"},
        {AttackKind::SwitchDisrupt, "switch_disrupt", TargetType::HijackedNode, "switching disruption"},
        {AttackKind::FrameNodes, "frame_nodes", TargetType::HijackedNode, "framing / separator partition"},
        {AttackKind::PathBlackHole, "path_black_hole", TargetType::HijackedNode, "path black hole"},
        {AttackKind::MaliciousApplication, "malicious_application", TargetType::HijackedNode, "malicious application"},
    };
    return c;
}

const CatalogEntry& entry(AttackKind kind) {
    for (const auto& e : catalog())
        if (e.kind == kind) return e;
    throw ConfigError("attack kind missing from catalog");
}

std::optional<AttackKind> kind_from_string(std::string_view name) {
    for (const auto& e : catalog())
        if (e.name == name) return e.kind;
    return std::nullopt;
}

std::string to_string(AttackKind kind) { return std::string(entry(kind).name); }

namespace {

using net::Json;

class ActionParser {
public:
    ActionParser(const net::Scenario& s, std::vector<Violation>& sink, std::string subject)
        : s_(s), sink_(sink), subject_(std::move(subject)) {}

    void fail(const char* rule, const std::string& msg) { sink_.push_back({rule, subject_, msg}); }

    bool node_exists(const std::string& n) {
        if (s_.topology.has_node(n)) return true;
        fail("attack.target", fmt::format("unknown node '{}'", n));
        return false;
    }

    bool hijacked(const std::string& n) {
        if (!node_exists(n)) return false;
        if (s_.topology.node(n).hijacked) return true;
        fail("attack.not_hijacked", fmt::format("node '{}' is not marked hijacked", n));
        return false;
    }

    std::optional<std::string> string_target(const Json& t) {
        if (t.is_string()) return t.get<std::string>();
        fail("attack.target", "target must be a string id");
        return std::nullopt;
    }

    std::vector<std::string> list(const Json& j, const char* what) {
        std::vector<std::string> out;
        if (!j.is_array()) {
            fail("attack.params", fmt::format("{} must be an array of ids", what));
            return out;
        }
        for (const auto& x : j) {
            if (!x.is_string()) {
                fail("attack.params", fmt::format("{} must contain strings", what));
                continue;
            }
            out.push_back(x.get<std::string>());
        }
        return out;
    }

    double unit(const Json& params, const char* key, double def) {
        if (!params.contains(key)) return def;
        if (!params[key].is_number()) {
            fail("attack.params", fmt::format("'{}' must be a number", key));
            return def;
        }
        double v = params[key].get<double>();
        if (v < 0.0 || v > 1.0) fail("attack.params", fmt::format("'{}' must lie in [0, 1]", key));
        return std::clamp(v, 0.0, 1.0);
    }

    std::optional<ChannelId> channel(const Json& t) {
        std::string a, b;
        if (t.is_object() && t.contains("a") && t.contains("b") && t["a"].is_string() && t["b"].is_string()) {
            a = t["a"].get<std::string>();
            b = t["b"].get<std::string>();
        } else if (t.is_string() && t.get<std::string>().find('~') != std::string::npos) {
            auto s = t.get<std::string>();
            auto pos = s.find('~');
            a = s.substr(0, pos);
            b = s.substr(pos + 1);
        } else {
            fail("attack.target", "classical target must be {\"a\",\"b\"} or \"A~B\"");
            return std::nullopt;
        }
        if (!node_exists(a) || !node_exists(b)) return std::nullopt;
        if (a == b) {
            fail("attack.target", "classical channel endpoints coincide");
            return std::nullopt;
        }
        return net::channel_key(a, b);
    }

    const net::Scenario& s_;

private:
    std::vector<Violation>& sink_;
    std::string subject_;
};

const std::set<std::string> kKnownParams = {
    "strength", "q", "channel", "predicts_sampling", "holds_auth_keys", "p", "delay_s", "suppress",
    "hardware", "victim", "victims", "advertised", "demand", "demands", "dst", "key_length"};

}  // namespace

std::vector<AttackScript> build_scripts(const net::Scenario& s) {
    std::vector<Violation> v;
    std::map<std::string, AttackScript> by_attacker;

    for (std::size_t i = 0; i < s.attacks.size(); ++i) {
        const auto& spec = s.attacks[i];
        const std::string subject = fmt::format("attacks[{}]", i);
        ActionParser p(s, v, subject);
        const auto kind = kind_from_string(spec.kind);
        if (!kind) {
            p.fail("attack.unknown_kind", fmt::format("unknown attack kind '{}'", spec.kind));
            continue;
        }
        if (spec.attacker.empty()) p.fail("attack.attacker", "attacker id must be non-empty");
        for (auto it = spec.params.begin(); it != spec.params.end(); ++it)
            if (!kKnownParams.count(it.key())) p.fail("attack.params", fmt::format("unknown parameter '{}'", it.key()));

        auto& script = by_attacker[spec.attacker];
        script.attacker_id = spec.attacker;
        AttackAction a;
        a.id = fmt::format("{}#{}", spec.attacker, i);
        a.attacker = spec.attacker;
        a.kind = *kind;
        a.window = spec.window;
        const Json& prm = spec.params;
        if (prm.value("predicts_sampling", false)) script.knowledge.predicts_sampling = true;
        if (prm.value("holds_auth_keys", false)) script.knowledge.holds_auth_keys = true;

        switch (entry(*kind).target) {
            case TargetType::Link:
            case TargetType::HijackedLinkEnd: {
                auto t = p.string_target(spec.target);
                if (!t) break;
                if (!s.topology.has_link(*t)) {
                    p.fail("attack.target", fmt::format("unknown link '{}'", *t));
                    break;
                }
                a.link = *t;
                const auto& l = s.topology.link(*t);
                if (entry(*kind).target == TargetType::HijackedLinkEnd) {
                    const bool ha = s.topology.node(l.a).hijacked, hb = s.topology.node(l.b).hijacked;
                    if (!ha && !hb) {
                        p.fail("attack.not_hijacked", fmt::format("neither end of link '{}' is hijacked", *t));
                        break;
                    }
                    a.node = ha ? l.a : l.b;
                    script.compromised_nodes.insert(a.node);
                }
                script.tapped_quantum_links.insert(a.link);
                break;
            }
            case TargetType::Node: {
                auto t = p.string_target(spec.target);
                if (t && p.node_exists(*t)) {
                    a.node = *t;
                    script.physical_targets.insert(*t);
                }
                break;
            }
            case TargetType::HijackedNode: {
                auto t = p.string_target(spec.target);
                if (t && p.hijacked(*t)) {
                    a.node = *t;
                    script.compromised_nodes.insert(*t);
                }
                break;
            }
            case TargetType::HijackedNodes: {
                for (const auto& n : p.list(spec.target, "target")) {
                    if (p.hijacked(n)) {
                        a.nodes.push_back(n);
                        script.compromised_nodes.insert(n);
                    }
                }
                if (a.nodes.empty()) p.fail("attack.target", "at least one hijacked source is required");
                break;
            }
            case TargetType::NodeList: {
                for (const auto& n : p.list(spec.target, "target"))
                    if (p.node_exists(n)) {
                        a.nodes.push_back(n);
                        script.physical_targets.insert(n);
                    }
                break;
            }
            case TargetType::Channel: {
                if (auto c = p.channel(spec.target)) {
                    a.channel = *c;
                    script.tapped_classical_channels.insert(*c);
                }
                break;
            }
            case TargetType::NodeOrLink: {
                auto t = p.string_target(spec.target);
                if (!t) break;
                if (s.topology.has_link(*t))
                    a.link = *t;
                else if (p.node_exists(*t))
                    a.node = *t;
                script.physical_targets.insert(*t);
                break;
            }
        }

        // Kind-specific parameters.
        switch (*kind) {
            case AttackKind::EntanglingProbe:
                a.strength = p.unit(prm, "strength", 1.0);
                break;
            case AttackKind::FaultInject:
            case AttackKind::StandoffNoise:
            case AttackKind::LinkBadFaith: {
                a.strength = p.unit(prm, "q", *kind == AttackKind::LinkBadFaith ? 0.5 : 0.2);
                const std::string ch = prm.value("channel", std::string("depolarize"));
                if (ch == "depolarize")
                    a.noise = state::ChannelKind::Depolarize;
                else if (ch == "dephase")
                    a.noise = state::ChannelKind::Dephase;
                else
                    p.fail("attack.params", "channel must be depolarize or dephase");
                break;
            }
            case AttackKind::DropMessages:
            case AttackKind::ModifyMessages:
            case AttackKind::InterceptResend:
            case AttackKind::EavesdropQuantum:
                a.strength = p.unit(prm, "p", 1.0);
                break;
            case AttackKind::ClassicalDos:
                a.suppress = p.unit(prm, "suppress", 0.0);
                a.delay_s = prm.value("delay_s", 1e-3);
                if (a.delay_s < 0) p.fail("attack.params", "delay_s must be non-negative");
                break;
            case AttackKind::StealAsset:
                a.hardware = prm.value("hardware", std::string("quantum"));
                if (a.hardware != "quantum" && a.hardware != "classical")
                    p.fail("attack.params", "hardware must be quantum or classical");
                break;
            case AttackKind::FalseFailureReport:
                a.victim = prm.value("victim", std::string());
                if (a.victim.empty() || !s.topology.has_node(a.victim))
                    p.fail("attack.params", "false_failure_report needs an existing 'victim' node");
                break;
            case AttackKind::FrameNodes:
                if (prm.contains("victims")) a.victims = p.list(prm["victims"], "victims");
                if (a.victims.empty()) p.fail("attack.params", "frame_nodes needs a non-empty 'victims' list");
                for (const auto& x : a.victims) p.node_exists(x);
                break;
            case AttackKind::PathBlackHole:
                if (prm.contains("advertised")) a.advertised = p.list(prm["advertised"], "advertised");
                if (a.advertised.empty()) p.fail("attack.params", "path_black_hole needs an 'advertised' list");
                for (const auto& x : a.advertised) p.node_exists(x);
                break;
            case AttackKind::MitmBbm92:
                if (prm.contains("demand") && prm["demand"].is_string()) a.demands = {prm["demand"].get<std::string>()};
                if (a.demands.size() != 1) p.fail("attack.params", "mitm_bbm92 needs a 'demand' id");
                break;
            case AttackKind::SwitchDisrupt:
                if (prm.contains("demands")) a.demands = p.list(prm["demands"], "demands");
                if (a.demands.size() != 2) p.fail("attack.params", "switch_disrupt needs exactly two 'demands'");
                break;
            case AttackKind::QdosOversizedRequest:
            case AttackKind::Qddos:
                a.dst = prm.value("dst", std::string());
                a.key_length = prm.value("key_length", 1000000);
                if (a.dst.empty() || !s.topology.has_node(a.dst) || !net::is_end_node(s.topology.node(a.dst).kind))
                    p.fail("attack.params", "qdos needs an end-node 'dst'");
                if (a.key_length < 1) p.fail("attack.params", "key_length must be positive");
                break;
            default:
                break;
        }

        // Demand references and the classical channel they imply.
        for (const auto& d : a.demands) {
            auto it = std::find_if(s.demands.begin(), s.demands.end(), [&](auto& x) { return x.id == d; });
            if (it == s.demands.end()) {
                p.fail("attack.params", fmt::format("unknown demand '{}'", d));
                continue;
            }
            if (*kind == AttackKind::MitmBbm92) script.tapped_classical_channels.insert(net::channel_key(it->src, it->dst));
        }
        if (*kind == AttackKind::SwitchDisrupt && !a.node.empty() && s.topology.node(a.node).kind != net::NodeKind::XNode)
            p.fail("attack.target", "switch_disrupt requires an XNode");
        if (*kind == AttackKind::MaliciousApplication && !a.node.empty() &&
            s.topology.node(a.node).kind != net::NodeKind::ENode)
            p.fail("attack.target", "malicious_application requires an ENode");
        if ((*kind == AttackKind::QdosOversizedRequest) && !a.node.empty() &&
            !net::is_end_node(s.topology.node(a.node).kind))
            p.fail("attack.target", "qdos source must be an end node");
        script.actions.push_back(std::move(a));
    }
    if (!v.empty()) throw ValidationError(std::move(v));

    std::vector<AttackScript> out;
    for (auto& [_, sc] : by_attacker) out.push_back(std::move(sc));
    return out;
}

AttackPlan::AttackPlan(std::vector<AttackScript> scripts) : scripts_(std::move(scripts)) {}

const AttackScript& AttackPlan::script(const std::string& attacker) const {
    for (const auto& s : scripts_)
        if (s.attacker_id == attacker) return s;
    throw ConfigError("unknown attacker '" + attacker + "'");
}

std::vector<const AttackAction*> AttackPlan::actions() const {
    std::vector<const AttackAction*> out;
    for (const auto& s : scripts_)
        for (const auto& a : s.actions) out.push_back(&a);
    std::sort(out.begin(), out.end(), [](auto* x, auto* y) { return x->id < y->id; });
    return out;
}

const AttackAction* AttackPlan::find(const std::string& attack_id) const {
    for (const auto& s : scripts_)
        for (const auto& a : s.actions)
            if (a.id == attack_id) return &a;
    return nullptr;
}

state::PauliChannel tamper_channel(const AttackAction& a) {
    switch (a.kind) {
        case AttackKind::InterceptResend:
            return state::to_pauli({state::ChannelKind::InterceptResendRandomBasis, 1.0});
        case AttackKind::EntanglingProbe:
            return state::to_pauli({state::ChannelKind::EntanglingProbe, a.strength});
        case AttackKind::FaultInject:
        case AttackKind::StandoffNoise:
        case AttackKind::LinkBadFaith:
            return state::to_pauli({a.noise, a.strength});
        default:
            return {};
    }
}

std::vector<Tamper> AttackPlan::on_link_pair(const std::string& link, const std::string& node_a,
                                             const std::string& node_b, double t) const {
    std::vector<Tamper> out;
    for (const auto& s : scripts_) {
        for (const auto& a : s.actions) {
            if (!a.window.contains(t)) continue;
            Tamper tm;
            tm.attack_id = a.id;
            tm.attacker = a.attacker;
            tm.skips_sampled = s.knowledge.predicts_sampling;
            switch (a.kind) {
                case AttackKind::EavesdropQuantum:
                case AttackKind::InterceptResend:
                case AttackKind::EntanglingProbe:
                case AttackKind::FaultInject:
                case AttackKind::LinkBadFaith:
                    if (a.link != link || !s.taps_link(link)) continue;
                    tm.destroys = a.kind == AttackKind::EavesdropQuantum;
                    tm.leaks = a.kind == AttackKind::InterceptResend || a.kind == AttackKind::EntanglingProbe;
                    tm.evades_link_sampling = a.kind == AttackKind::LinkBadFaith;
                    break;
                case AttackKind::StandoffNoise:
                    if (std::find(a.nodes.begin(), a.nodes.end(), node_a) == a.nodes.end() &&
                        std::find(a.nodes.begin(), a.nodes.end(), node_b) == a.nodes.end())
                        continue;
                    break;
                default:
                    continue;
            }
            tm.channel = tamper_channel(a);
            out.push_back(std::move(tm));
        }
    }
    return out;
}

const AttackAction* AttackPlan::node_behavior(const std::string& node, AttackKind kind, double t) const {
    for (const auto& s : scripts_)
        for (const auto& a : s.actions)
            if (a.kind == kind && a.node == node && s.controls_node(node) && a.window.contains(t)) return &a;
    return nullptr;
}

std::vector<const AttackAction*> AttackPlan::on_channel(const std::string& x, const std::string& y, AttackKind kind,
                                                        double t) const {
    std::vector<const AttackAction*> out;
    const auto key = net::channel_key(x, y);
    for (const auto& s : scripts_)
        for (const auto& a : s.actions)
            if (a.kind == kind && a.channel == key && s.taps_channel(key) && a.window.contains(t)) out.push_back(&a);
    return out;
}

std::vector<const AttackAction*> AttackPlan::of_kind(AttackKind kind) const {
    std::vector<const AttackAction*> out;
    for (const auto* a : actions())
        if (a->kind == kind) out.push_back(a);
    return out;
}

}  // namespace qrsim::adversary
