#include "qrsim/network/topology.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace qrsim::net {

namespace {

constexpr std::pair<NodeKind, std::string_view> kNodeKindNames[] = {
    {NodeKind::ENode, "ENode"},         {NodeKind::MNode, "MNode"},
    {NodeKind::RNode, "RNode"},         {NodeKind::XNode, "XNode"},
    {NodeKind::INodeBSA, "INode_BSA"},  {NodeKind::INodeEPPS, "INode_EPPS"},
};

constexpr std::pair<Architecture, std::string_view> kArchNames[] = {
    {Architecture::MemoryToMemory, "MemoryToMemory"},
    {Architecture::MemoriesAndBSA, "MemoriesAndBSA"},
    {Architecture::MemoriesAndEPPS, "MemoriesAndEPPS"},
};

std::optional<NodeKind> required_midpoint(Architecture arch) {
    switch (arch) {
        case Architecture::MemoriesAndBSA: return NodeKind::INodeBSA;
        case Architecture::MemoriesAndEPPS: return NodeKind::INodeEPPS;
        case Architecture::MemoryToMemory: break;
    }
    return std::nullopt;
}

}  // namespace

std::string to_string(NodeKind kind) {
    for (auto [k, name] : kNodeKindNames)
        if (k == kind) return std::string(name);
    return "?";
}

std::string to_string(Architecture arch) {
    for (auto [k, name] : kArchNames)
        if (k == arch) return std::string(name);
    return "?";
}

std::optional<NodeKind> node_kind_from_string(std::string_view s) {
    for (auto [k, name] : kNodeKindNames)
        if (name == s) return k;
    return std::nullopt;
}

std::optional<Architecture> architecture_from_string(std::string_view s) {
    for (auto [k, name] : kArchNames)
        if (name == s) return k;
    return std::nullopt;
}

std::pair<std::string, std::string> channel_key(const std::string& a, const std::string& b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

std::vector<Violation> Topology::check(const std::vector<NodeSpec>& nodes,
                                       const std::vector<LinkSpec>& links) {
    std::vector<Violation> out;
    auto flag = [&](std::string rule, std::string subject, std::string msg) {
        out.push_back({std::move(rule), std::move(subject), std::move(msg)});
    };

    std::map<std::string, const NodeSpec*> by_id;
    for (const auto& n : nodes) {
        if (!by_id.emplace(n.id, &n).second) flag("node.duplicate_id", n.id, "node id declared twice");
        if (n.qubits.interface < 0 || n.qubits.buffer < 0 || n.qubits.terminal < 0)
            flag("node.qubits", n.id, "qubit counts must be non-negative");
        if (n.kind == NodeKind::MNode && (n.qubits.buffer != 0 || n.qubits.terminal != 0))
            flag("mnode.memory", n.id, "an MNode has no buffer or terminal qubits");
        if (n.kind != NodeKind::ENode && n.qubits.terminal != 0)
            flag("terminal.enode_only", n.id, "terminal qubits exist only on ENodes");
    }

    std::set<std::string> link_ids;
    std::map<std::string, int> degree;
    std::map<std::string, int> midpoint_uses;
    for (const auto& l : links) {
        if (!link_ids.insert(l.id).second) flag("link.duplicate_id", l.id, "link id declared twice");
        bool endpoints_ok = true;
        for (const auto* end : {&l.a, &l.b}) {
            auto it = by_id.find(*end);
            if (it == by_id.end()) {
                flag("link.dangling", l.id, fmt::format("endpoint '{}' is not a node", *end));
                endpoints_ok = false;
            } else if (is_inode(it->second->kind)) {
                flag("link.inode_endpoint", l.id,
                     fmt::format("'{}' is an INode and may only appear as a midpoint", *end));
                endpoints_ok = false;
            }
        }
        if (l.a == l.b) {
            flag("link.self_loop", l.id, "link endpoints coincide");
            endpoints_ok = false;
        }
        if (endpoints_ok) {
            ++degree[l.a];
            ++degree[l.b];
        }

        const auto need = required_midpoint(l.architecture);
        if (need && !l.midpoint) {
            flag("link.midpoint_missing", l.id,
                 fmt::format("{} requires a {} midpoint", to_string(l.architecture), to_string(*need)));
        } else if (!need && l.midpoint) {
            flag("link.midpoint_unexpected", l.id, "MemoryToMemory links have no midpoint");
        } else if (need) {
            auto it = by_id.find(*l.midpoint);
            if (it == by_id.end())
                flag("link.dangling", l.id, fmt::format("midpoint '{}' is not a node", *l.midpoint));
            else if (it->second->kind != *need)
                flag("link.midpoint_kind", l.id,
                     fmt::format("midpoint '{}' is {}, expected {}", *l.midpoint,
                                 to_string(it->second->kind), to_string(*need)));
            else
                midpoint_uses[*l.midpoint] += 2;
        }

        if (!(l.bsa_success_cap >= 0.0 && l.bsa_success_cap <= kBsaSuccessBound))
            flag("link.bsa_cap", l.id, fmt::format("bsa_success_cap {} outside [0, 0.5]", l.bsa_success_cap));
        if (!(l.base_fidelity >= 0.25 && l.base_fidelity <= 1.0))
            flag("link.fidelity", l.id, fmt::format("base_fidelity {} outside [0.25, 1]", l.base_fidelity));
        if (!(l.length_km >= 0.0)) flag("link.length", l.id, "length_km must be non-negative");
        if (!(l.attenuation_db_per_km >= 0.0)) flag("link.attenuation", l.id, "attenuation must be non-negative");
        if (!(l.attempt_rate_hz > 0.0)) flag("link.attempt_rate", l.id, "attempt_rate_hz must be positive");
    }

    for (const auto& n : nodes) {
        const int d = is_inode(n.kind) ? midpoint_uses[n.id] : degree[n.id];
        auto bad = [&](const char* rule, const char* expect) {
            flag(rule, n.id, fmt::format("{} has degree {}, expected {}", to_string(n.kind), d, expect));
        };
        switch (n.kind) {
            case NodeKind::ENode: if (d != 1) bad("degree.enode", "1"); break;
            case NodeKind::MNode: if (d != 1) bad("degree.mnode", "1"); break;
            case NodeKind::RNode: if (d != 2) bad("degree.rnode", "2"); break;
            case NodeKind::XNode: if (d < 2) bad("degree.xnode", ">= 2"); break;
            case NodeKind::INodeBSA:
            case NodeKind::INodeEPPS: if (d != 2) bad("degree.inode", "2 (one link)"); break;
        }
    }

    // Connectivity over QNodes and INodes together.
    if (!nodes.empty()) {
        std::map<std::string, std::vector<std::string>> adj;
        for (const auto& l : links) {
            if (!by_id.count(l.a) || !by_id.count(l.b)) continue;
            if (l.midpoint && by_id.count(*l.midpoint)) {
                for (const auto* end : {&l.a, &l.b}) {
                    adj[*end].push_back(*l.midpoint);
                    adj[*l.midpoint].push_back(*end);
                }
            } else {
                adj[l.a].push_back(l.b);
                adj[l.b].push_back(l.a);
            }
        }
        std::set<std::string> seen{nodes.front().id};
        std::deque<std::string> queue{nodes.front().id};
        while (!queue.empty()) {
            auto cur = queue.front();
            queue.pop_front();
            for (const auto& nb : adj[cur])
                if (seen.insert(nb).second) queue.push_back(nb);
        }
        for (const auto& n : nodes)
            if (!seen.count(n.id))
                flag("topology.disconnected", n.id,
                     fmt::format("unreachable from '{}' in the quantum graph", nodes.front().id));
    }
    return out;
}

Topology::Topology(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links, ClassicalPlane classical)
    : nodes_(std::move(nodes)), links_(std::move(links)), classical_(std::move(classical)) {
    auto violations = check(nodes_, links_);
    for (const auto& o : classical_.overrides) {
        const bool known = std::any_of(nodes_.begin(), nodes_.end(), [&](auto& n) { return n.id == o.a; }) &&
                           std::any_of(nodes_.begin(), nodes_.end(), [&](auto& n) { return n.id == o.b; });
        if (!known || o.a == o.b)
            violations.push_back({"classical.override", o.a + "~" + o.b, "override names unknown or equal nodes"});
        if (o.latency_s_per_km && *o.latency_s_per_km < 0)
            violations.push_back({"classical.latency", o.a + "~" + o.b, "latency must be non-negative"});
    }
    if (classical_.latency_s_per_km < 0)
        violations.push_back({"classical.latency", "classical", "latency must be non-negative"});
    if (!violations.empty()) throw ValidationError(std::move(violations));

    std::sort(nodes_.begin(), nodes_.end(), [](auto& x, auto& y) { return x.id < y.id; });
    std::sort(links_.begin(), links_.end(), [](auto& x, auto& y) { return x.id < y.id; });
    for (std::size_t i = 0; i < nodes_.size(); ++i) node_index_[nodes_[i].id] = i;
    for (std::size_t i = 0; i < links_.size(); ++i) {
        link_index_[links_[i].id] = i;
        incident_[links_[i].a].push_back(i);
        incident_[links_[i].b].push_back(i);
    }

    // All-pairs fiber distance (Floyd-Warshall; topologies are small).
    const double inf = std::numeric_limits<double>::infinity();
    for (const auto& x : nodes_)
        for (const auto& y : nodes_) distance_[x.id][y.id] = x.id == y.id ? 0.0 : inf;
    auto relax_edge = [&](const std::string& u, const std::string& v, double w) {
        distance_[u][v] = std::min(distance_[u][v], w);
        distance_[v][u] = std::min(distance_[v][u], w);
    };
    for (const auto& l : links_) {
        relax_edge(l.a, l.b, l.length_km);
        if (l.midpoint) {
            relax_edge(l.a, *l.midpoint, l.length_km / 2);
            relax_edge(l.b, *l.midpoint, l.length_km / 2);
        }
    }
    for (const auto& k : nodes_)
        for (const auto& i : nodes_)
            for (const auto& j : nodes_) {
                const double via = distance_[i.id][k.id] + distance_[k.id][j.id];
                if (via < distance_[i.id][j.id]) distance_[i.id][j.id] = via;
            }
    for (auto& [_, row] : distance_)
        for (auto& [__, d] : row) max_distance_ = std::max(max_distance_, d);
}

const NodeSpec& Topology::node(const std::string& id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end()) throw ConfigError("unknown node '" + id + "'");
    return nodes_[it->second];
}

const LinkSpec& Topology::link(const std::string& id) const {
    auto it = link_index_.find(id);
    if (it == link_index_.end()) throw ConfigError("unknown link '" + id + "'");
    return links_[it->second];
}

std::vector<const LinkSpec*> Topology::links_of(const std::string& node) const {
    std::vector<const LinkSpec*> out;
    auto it = incident_.find(node);
    if (it != incident_.end())
        for (auto i : it->second) out.push_back(&links_[i]);
    return out;
}

std::vector<std::string> Topology::neighbors(const std::string& node) const {
    std::set<std::string> s;
    for (const auto* l : links_of(node)) s.insert(l->other(node));
    return {s.begin(), s.end()};
}

int Topology::degree(const std::string& node) const { return static_cast<int>(links_of(node).size()); }

const LinkSpec* Topology::link_between(const std::string& a, const std::string& b) const {
    for (const auto* l : links_of(a))
        if (l->other(a) == b) return l;  // links_of is id-sorted
    return nullptr;
}

std::optional<double> Topology::fiber_distance(const std::string& a, const std::string& b) const {
    auto ia = distance_.find(a);
    if (ia == distance_.end()) return std::nullopt;
    auto ib = ia->second.find(b);
    if (ib == ia->second.end() || std::isinf(ib->second)) return std::nullopt;
    return ib->second;
}

ClassicalChannel Topology::classical_channel(const std::string& a, const std::string& b) const {
    ClassicalChannel ch;
    std::tie(ch.a, ch.b) = channel_key(a, b);
    ch.authenticated = classical_.authenticated;
    ch.latency_s_per_km = classical_.latency_s_per_km;
    for (const auto& o : classical_.overrides) {
        if (channel_key(o.a, o.b) != std::pair{ch.a, ch.b}) continue;
        if (o.authenticated) ch.authenticated = *o.authenticated;
        if (o.latency_s_per_km) ch.latency_s_per_km = *o.latency_s_per_km;
    }
    ch.latency_s = ch.latency_s_per_km * fiber_distance(a, b).value_or(max_distance_);
    return ch;
}

std::vector<std::string> Topology::end_nodes() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_)
        if (is_end_node(n.kind)) out.push_back(n.id);
    return out;
}

}  // namespace qrsim::net
