#include "qrsim/network/routing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

namespace qrsim::net {

namespace {

constexpr double kCostTol = 1e-12;

struct Label {
    double cost;
    std::vector<std::string> nodes;
    std::vector<std::string> links;
};

bool better(const Label& x, const Label& y) {
    if (x.cost < y.cost - kCostTol) return true;
    if (y.cost < x.cost - kCostTol) return false;
    return x.nodes < y.nodes;
}

}  // namespace

double link_cost(const LinkSpec& link, RoutingCost cost) {
    if (cost == RoutingCost::Hops) return 1.0;
    return -std::log(link.base_fidelity);
}

std::optional<Path> shortest_path(const Topology& topo, const std::string& src, const std::string& dst,
                                  RoutingCost cost, const std::set<std::string>& excluded_nodes,
                                  const std::set<std::string>& excluded_links) {
    if (!topo.has_node(src) || !topo.has_node(dst)) return std::nullopt;
    if (excluded_nodes.count(src) || excluded_nodes.count(dst)) return std::nullopt;

    auto cmp = [](const Label& x, const Label& y) { return better(y, x); };
    std::priority_queue<Label, std::vector<Label>, decltype(cmp)> open(cmp);
    std::map<std::string, Label> settled;
    open.push({0.0, {src}, {}});
    while (!open.empty()) {
        Label cur = open.top();
        open.pop();
        const std::string& at = cur.nodes.back();
        if (settled.count(at)) continue;
        settled.emplace(at, cur);
        if (at == dst) break;
        for (const auto* l : topo.links_of(at)) {
            const std::string& nb = l->other(at);
            if (settled.count(nb) || excluded_nodes.count(nb) || excluded_links.count(l->id)) continue;
            if (l->midpoint && excluded_nodes.count(*l->midpoint)) continue;
            Label next = cur;
            next.cost += link_cost(*l, cost);
            next.nodes.push_back(nb);
            next.links.push_back(l->id);
            open.push(std::move(next));
        }
    }
    auto it = settled.find(dst);
    if (it == settled.end()) return std::nullopt;
    return Path{it->second.nodes, it->second.links, it->second.cost};
}

PartitionReport partition_report(const Topology& topo, const std::set<std::string>& removed) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& n : topo.nodes())
        if (!removed.count(n.id)) adj[n.id];
    auto connect = [&](const std::string& u, const std::string& v) {
        if (removed.count(u) || removed.count(v)) return;
        adj[u].push_back(v);
        adj[v].push_back(u);
    };
    for (const auto& l : topo.links()) {
        if (l.midpoint) {
            connect(l.a, *l.midpoint);
            connect(*l.midpoint, l.b);
        } else {
            connect(l.a, l.b);
        }
    }

    std::map<std::string, int> component;
    PartitionReport rep;
    for (const auto& [start, _] : adj) {
        if (component.count(start)) continue;
        const int cid = static_cast<int>(rep.component_sizes.size());
        int size = 0;
        std::deque<std::string> q{start};
        component[start] = cid;
        while (!q.empty()) {
            auto u = q.front();
            q.pop_front();
            ++size;
            for (const auto& v : adj[u])
                if (component.emplace(v, cid).second) q.push_back(v);
        }
        rep.component_sizes.push_back(size);
    }
    std::sort(rep.component_sizes.rbegin(), rep.component_sizes.rend());

    const auto ends = topo.end_nodes();
    for (std::size_t i = 0; i < ends.size(); ++i)
        for (std::size_t j = i + 1; j < ends.size(); ++j) {
            ++rep.end_node_pairs;
            auto ci = component.find(ends[i]);
            auto cj = component.find(ends[j]);
            if (ci == component.end() || cj == component.end() || ci->second != cj->second)
                ++rep.disconnected_pairs;
        }
    if (rep.end_node_pairs > 0)
        rep.disconnected_pairs_fraction = static_cast<double>(rep.disconnected_pairs) / rep.end_node_pairs;
    return rep;
}

std::map<std::string, LinkLoad> link_load(const Topology& topo, const std::vector<Path>& active_paths) {
    std::map<std::string, LinkLoad> out;
    for (const auto& l : topo.links()) out[l.id];
    for (const auto& p : active_paths)
        for (const auto& id : p.links) {
            const auto& l = topo.link(id);
            auto& load = out[id];
            ++load.paths;
            load.per_attempt = load.paths / l.attempt_rate_hz;
        }
    return out;
}

double max_load(const std::map<std::string, LinkLoad>& loads) {
    double m = 0.0;
    for (const auto& [_, l] : loads) m = std::max(m, static_cast<double>(l.paths));
    return m;
}

}  // namespace qrsim::net
