#pragma once

#include "qrsim/network/scenario.hpp"
#include "qrsim/network/topology.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qrsim::net {

struct Path {
    std::vector<std::string> nodes;  // QNodes only; INodes never appear
    std::vector<std::string> links;  // links[i] joins nodes[i] and nodes[i+1]
    double cost = 0.0;

    int hops() const { return static_cast<int>(links.size()); }
};

/// Per-link routing weight.
double link_cost(const LinkSpec& link, RoutingCost cost);

/// Minimal-cost simple path avoiding `excluded_nodes` / `excluded_links`; equal costs
/// are broken by the lexicographically smallest node sequence.
std::optional<Path> shortest_path(const Topology& topo, const std::string& src, const std::string& dst,
                                  RoutingCost cost = RoutingCost::Hops,
                                  const std::set<std::string>& excluded_nodes = {},
                                  const std::set<std::string>& excluded_links = {});

struct PartitionReport {
    std::vector<int> component_sizes;  // descending
    double disconnected_pairs_fraction = 0.0;
    int disconnected_pairs = 0;
    int end_node_pairs = 0;
};

/// Connected components of the quantum graph after removing `removed` (INodes included in
/// the count); the fraction is over all end-node pairs of the original topology.
PartitionReport partition_report(const Topology& topo, const std::set<std::string>& removed);

struct LinkLoad {
    int paths = 0;
    double per_attempt = 0.0;  // paths / attempt_rate_hz
};

std::map<std::string, LinkLoad> link_load(const Topology& topo, const std::vector<Path>& active_paths);

/// Largest number of active paths sharing one link.
double max_load(const std::map<std::string, LinkLoad>& loads);

}  // namespace qrsim::net
