#pragma once

#include "qrsim/error.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qrsim::net {

enum class NodeKind { ENode, MNode, RNode, XNode, INodeBSA, INodeEPPS };
enum class Architecture { MemoryToMemory, MemoriesAndBSA, MemoriesAndEPPS };

std::string to_string(NodeKind kind);
std::string to_string(Architecture arch);
std::optional<NodeKind> node_kind_from_string(std::string_view s);
std::optional<Architecture> architecture_from_string(std::string_view s);

inline bool is_inode(NodeKind k) { return k == NodeKind::INodeBSA || k == NodeKind::INodeEPPS; }
inline bool is_end_node(NodeKind k) { return k == NodeKind::ENode || k == NodeKind::MNode; }

struct QubitCapacity {
    int interface = 2;
    int buffer = 4;
    int terminal = 0;
};

struct NodeSpec {
    std::string id;
    NodeKind kind = NodeKind::RNode;
    bool hijacked = false;
    QubitCapacity qubits;
};

inline constexpr double kDefaultAttenuationDbPerKm = 0.2;
inline constexpr double kDefaultLatencySPerKm = 5e-6;
inline constexpr double kDefaultBaseFidelity = 0.98;
inline constexpr double kBsaSuccessBound = 0.5;

struct LinkSpec {
    std::string id;
    std::string a, b;
    Architecture architecture = Architecture::MemoryToMemory;
    std::optional<std::string> midpoint;
    double length_km = 10.0;
    double attenuation_db_per_km = kDefaultAttenuationDbPerKm;
    double attempt_rate_hz = 1e5;
    double bsa_success_cap = kBsaSuccessBound;
    double base_fidelity = kDefaultBaseFidelity;

    const std::string& other(const std::string& node) const { return node == a ? b : a; }
    bool touches(const std::string& node) const { return node == a || node == b; }
};

struct ClassicalOverride {
    std::string a, b;
    std::optional<bool> authenticated;
    std::optional<double> latency_s_per_km;
};

struct ClassicalPlane {
    bool authenticated = true;
    double latency_s_per_km = kDefaultLatencySPerKm;
    std::vector<ClassicalOverride> overrides;
};

struct ClassicalChannel {
    std::string a, b;
    bool authenticated = true;
    double latency_s_per_km = kDefaultLatencySPerKm;
    double latency_s = 0.0;
    std::optional<std::string> compromised_by;
};

/// Unordered node-pair key used for classical channels.
std::pair<std::string, std::string> channel_key(const std::string& a, const std::string& b);

/// Validated, immutable network description.
class Topology {
public:
    /// Builds and validates; throws ValidationError listing every violated rule.
    Topology(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links, ClassicalPlane classical);

    /// Collects rule violations without throwing.
    static std::vector<Violation> check(const std::vector<NodeSpec>& nodes,
                                        const std::vector<LinkSpec>& links);

    const std::vector<NodeSpec>& nodes() const { return nodes_; }
    const std::vector<LinkSpec>& links() const { return links_; }
    const ClassicalPlane& classical_plane() const { return classical_; }

    bool has_node(const std::string& id) const { return node_index_.count(id) > 0; }
    bool has_link(const std::string& id) const { return link_index_.count(id) > 0; }
    const NodeSpec& node(const std::string& id) const;
    const LinkSpec& link(const std::string& id) const;

    /// Quantum links with `node` as an endpoint, sorted by link id.
    std::vector<const LinkSpec*> links_of(const std::string& node) const;
    /// QNodes one link away (INodes are transparent).
    std::vector<std::string> neighbors(const std::string& node) const;
    int degree(const std::string& node) const;
    /// Cheapest link between two QNodes (smallest id on ties).
    const LinkSpec* link_between(const std::string& a, const std::string& b) const;

    /// Shortest fiber distance in km between two nodes; std::nullopt when disconnected.
    std::optional<double> fiber_distance(const std::string& a, const std::string& b) const;

    /// The (full-mesh) classical channel between two distinct nodes.
    ClassicalChannel classical_channel(const std::string& a, const std::string& b) const;

    std::vector<std::string> end_nodes() const;

private:
    std::vector<NodeSpec> nodes_;
    std::vector<LinkSpec> links_;
    ClassicalPlane classical_;
    std::map<std::string, std::size_t> node_index_;
    std::map<std::string, std::size_t> link_index_;
    std::map<std::string, std::vector<std::size_t>> incident_;
    std::map<std::string, std::map<std::string, double>> distance_;
    double max_distance_ = 0.0;
};

}  // namespace qrsim::net
