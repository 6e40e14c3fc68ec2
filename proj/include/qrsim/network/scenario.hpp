#pragma once

#include "qrsim/network/topology.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace qrsim::net {

using Json = nlohmann::json;

inline constexpr int kScenarioFormatVersion = 1;

enum class Application { Pairs, Bbm92, Teleport };
enum class CertScope { Link, EndToEnd };
enum class RoutingCost { Hops, NegLogFidelity };
enum class ReputationPolicy { Naive, Hardened };

std::string to_string(Application a);
std::string to_string(CertScope s);
std::string to_string(RoutingCost c);
std::string to_string(ReputationPolicy p);

struct Demand {
    std::string id;
    std::string src, dst;
    Application application = Application::Pairs;
    int target_pairs = 100;
    int key_length = 1000;  // sifted bits for bbm92
    double check_fraction = 0.1;
    std::optional<double> sacrifice_fraction;  // falls back to protocol default
    double link_f_target = 0.0;               // purification target per link; 0 disables
    int purify_budget = 0;                     // max pairs consumed per purified link pair
    double start_s = 0.0;
};

struct MonitorConfig {
    ReputationPolicy policy = ReputationPolicy::Naive;
    int k = 2;
    double delta = 0.01;
    double fidelity_floor = 0.85;
    double qber_ceiling = 0.11;
    int min_samples = 20;
    double verify_mean_s = 0.01;
};

struct ProtocolConfig {
    double horizon_s = 10.0;
    CertScope cert_scope = CertScope::EndToEnd;
    double qber_threshold = 0.11;
    double sacrifice_fraction = 0.1;
    double decoherence_tau_s = 0.0;  // 0 disables memory decay
    double setup_timeout_rtts = 10.0;
    RoutingCost routing_cost = RoutingCost::Hops;
    MonitorConfig monitor;
};

struct Window {
    double start_s = 0.0;
    double end_s = std::numeric_limits<double>::infinity();
    bool contains(double t) const { return t >= start_s && t < end_s; }
};

/// Raw attack entry; semantic checks against the topology live in the adversary module.
struct AttackSpec {
    std::string attacker;
    std::string kind;
    Json target;
    Json params = Json::object();
    Window window;
};

struct Scenario {
    int format_version = kScenarioFormatVersion;
    std::uint64_t seed = 1;
    Topology topology;
    std::vector<Demand> demands;
    std::vector<AttackSpec> attacks;
    ProtocolConfig protocol;
};

/// Parses and validates a scenario document. Throws ValidationError (all violations) on
/// structural problems; attack entries are only checked for shape here.
Scenario load_scenario(const Json& doc);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Canonical form with every default filled in and collections sorted by id.
Json normalized(const Scenario& s);
std::string normalized_dump(const Scenario& s);

Json to_json(const Topology& t);

}  // namespace qrsim::net
