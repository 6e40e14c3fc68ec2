#pragma once

#include "qrsim/error.hpp"
#include "qrsim/network/scenario.hpp"
#include "qrsim/rng.hpp"
#include "qrsim/state/channels.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qrsim::adversary {

enum class AttackKind {
    EavesdropQuantum,
    InterceptResend,
    EntanglingProbe,
    FaultInject,
    StandoffNoise,
    DestroyAsset,
    StealAsset,
    EavesdropClassical,
    DropMessages,
    ModifyMessages,
    RerouteMessages,
    ClassicalDos,
    FalseFailureReport,
    QdosOversizedRequest,
    Qddos,
    LinkDown,
    LinkBadFaith,
    MitmBbm92,
    SwitchDisrupt,
    FrameNodes,
    PathBlackHole,
    MaliciousApplication,
};

enum class TargetType { Link, HijackedLinkEnd, Node, HijackedNode, HijackedNodes, NodeList, Channel, NodeOrLink };

struct CatalogEntry {
    AttackKind kind;
    std::string_view name;
    TargetType target;
    std::string_view represents;  // the real-world attack this abstract kind stands for
};

/// The closed set of supported attack kinds.
const std::vector<CatalogEntry>& catalog();
const CatalogEntry& entry(AttackKind kind);
std::optional<AttackKind> kind_from_string(std::string_view name);
std::string to_string(AttackKind kind);

using ChannelId = std::pair<std::string, std::string>;  // ordered via net::channel_key

struct Knowledge {
    bool predicts_sampling = false;
    bool holds_auth_keys = false;
};

struct AttackAction {
    std::string id;  // "<attacker>#<index in attacks[]>"
    std::string attacker;
    AttackKind kind;
    net::Window window;

    // Target, as applicable to the kind.
    std::string node;
    std::string link;
    ChannelId channel;
    std::vector<std::string> nodes;

    // Parameters (defaults filled at load).
    double strength = 1.0;       // channel strength / probability of acting on an item
    double delay_s = 1e-3;       // classical_dos added delay
    double suppress = 0.0;       // classical_dos suppression probability
    state::ChannelKind noise = state::ChannelKind::Depolarize;
    std::string hardware = "quantum";  // steal_asset: quantum | classical
    std::string victim;                 // false_failure_report
    std::vector<std::string> victims;   // frame_nodes
    std::vector<std::string> advertised;  // path_black_hole
    std::vector<std::string> demands;     // mitm_bbm92 / switch_disrupt
    std::string dst;                      // qdos / qddos
    int key_length = 1000000;             // qdos / qddos
};

/// Everything one attacker controls; actions may only touch these assets.
struct AttackScript {
    std::string attacker_id;
    std::set<std::string> compromised_nodes;
    std::set<std::string> tapped_quantum_links;
    std::set<ChannelId> tapped_classical_channels;
    std::set<std::string> physical_targets;  // destroy/steal/standoff reach
    Knowledge knowledge;
    std::vector<AttackAction> actions;

    bool controls_node(const std::string& n) const { return compromised_nodes.count(n) > 0; }
    bool taps_link(const std::string& l) const { return tapped_quantum_links.count(l) > 0; }
    bool taps_channel(const ChannelId& c) const { return tapped_classical_channels.count(c) > 0; }
};

/// Groups attacks[] by attacker and validates every entry against the topology.
/// Throws ValidationError naming attack.* rules.
std::vector<AttackScript> build_scripts(const net::Scenario& scenario);

/// Quantum-plane effect of a tapping attack on one freshly generated pair.
struct Tamper {
    std::string attack_id;
    std::string attacker;
    state::PauliChannel channel;
    bool destroys = false;            // eavesdrop_quantum breaks the state it reads
    bool leaks = false;               // attacker ends up correlated with the pair
    bool skips_sampled = false;       // knows which pairs certification will sample
    bool evades_link_sampling = false;
};

/// Attack-hook surface seen by the engine. Hooks receive attacker-owned generator streams
/// only; the certification sampling stream is never an argument of any function here.
class AttackPlan {
public:
    AttackPlan() = default;
    explicit AttackPlan(std::vector<AttackScript> scripts);

    const std::vector<AttackScript>& scripts() const { return scripts_; }
    bool empty() const { return scripts_.empty(); }
    const AttackScript& script(const std::string& attacker) const;
    std::vector<const AttackAction*> actions() const;
    const AttackAction* find(const std::string& attack_id) const;

    /// Tampers applied to a pair generated on `link` at time t (link must be tapped).
    std::vector<Tamper> on_link_pair(const std::string& link, const std::string& node_a,
                                     const std::string& node_b, double t) const;

    /// Active actions of `kind` whose target node is `node` and which are controlled.
    const AttackAction* node_behavior(const std::string& node, AttackKind kind, double t) const;
    /// Active actions of `kind` touching classical channel (a, b).
    std::vector<const AttackAction*> on_channel(const std::string& a, const std::string& b, AttackKind kind,
                                                double t) const;
    /// Actions of the given kinds, regardless of time (for scheduling).
    std::vector<const AttackAction*> of_kind(AttackKind kind) const;

private:
    std::vector<AttackScript> scripts_;
};

/// Pauli channel used to model each tapping kind.
state::PauliChannel tamper_channel(const AttackAction& a);

}  // namespace qrsim::adversary
