#pragma once

#include "qrsim/adversary/attacks.hpp"
#include "qrsim/engine/bbm92.hpp"
#include "qrsim/engine/event_log.hpp"
#include "qrsim/monitor/certification.hpp"
#include "qrsim/monitor/cia.hpp"
#include "qrsim/monitor/reputation.hpp"
#include "qrsim/network/scenario.hpp"
#include "qrsim/state/pair_store.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace qrsim::engine {

enum class ConnState { SettingUp, Running, Aborted, Done };
std::string to_string(ConnState s);

struct ConnectionStats {
    std::string id;
    std::string src, dst;
    std::string application;
    bool injected = false;  // demand created by an attacker
    ConnState state = ConnState::SettingUp;
    std::string abort_cause;
    std::vector<std::string> path;
    int hops = 0;
    std::optional<double> running_at_s;
    std::optional<double> finished_at_s;

    long attempts = 0;  // physical link attempts scheduled for this connection
    long link_pairs = 0;
    long delivered = 0;
    long sacrificed = 0;
    long cross_delivered = 0;  // halves matched from different records
    long timeouts = 0;
    double throughput_hz = 0.0;
    double mean_fidelity = 0.0;  // over jointly delivered pairs
    long purify_rounds = 0;
    long purify_target_missed = 0;
    bool purify_disabled = false;  // target requested but no buffer qubits at a link end
    long teleports = 0;
    double mean_teleport_fidelity = 0.0;
    std::set<std::pair<std::string, std::string>> delivered_endpoints;
    std::optional<KeySession> key;
};

struct LinkStats {
    std::string id;
    long attempts = 0;
    long successes = 0;
};

struct AttackEffect {
    std::string attack_id;
    std::string attacker;
    std::string kind;
    std::string represents;
    long actions = 0;
    long leaked_pairs = 0;
    long destroyed_pairs = 0;
    long corrupted_frames = 0;
    long dropped_messages = 0;
    long forged_messages = 0;
    long isolated_nodes = 0;
    long aborted_connections = 0;
    long injected_connections = 0;
    std::optional<double> first_effect_s;
    std::optional<double> detection_latency_s;
};

struct CertEntry {
    monitor::CertReport report;
    std::string verdict;
    std::vector<std::string> attributed;
};

struct ReputationSnapshot {
    std::string policy;
    int k = 2;
    std::vector<std::string> isolated;
    std::map<std::string, int> accusation_counts;
    int accusations_received = 0;
    int accusations_rejected = 0;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<net::CertScope> cert_scope;
    bool keep_log = true;
};

struct RunResult {
    std::uint64_t seed = 0;
    double end_time_s = 0.0;
    EventLog log;
    monitor::CiaLedger ledger;
    std::vector<ConnectionStats> connections;
    std::vector<LinkStats> links;
    std::vector<CertEntry> certification;
    ReputationSnapshot reputation;
    std::vector<AttackEffect> attacks;
    std::set<std::string> removed_nodes;  // isolated, failed or destroyed at the end of the run
    std::size_t pairs_created = 0;
    std::map<state::Fate, std::size_t> fates;

    const ConnectionStats* connection(const std::string& id) const;
    /// Every created pair has exactly one fate.
    bool conserved() const;
};

/// Executes one run. Throws ConfigError before t=0 on contradictory configuration and
/// ProtocolError on an internal contradiction during the run.
RunResult run(const net::Scenario& scenario, const RunOptions& options = {});

/// Same scenario with every attack removed.
net::Scenario honest_baseline(const net::Scenario& scenario);

}  // namespace qrsim::engine
