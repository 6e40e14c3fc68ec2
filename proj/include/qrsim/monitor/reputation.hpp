#pragma once

#include "qrsim/monitor/certification.hpp"
#include "qrsim/network/scenario.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace qrsim::monitor {

/// A claim that `accused` misbehaved. `claimed_source` is who the message says sent it;
/// `sender` is who actually did. Receivers only see the former unless the channel is
/// authenticated.
struct Accusation {
    std::string claimed_source;
    std::string sender;
    std::string accused;
    bool authenticated = false;
    double time_s = 0.0;
};

class ReputationLedger {
public:
    ReputationLedger(net::ReputationPolicy policy, int k) : policy_(policy), k_(k) {}

    /// Records an accusation carrying `verdict`; returns nodes newly isolated by it.
    std::vector<std::string> update(const Accusation& a, Verdict verdict);

    /// End-to-end certification flagged a connection through `node`; under the hardened
    /// policy pending accusations against it may now count.
    std::vector<std::string> corroborate(const std::string& node);

    net::ReputationPolicy policy() const { return policy_; }
    int k() const { return k_; }
    const std::set<std::string>& isolated() const { return isolated_; }
    bool is_isolated(const std::string& node) const { return isolated_.count(node) > 0; }
    /// Distinct accusers currently counted against each node.
    std::map<std::string, int> accusation_counts() const;
    int accusations_received() const { return received_; }
    int accusations_rejected() const { return rejected_; }

private:
    bool counts(const Accusation& a) const;
    std::vector<std::string> reevaluate(const std::string& node);

    net::ReputationPolicy policy_;
    int k_;
    int received_ = 0;
    int rejected_ = 0;
    std::map<std::string, std::vector<Accusation>> accusations_;
    std::set<std::string> corroborated_;
    std::set<std::string> isolated_;
};

}  // namespace qrsim::monitor
