#include "qrsim/monitor/reputation.hpp"

namespace qrsim::monitor {

bool ReputationLedger::counts(const Accusation& a) const {
    if (a.claimed_source == a.accused) return false;
    if (policy_ == net::ReputationPolicy::Naive) return true;
    return a.authenticated && a.claimed_source == a.sender && corroborated_.count(a.accused) > 0;
}

std::vector<std::string> ReputationLedger::reevaluate(const std::string& node) {
    if (isolated_.count(node)) return {};
    std::set<std::string> accusers;
    for (const auto& a : accusations_[node])
        if (counts(a)) accusers.insert(a.claimed_source);
    if (static_cast<int>(accusers.size()) < k_) return {};
    isolated_.insert(node);
    return {node};
}

std::vector<std::string> ReputationLedger::update(const Accusation& a, Verdict verdict) {
    ++received_;
    if (verdict != Verdict::AttackSuspected) return {};
    if (policy_ == net::ReputationPolicy::Hardened && (!a.authenticated || a.claimed_source != a.sender))
        ++rejected_;
    accusations_[a.accused].push_back(a);
    return reevaluate(a.accused);
}

std::vector<std::string> ReputationLedger::corroborate(const std::string& node) {
    if (!corroborated_.insert(node).second) return {};
    return reevaluate(node);
}

std::map<std::string, int> ReputationLedger::accusation_counts() const {
    std::map<std::string, int> out;
    for (const auto& [node, list] : accusations_) {
        std::set<std::string> accusers;
        for (const auto& a : list)
            if (counts(a)) accusers.insert(a.claimed_source);
        out[node] = static_cast<int>(accusers.size());
    }
    return out;
}

}  // namespace qrsim::monitor
