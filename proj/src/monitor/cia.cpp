#include "qrsim/monitor/cia.hpp"

#include <algorithm>

namespace qrsim::monitor {

std::optional<double> first_effect(const engine::EventLog& log, const std::string& attack_id,
                                   const net::Window& window) {
    for (const auto& r : log.rows())
        if (r.kind == engine::EventKind::AttackAction && r.attack == attack_id && window.contains(r.time_s))
            return r.time_s;
    return std::nullopt;
}

std::optional<double> detection_latency(const engine::EventLog& log, const std::string& attack_id,
                                        const net::Window& window) {
    const auto t0 = first_effect(log, attack_id, window);
    if (!t0) return std::nullopt;
    for (const auto& r : log.rows()) {
        if (r.kind != engine::EventKind::MonitorVerdict || r.verdict != "attack_suspected" || r.time_s < *t0)
            continue;
        if (std::find(r.attacks.begin(), r.attacks.end(), attack_id) != r.attacks.end()) return r.time_s - *t0;
    }
    return std::nullopt;
}

}  // namespace qrsim::monitor
