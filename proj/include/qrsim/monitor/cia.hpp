#pragma once

#include "qrsim/engine/event_log.hpp"
#include "qrsim/network/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qrsim::monitor {

struct DetectionEntry {
    std::string attack_id;
    std::string kind;
    std::optional<double> first_effect_s;
    std::optional<double> latency_s;  // empty: not detected
};

/// Per-run impact counters along the three security axes.
struct CiaLedger {
    // Confidentiality
    long confidentiality_leaked_pairs = 0;
    long leaked_key_bits = 0;
    long leaked_teleports = 0;
    // Integrity
    long integrity_bad_delivered = 0;  // below the fidelity floor and not flagged
    long corrupted_key_bits = 0;
    long corrupted_frames_applied = 0;
    // Availability
    long delivered_pairs = 0;
    long sacrificed_pairs = 0;
    long destroyed_by_attack = 0;
    long aborted_connections = 0;
    double delivered_rate_hz = 0.0;
    std::optional<double> baseline_delivered_rate_hz;
    double disconnected_pairs_fraction = 0.0;
    std::vector<DetectionEntry> detection;

    bool all_clear() const {
        return confidentiality_leaked_pairs == 0 && leaked_key_bits == 0 && leaked_teleports == 0 &&
               integrity_bad_delivered == 0 && corrupted_key_bits == 0 && corrupted_frames_applied == 0 &&
               destroyed_by_attack == 0 && aborted_connections == 0 && disconnected_pairs_fraction == 0.0;
    }
};

/// Time from the first logged effect of `attack_id` inside `window` to the first
/// attack_suspected verdict attributed to it; empty when never detected.
std::optional<double> detection_latency(const engine::EventLog& log, const std::string& attack_id,
                                        const net::Window& window);

/// First logged effect time of an attack, if any.
std::optional<double> first_effect(const engine::EventLog& log, const std::string& attack_id,
                                   const net::Window& window);

}  // namespace qrsim::monitor
