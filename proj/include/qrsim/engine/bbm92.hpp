#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qrsim::engine {

/// What a man-in-the-middle learned by measuring the partner half of an endpoint's pair.
struct AttackerMeasurement {
    int basis = 0;  // 0 = Z, 1 = X
    int bit = 0;
};

/// One delivered pair as seen by the key application at both ends.
struct KeyRound {
    int a_basis = 0, a_bit = 0;
    int b_basis = 0, b_bit = 0;
    bool check = false;   // disclosed for error estimation (drawn from the secret stream)
    bool leaked = false;  // an attacker holds correlated information about this pair
    std::optional<AttackerMeasurement> attacker_a;  // partner of A's half, measured by an attacker
    std::optional<AttackerMeasurement> attacker_b;
};

enum class KeyStatus { Collecting, Completed, Aborted };
std::string to_string(KeyStatus s);

struct KeySession {
    KeyStatus status = KeyStatus::Collecting;
    std::string abort_reason;
    int key_length = 0;
    int rounds_used = 0;
    bool forged_sifting = false;  // sifting messages were answered by an attacker
    int sifted_a = 0, sifted_b = 0;
    int check_bits = 0;
    int check_errors = 0;
    double qber = 0.0;
    std::vector<std::uint8_t> key_a, key_b;            // emitted key material
    std::vector<std::uint8_t> attacker_key_a, attacker_key_b;  // attacker's copy, position by position
    long reconciled_bits = 0;  // honest-mode bits fixed by error correction
    long leaked_key_bits = 0;  // attacker-known bits, averaged over the two end keys
    double raw_ab_agreement = 0.0;  // A vs B raw bits over rounds where both bases coincide

    long emitted_bits() const { return static_cast<long>(key_a.size() + key_b.size()) / 2; }
    /// Fraction of the A (or B) key the attacker holds bit-exactly.
    double attacker_recovery_a() const;
    double attacker_recovery_b() const;
};

/// Collects rounds until `key_length` sifted bits exist in every view, then estimates the
/// QBER on the check bits and either emits the remaining bits or aborts. Honest sessions
/// emit error-corrected keys.
/// With forged sifting each end sifts against the attacker's announcements.
class KeySessionBuilder {
public:
    KeySessionBuilder(int key_length, double abort_threshold, bool forged_sifting)
        : key_length_(key_length), threshold_(abort_threshold), forged_(forged_sifting) {}

    void add(const KeyRound& r);
    bool complete() const;
    int rounds() const { return static_cast<int>(rounds_.size()); }
    KeySession finish() const;

private:
    int key_length_;
    double threshold_;
    bool forged_;
    int sifted_a_ = 0, sifted_b_ = 0;
    std::vector<KeyRound> rounds_;
};

}  // namespace qrsim::engine
