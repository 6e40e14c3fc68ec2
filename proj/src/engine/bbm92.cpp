#include "qrsim/engine/bbm92.hpp"

namespace qrsim::engine {

std::string to_string(KeyStatus s) {
    switch (s) {
        case KeyStatus::Collecting: return "collecting";
        case KeyStatus::Completed: return "completed";
        case KeyStatus::Aborted: return "aborted";
    }
    return "?";
}

namespace {

double agreement(const std::vector<std::uint8_t>& key, const std::vector<std::uint8_t>& copy) {
    if (key.empty()) return 0.0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < key.size() && i < copy.size(); ++i) same += key[i] == copy[i];
    return static_cast<double>(same) / key.size();
}

bool sifted_a(const KeyRound& r, bool forged) {
    return forged ? (r.attacker_a && r.attacker_a->basis == r.a_basis) : r.a_basis == r.b_basis;
}

bool sifted_b(const KeyRound& r, bool forged) {
    return forged ? (r.attacker_b && r.attacker_b->basis == r.b_basis) : r.a_basis == r.b_basis;
}

}  // namespace

double KeySession::attacker_recovery_a() const { return agreement(key_a, attacker_key_a); }
double KeySession::attacker_recovery_b() const { return agreement(key_b, attacker_key_b); }

void KeySessionBuilder::add(const KeyRound& r) {
    if (complete()) return;
    if (sifted_a(r, forged_) && sifted_a_ < key_length_) ++sifted_a_;
    if (sifted_b(r, forged_) && sifted_b_ < key_length_) ++sifted_b_;
    rounds_.push_back(r);
}

bool KeySessionBuilder::complete() const { return sifted_a_ >= key_length_ && sifted_b_ >= key_length_; }

KeySession KeySessionBuilder::finish() const {
    KeySession s;
    s.key_length = key_length_;
    s.forged_sifting = forged_;
    s.rounds_used = static_cast<int>(rounds_.size());

    int raw_same = 0, raw_n = 0;
    for (const auto& r : rounds_) {
        if (r.a_basis != r.b_basis) continue;
        ++raw_n;
        raw_same += r.a_bit == r.b_bit;
    }
    s.raw_ab_agreement = raw_n ? static_cast<double>(raw_same) / raw_n : 0.0;

    // Each end keeps at most key_length sifted positions.
    for (const auto& r : rounds_) {
        if (sifted_a(r, forged_) && s.sifted_a < key_length_) {
            ++s.sifted_a;
            const int partner = forged_ ? r.attacker_a->bit : r.b_bit;
            if (r.check) {
                ++s.check_bits;
                s.check_errors += r.a_bit != partner;
            } else {
                s.key_a.push_back(static_cast<std::uint8_t>(r.a_bit));
                if (forged_) s.attacker_key_a.push_back(static_cast<std::uint8_t>(r.attacker_a->bit));
                if (!forged_) s.key_b.push_back(static_cast<std::uint8_t>(r.b_bit));
                if (!forged_ && r.leaked) ++s.leaked_key_bits;
            }
        }
        if (forged_ && sifted_b(r, forged_) && s.sifted_b < key_length_) {
            ++s.sifted_b;
            if (r.check) {
                ++s.check_bits;
                s.check_errors += r.b_bit != r.attacker_b->bit;
            } else {
                s.key_b.push_back(static_cast<std::uint8_t>(r.b_bit));
                s.attacker_key_b.push_back(static_cast<std::uint8_t>(r.attacker_b->bit));
            }
        }
    }
    if (!forged_) s.sifted_b = s.sifted_a;
    s.qber = s.check_bits ? static_cast<double>(s.check_errors) / s.check_bits : 0.0;

    if (!complete()) {
        s.status = KeyStatus::Collecting;
    } else if (s.qber > threshold_) {
        s.status = KeyStatus::Aborted;
        s.abort_reason = "qber_above_threshold";
    } else {
        s.status = KeyStatus::Completed;
    }
    if (s.status != KeyStatus::Completed) {
        s.key_a.clear();
        s.key_b.clear();
        s.attacker_key_a.clear();
        s.attacker_key_b.clear();
        s.leaked_key_bits = 0;
    } else if (!forged_) {
        // Error correction leaves B holding A's key.
        for (std::size_t i = 0; i < s.key_a.size(); ++i) s.reconciled_bits += s.key_a[i] != s.key_b[i];
        s.key_b = s.key_a;
    } else {
        long known = 0;
        for (std::size_t i = 0; i < s.key_a.size(); ++i) known += s.key_a[i] == s.attacker_key_a[i];
        for (std::size_t i = 0; i < s.key_b.size(); ++i) known += s.key_b[i] == s.attacker_key_b[i];
        s.leaked_key_bits = known / 2;
    }
    return s;
}

}  // namespace qrsim::engine
