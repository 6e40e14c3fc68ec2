#pragma once

#include "qrsim/rng.hpp"
#include "qrsim/state/pair_store.hpp"

#include <optional>
#include <string>

namespace qrsim::state {

/// Whoever physically holds the far half of the channel pair.
struct FarHolder {
    std::string node;
    std::optional<std::string> attacker;  // set when the holder is an attacker
};

struct TeleportResult {
    BellIndex outcome;
    /// Single-qubit state left with the far-half holder.
    Matrix2 holder_state;
    /// Fidelity of holder_state with the payload.
    double payload_fidelity;
    bool payload_delivered = false;        // legitimate receiver got the payload
    bool confidentiality_breach = false;   // attacker completed the protocol
    bool integrity_loss = false;           // payload destroyed without delivery
};

/// Sender Bell-measures (payload, near half) and sends the two correction
/// bits. The far-half holder recovers the payload only if the bits reach it;
/// otherwise it is left with the outcome-averaged (unconditioned) state and
/// the payload is gone. Consumes the channel pair; a stolen-and-completed
/// transfer tags the record with the attacker.
TeleportResult teleport(PairStore& store, PairId channel, const std::string& sender,
                        const Matrix2& payload, const FarHolder& holder, bool bits_reach_holder,
                        Rng& rng);

/// Far-half state with no knowledge of the Bell outcome, computed by summing
/// all four unnormalized branches of the three-qubit register.
Matrix2 unconditioned_far_state(const TwoQubitState& channel_sender_on_a, const Matrix2& payload);

}  // namespace qrsim::state
