#pragma once

#include "qrsim/state/measurement.hpp"
#include "qrsim/state/two_qubit.hpp"

#include <string>
#include <string_view>

namespace qrsim::state {

/// rho -> pI rho + pX X rho X + pY Y rho Y + pZ Z rho Z on one qubit.
struct PauliChannel {
    double p_i = 1.0;
    double p_x = 0.0;
    double p_y = 0.0;
    double p_z = 0.0;

    TwoQubitState apply(const TwoQubitState& s, Side side) const;
    /// Sequential composition: `then` applied after *this.
    PauliChannel compose(const PauliChannel& then) const;
    bool is_identity() const { return p_i >= 1.0 - kAlgebraTol; }

    static PauliChannel depolarize(double q);
    static PauliChannel dephase(double q);
    /// Measure in `basis` (Z or X) and resend the observed eigenstate.
    static PauliChannel measure_resend(BasisLabel basis);
};

enum class ChannelKind { InterceptResendRandomBasis, EntanglingProbe, Depolarize, Dephase };

struct AttackChannel {
    ChannelKind kind;
    double strength = 1.0;  // q for depolarize/dephase, coupling for the probe
    Side side = Side::B;
};

/// Throws ConfigError for an unknown name.
ChannelKind channel_kind_from_string(std::string_view name);
std::string to_string(ChannelKind kind);

/// Pauli representation of each supported attack channel.
/// - intercept-resend: uniformly random Z/X basis, eigenstate resent
/// - entangling probe: ancilla coupled to Z with strength s; coherence scaled
///   by sqrt(1 - s)
/// - depolarize(q): rho -> (1-q) rho + q I/2 on the attacked half
/// - dephase(q): coherence scaled by (1 - q)
PauliChannel to_pauli(const AttackChannel& channel);

/// Exact post-attack density matrix. Throws DomainError on strength outside [0,1].
TwoQubitState apply_attack_channel(const TwoQubitState& s, const AttackChannel& channel);

}  // namespace qrsim::state
