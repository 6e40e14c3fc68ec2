#include "qrsim/state/teleport.hpp"

#include "qrsim/error.hpp"

#include <array>

namespace qrsim::state {

namespace {

using Matrix8 = Eigen::Matrix<Complex, 8, 8>;

// Register (payload, near, far); near/far come from the channel with the
// sender on side A.
Matrix8 register_state(const TwoQubitState& channel, const Matrix2& payload) {
    Matrix8 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<4, 4>(4 * i, 4 * j) = payload(i, j) * channel.matrix();
    return out;
}

// Unnormalized far-half state conditioned on Bell outcome k of (payload, near).
Matrix2 branch(const Matrix8& rho, BellIndex k) {
    const Vector4 beta = bell_vector(k);
    Matrix2 m = Matrix2::Zero();
    for (int pr = 0; pr < 4; ++pr)
        for (int pc = 0; pc < 4; ++pc) {
            const Complex w = std::conj(beta(pr)) * beta(pc);
            if (w == Complex(0.0, 0.0)) continue;
            for (int fr = 0; fr < 2; ++fr)
                for (int fc = 0; fc < 2; ++fc) m(fr, fc) += w * rho(2 * pr + fr, 2 * pc + fc);
        }
    return m;
}

double state_fidelity(const Matrix2& rho, const Matrix2& sigma) {
    // Payloads are pure in practice; for pure sigma this is <psi|rho|psi>.
    return (rho * sigma).trace().real();
}

}  // namespace

Matrix2 unconditioned_far_state(const TwoQubitState& channel_sender_on_a, const Matrix2& payload) {
    const Matrix8 rho = register_state(channel_sender_on_a, payload);
    Matrix2 acc = Matrix2::Zero();
    for (BellIndex k : kAllBellIndices) acc += branch(rho, k);
    return acc;
}

TeleportResult teleport(PairStore& store, PairId channel, const std::string& sender,
                        const Matrix2& payload, const FarHolder& holder, bool bits_reach_holder,
                        Rng& rng) {
    if (!store.is_live(channel))
        throw ProtocolError("teleport: no channel pair " + std::to_string(channel));
    const PairRecord& rec = store.get(channel);
    const TwoQubitState s = oriented(rec, sender, Side::A);
    const Matrix8 rho = register_state(s, payload);

    std::array<Matrix2, 4> branches;
    std::array<double, 4> probs;
    for (int k = 0; k < 4; ++k) {
        branches[k] = branch(rho, kAllBellIndices[k]);
        probs[k] = branches[k].trace().real();
    }
    double u = uniform01(rng) * (probs[0] + probs[1] + probs[2] + probs[3]);
    int pick = 0;
    for (; pick < 3; ++pick) {
        if (u < probs[pick]) break;
        u -= probs[pick];
    }
    while (probs[pick] < kAlgebraTol && pick > 0) --pick;

    TeleportResult result{};
    result.outcome = kAllBellIndices[pick];
    if (bits_reach_holder) {
        const Matrix2 fix = pauli_matrix(bell_correction(result.outcome));
        result.holder_state = fix * (branches[pick] / probs[pick]) * fix.adjoint();
    } else {
        result.holder_state = branches[0] + branches[1] + branches[2] + branches[3];
    }
    result.payload_fidelity = state_fidelity(result.holder_state, payload);

    const bool legit = !holder.attacker.has_value();
    result.payload_delivered = legit && bits_reach_holder;
    result.confidentiality_breach = !legit && bits_reach_holder;
    result.integrity_loss = !result.payload_delivered;
    if (result.confidentiality_breach) store.get_mut(channel).tag_leak(*holder.attacker);
    store.consume(channel, Fate::Delivered);
    return result;
}

}  // namespace qrsim::state
