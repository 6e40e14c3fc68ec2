#include "qrsim/state/channels.hpp"

#include "qrsim/error.hpp"

#include <cmath>

namespace qrsim::state {

TwoQubitState PauliChannel::apply(const TwoQubitState& s, Side side) const {
    const Matrix4& rho = s.matrix();
    Matrix4 out = p_i * rho;
    const std::pair<double, Pauli> terms[] = {{p_x, Pauli::X}, {p_y, Pauli::Y}, {p_z, Pauli::Z}};
    for (const auto& [p, pauli] : terms) {
        if (p == 0.0) continue;
        const Matrix4 u = embed(side, pauli_matrix(pauli));
        out += p * (u * rho * u.adjoint());
    }
    return TwoQubitState::unchecked(out);
}

PauliChannel PauliChannel::compose(const PauliChannel& then) const {
    // Pauli group product up to phase: index by (x bit, z bit).
    const double a[4] = {p_i, p_x, p_z, p_y};
    const double b[4] = {then.p_i, then.p_x, then.p_z, then.p_y};
    double c[4] = {0, 0, 0, 0};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) c[i ^ j] += a[i] * b[j];
    return {c[0], c[1], c[3], c[2]};
}

PauliChannel PauliChannel::depolarize(double q) {
    return {1.0 - 0.75 * q, q / 4, q / 4, q / 4};
}

PauliChannel PauliChannel::dephase(double q) { return {1.0 - q / 2, 0.0, 0.0, q / 2}; }

PauliChannel PauliChannel::measure_resend(BasisLabel basis) {
    if (basis == BasisLabel::Z) return {0.5, 0.0, 0.0, 0.5};
    if (basis == BasisLabel::X) return {0.5, 0.5, 0.0, 0.0};
    throw ConfigError("intercept-resend supports only Z or X bases");
}

ChannelKind channel_kind_from_string(std::string_view name) {
    if (name == "intercept_resend_random_basis" || name == "intercept_resend")
        return ChannelKind::InterceptResendRandomBasis;
    if (name == "entangling_probe") return ChannelKind::EntanglingProbe;
    if (name == "depolarize") return ChannelKind::Depolarize;
    if (name == "dephase") return ChannelKind::Dephase;
    throw ConfigError("unknown attack channel '" + std::string(name) + "'");
}

std::string to_string(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::InterceptResendRandomBasis: return "intercept_resend_random_basis";
        case ChannelKind::EntanglingProbe: return "entangling_probe";
        case ChannelKind::Depolarize: return "depolarize";
        case ChannelKind::Dephase: return "dephase";
    }
    return "?";
}

PauliChannel to_pauli(const AttackChannel& channel) {
    const double s = channel.strength;
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("channel strength outside [0, 1]");
    switch (channel.kind) {
        case ChannelKind::InterceptResendRandomBasis: return {0.5, 0.25, 0.0, 0.25};
        case ChannelKind::EntanglingProbe: return PauliChannel::dephase(1.0 - std::sqrt(1.0 - s));
        case ChannelKind::Depolarize: return PauliChannel::depolarize(s);
        case ChannelKind::Dephase: return PauliChannel::dephase(s);
    }
    throw ConfigError("unknown attack channel");
}

TwoQubitState apply_attack_channel(const TwoQubitState& s, const AttackChannel& channel) {
    return to_pauli(channel).apply(s, channel.side);
}

}  // namespace qrsim::state
