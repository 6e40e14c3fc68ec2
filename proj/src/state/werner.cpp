#include "qrsim/state/werner.hpp"

#include "qrsim/error.hpp"

#include <algorithm>
#include <string>

namespace qrsim::state {

void check_fidelity(double f) {
    if (!(f >= kMinFidelity - kAlgebraTol && f <= 1.0 + kAlgebraTol))
        throw DomainError("fidelity " + std::to_string(f) + " outside [0.25, 1]");
}

double werner_weight(double fidelity) { return (4.0 * fidelity - 1.0) / 3.0; }

double fidelity_from_weight(double p) { return (1.0 + 3.0 * p) / 4.0; }

TwoQubitState make_werner(double fidelity) {
    check_fidelity(fidelity);
    const double p = std::clamp(werner_weight(fidelity), 0.0, 1.0);
    const Vector4 phi = bell_vector(BellIndex::PhiPlus);
    Matrix4 rho = p * (phi * phi.adjoint()) + (1.0 - p) * Matrix4::Identity() / 4.0;
    return TwoQubitState::unchecked(rho);
}

double swap_werner(double f1, double f2) {
    check_fidelity(f1);
    check_fidelity(f2);
    return f1 * f2 + (1.0 - f1) * (1.0 - f2) / 3.0;
}

PurifyOdds purify_odds(double f1, double f2) {
    check_fidelity(f1);
    check_fidelity(f2);
    const double e1 = (1.0 - f1) / 3.0;
    const double e2 = (1.0 - f2) / 3.0;
    // Coincidence when both flip bits agree; the kept pair is Phi+ when both
    // inputs carry the same phase bit with no flip.
    const double p_success = (f1 + e1) * (f2 + e2) + 4.0 * e1 * e2;
    const double good = f1 * f2 + e1 * e2;
    return {p_success, good / p_success};
}

PurifyOutcome purify(double f1, double f2, Rng& rng) {
    const auto odds = purify_odds(f1, f2);
    if (bernoulli(rng, odds.p_success)) return {true, odds.f_out};
    return {false, 0.0};
}

double decay_fidelity(double fidelity, double elapsed_s, double tau_s) {
    if (tau_s <= 0.0 || elapsed_s <= 0.0) return fidelity;
    return kMinFidelity + (fidelity - kMinFidelity) * std::exp(-elapsed_s / tau_s);
}

}  // namespace qrsim::state
