#pragma once

#include "qrsim/rng.hpp"
#include "qrsim/state/two_qubit.hpp"

#include <cmath>

namespace qrsim::state {

inline constexpr double kMinFidelity = 0.25;

/// Smallest Werner fidelity whose CHSH value at the optimal angles exceeds
/// the local bound 2: (3/sqrt(2) + 1) / 4.
inline const double kChshViolationFidelity = (3.0 / std::sqrt(2.0) + 1.0) / 4.0;

/// Throws DomainError unless 0.25 <= f <= 1.
void check_fidelity(double f);

/// Werner weight p = (4F - 1) / 3.
double werner_weight(double fidelity);
double fidelity_from_weight(double p);

/// rho(F) = p |Phi+><Phi+| + (1 - p) I/4.
TwoQubitState make_werner(double fidelity);

/// Fidelity after an ideal Bell-state measurement on two Werner pairs.
double swap_werner(double f1, double f2);

struct PurifyOdds {
    double p_success;
    double f_out;
};

/// Single-selection recurrence (bilateral CNOT, keep on coincidence) on two
/// Werner pairs. Deterministic part of purify().
PurifyOdds purify_odds(double f1, double f2);

struct PurifyOutcome {
    bool success;
    double f_out;  // meaningful only when success
};

PurifyOutcome purify(double f1, double f2, Rng& rng);

/// Fidelity relaxes toward 0.25 with time constant tau (seconds).
double decay_fidelity(double fidelity, double elapsed_s, double tau_s);

}  // namespace qrsim::state
