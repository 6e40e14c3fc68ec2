#pragma once

// Exact density-matrix computations over the transient four-qubit register.
// These back the Werner fast path and are used whenever a pair has been
// touched by an attacker.

#include "qrsim/state/two_qubit.hpp"

namespace qrsim::state {

struct Conditional {
    double probability;
    TwoQubitState state;
};

/// Bell-state measurement on the inner qubits of s1 (a,b1) and s2 (b2,c).
/// Returns the renormalized state of (a,c) after the Pauli correction on c,
/// and the probability of `outcome`. Throws ImpossibleBranch below 1e-12.
Conditional oracle_swap(const TwoQubitState& s1, const TwoQubitState& s2, BellIndex outcome);

/// Outcome-averaged swap output (each branch corrected).
TwoQubitState oracle_swap_average(const TwoQubitState& s1, const TwoQubitState& s2);

struct PurifyResult {
    double p_success;
    TwoQubitState post_state;
};

/// Bilateral CNOT from s1 (source) onto s2 (target), Z-measure the target
/// pair and keep the source when the outcomes coincide.
PurifyResult oracle_purify(const TwoQubitState& s1, const TwoQubitState& s2);

}  // namespace qrsim::state
