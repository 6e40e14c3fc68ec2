#pragma once

#include "qrsim/rng.hpp"
#include "qrsim/state/two_qubit.hpp"

#include <array>
#include <string_view>
#include <utility>

namespace qrsim::state {

enum class BasisLabel { Z, X, CHSH_A0, CHSH_A1, CHSH_B0, CHSH_B1 };

/// Projective measurement of cos(angle) Z + sin(angle) X. Outcome bit 0 is
/// the +1 eigenvalue.
struct MeasurementBasis {
    double angle;
    BasisLabel label;

    static MeasurementBasis of(BasisLabel label);
    static MeasurementBasis z() { return of(BasisLabel::Z); }
    static MeasurementBasis x() { return of(BasisLabel::X); }
};

std::string_view to_string(BasisLabel label);

/// P(i, j) for outcome i on side A and j on side B.
using JointDistribution = std::array<std::array<double, 2>, 2>;

JointDistribution joint_distribution(const TwoQubitState& s, const MeasurementBasis& a,
                                     const MeasurementBasis& b);

/// <O_a (x) O_b>
double correlator(const TwoQubitState& s, const MeasurementBasis& a, const MeasurementBasis& b);

/// Samples both outcomes from the exact joint distribution.
std::pair<int, int> measure_pair(const TwoQubitState& s, const MeasurementBasis& a,
                                 const MeasurementBasis& b, Rng& rng);

struct HalfMeasurement {
    int bit;
    /// Post-measurement state: the measured side is the projected eigenstate,
    /// the other side holds its conditional state.
    TwoQubitState collapsed;
};

HalfMeasurement measure_half(const TwoQubitState& s, Side side, const MeasurementBasis& basis,
                             Rng& rng);

/// S = E(A0,B0) + E(A0,B1) + E(A1,B0) - E(A1,B1) at the fixed optimal angles.
double chsh_expectation(const TwoQubitState& s);

/// Eigenvector of the basis observable for outcome bit.
Eigen::Vector2cd basis_vector(const MeasurementBasis& basis, int bit);

}  // namespace qrsim::state
