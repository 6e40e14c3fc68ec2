#include "qrsim/state/measurement.hpp"

#include "qrsim/error.hpp"

#include <cmath>
#include <numbers>

namespace qrsim::state {

MeasurementBasis MeasurementBasis::of(BasisLabel label) {
    constexpr double pi = std::numbers::pi;
    switch (label) {
        case BasisLabel::Z: return {0.0, label};
        case BasisLabel::X: return {pi / 2, label};
        case BasisLabel::CHSH_A0: return {0.0, label};
        case BasisLabel::CHSH_A1: return {pi / 2, label};
        case BasisLabel::CHSH_B0: return {pi / 4, label};
        case BasisLabel::CHSH_B1: return {-pi / 4, label};
    }
    throw ConfigError("unknown basis label");
}

std::string_view to_string(BasisLabel label) {
    switch (label) {
        case BasisLabel::Z: return "Z";
        case BasisLabel::X: return "X";
        case BasisLabel::CHSH_A0: return "CHSH_A0";
        case BasisLabel::CHSH_A1: return "CHSH_A1";
        case BasisLabel::CHSH_B0: return "CHSH_B0";
        case BasisLabel::CHSH_B1: return "CHSH_B1";
    }
    return "?";
}

Eigen::Vector2cd basis_vector(const MeasurementBasis& basis, int bit) {
    const double c = std::cos(basis.angle / 2);
    const double s = std::sin(basis.angle / 2);
    Eigen::Vector2cd v;
    if (bit == 0)
        v << c, s;
    else
        v << -s, c;
    return v;
}

JointDistribution joint_distribution(const TwoQubitState& s, const MeasurementBasis& a,
                                     const MeasurementBasis& b) {
    JointDistribution p{};
    for (int i = 0; i < 2; ++i) {
        const Eigen::Vector2cd va = basis_vector(a, i);
        for (int j = 0; j < 2; ++j) {
            const Eigen::Vector2cd vb = basis_vector(b, j);
            Vector4 v;
            v << va(0) * vb(0), va(0) * vb(1), va(1) * vb(0), va(1) * vb(1);
            p[i][j] = std::max(0.0, (v.adjoint() * s.matrix() * v)(0, 0).real());
        }
    }
    return p;
}

double correlator(const TwoQubitState& s, const MeasurementBasis& a, const MeasurementBasis& b) {
    const auto p = joint_distribution(s, a, b);
    return p[0][0] + p[1][1] - p[0][1] - p[1][0];
}

std::pair<int, int> measure_pair(const TwoQubitState& s, const MeasurementBasis& a,
                                 const MeasurementBasis& b, Rng& rng) {
    const auto p = joint_distribution(s, a, b);
    const double total = p[0][0] + p[0][1] + p[1][0] + p[1][1];
    double u = uniform01(rng) * total;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            if (u < p[i][j]) return {i, j};
            u -= p[i][j];
        }
    return {1, 1};
}

HalfMeasurement measure_half(const TwoQubitState& s, Side side, const MeasurementBasis& basis,
                             Rng& rng) {
    const Matrix2 rho = s.reduced(side);
    const Eigen::Vector2cd v0 = basis_vector(basis, 0);
    const double p0 = std::clamp((v0.adjoint() * rho * v0)(0, 0).real(), 0.0, 1.0);
    const int bit = bernoulli(rng, p0) ? 0 : 1;
    const Eigen::Vector2cd v = basis_vector(basis, bit);
    const Matrix2 proj = v * v.adjoint();
    const Matrix4 full = embed(side, proj);
    Matrix4 post = full * s.matrix() * full;
    const double p = post.trace().real();
    if (p < kAlgebraTol) throw ImpossibleBranch(p);
    return {bit, TwoQubitState::unchecked(post / p)};
}

double chsh_expectation(const TwoQubitState& s) {
    const auto a0 = MeasurementBasis::of(BasisLabel::CHSH_A0);
    const auto a1 = MeasurementBasis::of(BasisLabel::CHSH_A1);
    const auto b0 = MeasurementBasis::of(BasisLabel::CHSH_B0);
    const auto b1 = MeasurementBasis::of(BasisLabel::CHSH_B1);
    return correlator(s, a0, b0) + correlator(s, a0, b1) + correlator(s, a1, b0) -
           correlator(s, a1, b1);
}

}  // namespace qrsim::state
