#include "qrsim/state/oracle.hpp"

#include "qrsim/error.hpp"

namespace qrsim::state {

namespace {

using Matrix16 = Eigen::Matrix<Complex, 16, 16>;

Matrix16 kron4(const Matrix4& a, const Matrix4& b) {
    Matrix16 out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
    return out;
}

// Register bits, most significant first.
int bit(int index, int position) { return (index >> (3 - position)) & 1; }

}  // namespace

Conditional oracle_swap(const TwoQubitState& s1, const TwoQubitState& s2, BellIndex outcome) {
    // Register order (a, b1, b2, c) is exactly kron(s1, s2).
    const Matrix16 rho = kron4(s1.matrix(), s2.matrix());
    const Vector4 beta = bell_vector(outcome);

    Matrix4 m = Matrix4::Zero();
    for (int r = 0; r < 16; ++r) {
        const int inner_r = 2 * bit(r, 1) + bit(r, 2);
        const Complex wr = std::conj(beta(inner_r));
        if (wr == Complex(0.0, 0.0)) continue;
        const int outer_r = 2 * bit(r, 0) + bit(r, 3);
        for (int c = 0; c < 16; ++c) {
            const int inner_c = 2 * bit(c, 1) + bit(c, 2);
            const Complex wc = beta(inner_c);
            if (wc == Complex(0.0, 0.0)) continue;
            const int outer_c = 2 * bit(c, 0) + bit(c, 3);
            m(outer_r, outer_c) += wr * rho(r, c) * wc;
        }
    }
    const double p = m.trace().real();
    if (p < kAlgebraTol) throw ImpossibleBranch(p);
    const Matrix4 fix = embed(Side::B, pauli_matrix(bell_correction(outcome)));
    const Matrix4 out = fix * (m / p) * fix.adjoint();
    return {p, TwoQubitState::unchecked(out)};
}

TwoQubitState oracle_swap_average(const TwoQubitState& s1, const TwoQubitState& s2) {
    Matrix4 acc = Matrix4::Zero();
    for (BellIndex k : kAllBellIndices) {
        try {
            const auto branch = oracle_swap(s1, s2, k);
            acc += branch.probability * branch.state.matrix();
        } catch (const ImpossibleBranch&) {
        }
    }
    return TwoQubitState::unchecked(acc);
}

PurifyResult oracle_purify(const TwoQubitState& s1, const TwoQubitState& s2) {
    // Register order (a1, b1, a2, b2) is kron(s1, s2).
    const Matrix16 rho = kron4(s1.matrix(), s2.matrix());
    auto cnots = [](int i) {
        int a1 = bit(i, 0), b1 = bit(i, 1), a2 = bit(i, 2), b2 = bit(i, 3);
        a2 ^= a1;
        b2 ^= b1;
        return (a1 << 3) | (b1 << 2) | (a2 << 1) | b2;
    };
    Matrix16 after;
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) after(cnots(r), cnots(c)) = rho(r, c);

    Matrix4 kept = Matrix4::Zero();
    for (int m = 0; m < 2; ++m) {
        const int target = (m << 1) | m;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) kept(r, c) += after(4 * r + target, 4 * c + target);
    }
    const double p = kept.trace().real();
    if (p < kAlgebraTol) throw ImpossibleBranch(p);
    return {p, TwoQubitState::unchecked(kept / p)};
}

}  // namespace qrsim::state
