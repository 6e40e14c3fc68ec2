#include "qrsim/state/two_qubit.hpp"

#include "qrsim/error.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qrsim::state {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

Vector4 bell_vector(BellIndex k) {
    Vector4 v = Vector4::Zero();
    switch (k) {
        case BellIndex::PhiPlus:
            v(0) = kInvSqrt2;
            v(3) = kInvSqrt2;
            break;
        case BellIndex::PsiPlus:
            v(1) = kInvSqrt2;
            v(2) = kInvSqrt2;
            break;
        case BellIndex::PhiMinus:
            v(0) = kInvSqrt2;
            v(3) = -kInvSqrt2;
            break;
        case BellIndex::PsiMinus:
            v(1) = kInvSqrt2;
            v(2) = -kInvSqrt2;
            break;
    }
    return v;
}

Matrix2 pauli_matrix(Pauli p) {
    Matrix2 m;
    switch (p) {
        case Pauli::I: m << 1, 0, 0, 1; break;
        case Pauli::X: m << 0, 1, 1, 0; break;
        case Pauli::Y: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case Pauli::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

Pauli bell_correction(BellIndex k) {
    switch (k) {
        case BellIndex::PhiPlus: return Pauli::I;
        case BellIndex::PsiPlus: return Pauli::X;
        case BellIndex::PhiMinus: return Pauli::Z;
        case BellIndex::PsiMinus: return Pauli::Y;
    }
    return Pauli::I;
}

Matrix4 kron(const Matrix2& a, const Matrix2& b) {
    Matrix4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

Matrix4 embed(Side side, const Matrix2& op) {
    return side == Side::A ? kron(op, Matrix2::Identity()) : kron(Matrix2::Identity(), op);
}

TwoQubitState::TwoQubitState() : rho_(Matrix4::Identity() / 4.0) {}

TwoQubitState::TwoQubitState(const Matrix4& rho) : rho_(rho) {
    if (!is_valid()) throw DomainError("matrix is not a valid two-qubit density operator");
}

TwoQubitState TwoQubitState::unchecked(const Matrix4& rho) {
    TwoQubitState s;
    s.rho_ = rho;
    return s;
}

TwoQubitState TwoQubitState::bell(BellIndex k) {
    const Vector4 v = bell_vector(k);
    return unchecked(v * v.adjoint());
}

TwoQubitState TwoQubitState::maximally_mixed() { return TwoQubitState(); }

TwoQubitState TwoQubitState::product(const Matrix2& a, const Matrix2& b) {
    return TwoQubitState(kron(a, b));
}

double TwoQubitState::bell_weight(BellIndex k) const {
    const Vector4 v = bell_vector(k);
    return (v.adjoint() * rho_ * v)(0, 0).real();
}

double TwoQubitState::fidelity() const { return bell_weight(BellIndex::PhiPlus); }

Matrix2 TwoQubitState::reduced(Side keep) const {
    Matrix2 out = Matrix2::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int t = 0; t < 2; ++t) {
                if (keep == Side::A)
                    out(i, j) += rho_(2 * i + t, 2 * j + t);
                else
                    out(i, j) += rho_(2 * t + i, 2 * t + j);
            }
    return out;
}

TwoQubitState TwoQubitState::apply_local(Side side, const Matrix2& u) const {
    const Matrix4 full = embed(side, u);
    return unchecked(full * rho_ * full.adjoint());
}

bool TwoQubitState::is_valid(double tol) const {
    if (std::abs(rho_.trace() - Complex(1.0, 0.0)) > tol) return false;
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    Eigen::SelfAdjointEigenSolver<Matrix4> solver(rho_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() >= -tol;
}

}  // namespace qrsim::state
