#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace qrsim::state {

using Complex = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector4 = Eigen::Vector4cd;

inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kMatrixTol = 1e-9;

/// Side of a bipartite pair. Side A is the most significant qubit of the
/// 4-dimensional basis |a b>.
enum class Side { A = 0, B = 1 };

inline Side other(Side s) { return s == Side::A ? Side::B : Side::A; }

/// Bell basis, indexed by (phase bit, flip bit):
/// PhiPlus=(0,0), PsiPlus=(0,1), PhiMinus=(1,0), PsiMinus=(1,1).
enum class BellIndex { PhiPlus = 0, PsiPlus = 1, PhiMinus = 2, PsiMinus = 3 };

inline constexpr std::array<BellIndex, 4> kAllBellIndices{BellIndex::PhiPlus, BellIndex::PsiPlus,
                                                          BellIndex::PhiMinus, BellIndex::PsiMinus};

Vector4 bell_vector(BellIndex k);

enum class Pauli { I, X, Y, Z };

Matrix2 pauli_matrix(Pauli p);

/// Pauli that maps the Bell state `k` back to Phi+ when applied to side B.
Pauli bell_correction(BellIndex k);

/// Density operator of a two-qubit system.
class TwoQubitState {
public:
    /// Maximally mixed I/4.
    TwoQubitState();
    /// Takes ownership of a density matrix; throws DomainError if it is not a
    /// valid density operator within kMatrixTol.
    explicit TwoQubitState(const Matrix4& rho);

    static TwoQubitState bell(BellIndex k = BellIndex::PhiPlus);
    static TwoQubitState maximally_mixed();
    static TwoQubitState product(const Matrix2& a, const Matrix2& b);
    /// Constructs without validation. Callers guarantee validity.
    static TwoQubitState unchecked(const Matrix4& rho);

    const Matrix4& matrix() const { return rho_; }

    /// <Phi+|rho|Phi+>
    double fidelity() const;
    double bell_weight(BellIndex k) const;

    Matrix2 reduced(Side keep) const;

    /// Applies a single-qubit unitary to one side.
    TwoQubitState apply_local(Side side, const Matrix2& u) const;

    /// Trace, hermiticity and positivity within kMatrixTol.
    bool is_valid(double tol = kMatrixTol) const;

private:
    Matrix4 rho_;
};

/// Kronecker product of two single-qubit operators (a acts on side A).
Matrix4 kron(const Matrix2& a, const Matrix2& b);

/// Embeds a single-qubit operator on the given side.
Matrix4 embed(Side side, const Matrix2& op);

}  // namespace qrsim::state
