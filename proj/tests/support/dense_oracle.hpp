#pragma once

// Test-only brute-force linear algebra over n-qubit registers. Deliberately
// generic (index loops, no shortcuts) so that it stays independent of the
// specialised routines in the library.

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace qrsim::testing {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using cd = std::complex<double>;

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Vec bell(int phase, int flip) {
    Vec v = Vec::Zero(4);
    const double r = 1.0 / std::sqrt(2.0);
    v(flip) = r;                         // |0 flip>
    v(2 + (1 - flip)) = phase ? -r : r;  // |1 ~flip>
    return v;
}

inline Mat projector(const Vec& v) { return v * v.adjoint(); }

inline Mat identity(int qubits) { return Mat::Identity(1 << qubits, 1 << qubits); }

inline Mat pauli(char p) {
    Mat m(2, 2);
    switch (p) {
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, cd(0, -1), cd(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: m << 1, 0, 0, 1;
    }
    return m;
}

/// Operator acting on `target` qubit of an n-qubit register (qubit 0 most significant).
inline Mat on_qubit(const Mat& op, int target, int n) {
    Mat out = Mat::Identity(1, 1);
    for (int q = 0; q < n; ++q) out = kron(out, q == target ? op : Mat::Identity(2, 2));
    return out;
}

inline Mat cnot(int control, int target, int n) {
    const int dim = 1 << n;
    Mat out = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        int j = i;
        if ((i >> (n - 1 - control)) & 1) j ^= 1 << (n - 1 - target);
        out(j, i) = 1.0;
    }
    return out;
}

/// Partial trace keeping the listed qubits (in the given order).
inline Mat partial_trace_keep(const Mat& rho, const std::vector<int>& keep, int n) {
    const int k = static_cast<int>(keep.size());
    Mat out = Mat::Zero(1 << k, 1 << k);
    const int dim = 1 << n;
    auto kept_index = [&](int full) {
        int idx = 0;
        for (int q : keep) idx = (idx << 1) | ((full >> (n - 1 - q)) & 1);
        return idx;
    };
    auto traced_equal = [&](int a, int b) {
        for (int q = 0; q < n; ++q) {
            bool kept = false;
            for (int x : keep) kept |= (x == q);
            if (!kept && (((a >> (n - 1 - q)) & 1) != ((b >> (n - 1 - q)) & 1))) return false;
        }
        return true;
    };
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c)
            if (traced_equal(r, c)) out(kept_index(r), kept_index(c)) += rho(r, c);
    return out;
}

inline Mat werner(double f) {
    const double p = (4 * f - 1) / 3;
    return p * projector(bell(0, 0)) + (1 - p) * identity(2) / 4.0;
}

inline double fidelity_phi_plus(const Mat& rho) {
    const Vec v = bell(0, 0);
    return (v.adjoint() * rho * v)(0, 0).real();
}

}  // namespace qrsim::testing
