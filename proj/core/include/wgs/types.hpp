#pragma once

#include <complex>
#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace wgs {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

namespace pauli {
inline Mat2 identity() { return Mat2::Identity(); }
inline Mat2 x() {
    Mat2 m;
    m << 0, 1, 1, 0;
    return m;
}
inline Mat2 y() {
    Mat2 m;
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}
inline Mat2 z() {
    Mat2 m;
    m << 1, 0, 0, -1;
    return m;
}
}  // namespace pauli

/// Kronecker product of two dense complex matrices; `a` acts on the more
/// significant index.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Largest absolute entry of A - A^dagger.
inline double hermiticity_defect(const CMatrix& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Wrap an angle to (-pi, pi].
inline double wrap_phase(double phi) {
    double w = std::remainder(phi, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

}  // namespace wgs
