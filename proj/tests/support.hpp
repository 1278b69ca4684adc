#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "weakmeter/fock.hpp"
#include "weakmeter/weak.hpp"

namespace weakmeter::testing {

inline Operator sigma_x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return Operator(m);
}

inline Operator sigma_z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return Operator(m);
}

inline Ket qubit(Complex c0, Complex c1) {
    Vector v(2);
    v << c0, c1;
    return Ket(v / v.norm(), Basis::system);
}

// sigma_x with alpha = |0>, beta = cos(theta)|0> + sin(theta)|1>; O_w = tan(theta).
inline SystemSpec rotated_selection(double theta) {
    return {sigma_x(), qubit(1.0, 0.0), qubit(std::cos(theta), std::sin(theta))};
}

// sigma_x with alpha = |0>, beta ∝ |0> + conj(ow)|1>; O_w = ow.
inline SystemSpec targeted_selection(Complex ow) {
    return {sigma_x(), qubit(1.0, 0.0), qubit(1.0, std::conj(ow))};
}

inline Ket random_ket(std::size_t dim, std::size_t support, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < support; ++k) {
        v(static_cast<Eigen::Index>(k)) = Complex(g(rng), g(rng));
    }
    return Ket(v / v.norm(), Basis::fock);
}

inline Operator random_hermitian(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = Complex(g(rng), g(rng));
        }
    }
    return Operator(Matrix((m + m.adjoint()) / 2.0));
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace weakmeter::testing
