#include "weakmeter/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "weakmeter/errors.hpp"

namespace weakmeter {

namespace {

Symmetry classify(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("operator matrix must be square");
    }
    const Matrix adj = m.adjoint();
    if ((m - adj).cwiseAbs().maxCoeff() < kHermitianTol) {
        return Symmetry::hermitian;
    }
    if ((m + adj).cwiseAbs().maxCoeff() < kHermitianTol) {
        return Symmetry::anti_hermitian;
    }
    return Symmetry::general;
}

void require_same_dim(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("operator dimensions differ: " + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()));
    }
}

void require_same_dim(const Operator& m, const Ket& psi) {
    if (m.dim() != psi.dim()) {
        throw DimensionMismatch("operator is " + std::to_string(m.dim()) + "x" +
                                std::to_string(m.dim()) + " but ket has " +
                                std::to_string(psi.dim()) + " amplitudes");
    }
}

}  // namespace

void FockConfig::validate() const {
    if (dimension < 2) {
        throw std::invalid_argument("Fock dimension must be at least 2");
    }
    if (interior_buffer >= dimension) {
        throw std::invalid_argument("interior buffer must be smaller than the dimension");
    }
    if (!(truncation_tol > 0.0)) {
        throw std::invalid_argument("truncation tolerance must be positive");
    }
}

FockConfig FockConfig::automatic(double z_magnitude, double truncation_tol) {
    const double r = std::abs(z_magnitude);
    const auto core = std::max<std::size_t>(
        32, static_cast<std::size_t>(std::ceil(r * r + 8.0 * r + 10.0)));
    const auto buffer = static_cast<std::size_t>(std::ceil(4.0 * r + 8.0));
    return FockConfig{core + buffer, truncation_tol, buffer};
}

Operator::Operator(Matrix entries) : entries_(std::move(entries)), symmetry_(classify(entries_)) {}

Operator Operator::identity(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return Operator(Matrix::Identity(n, n));
}

Operator Operator::zero(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return Operator(Matrix::Zero(n, n));
}

std::pair<Operator, Operator> Operator::hermitian_split() const {
    const Matrix adj = entries_.adjoint();
    return {Operator(0.5 * (entries_ + adj)), Operator((entries_ - adj) / Complex(0.0, 2.0))};
}

Operator operator+(const Operator& a, const Operator& b) {
    require_same_dim(a, b);
    return Operator(a.entries_ + b.entries_);
}

Operator operator-(const Operator& a, const Operator& b) {
    require_same_dim(a, b);
    return Operator(a.entries_ - b.entries_);
}

Operator operator*(const Operator& a, const Operator& b) {
    require_same_dim(a, b);
    return Operator(a.entries_ * b.entries_);
}

Operator operator*(Complex s, const Operator& a) { return Operator(s * a.entries_); }

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator anticommutator(const Operator& a, const Operator& b) { return a * b + b * a; }

Ket::Ket(Vector amplitudes, Basis basis, bool normalized)
    : amps_(std::move(amplitudes)), basis_(basis), normalized_(normalized) {}

Ket Ket::basis_state(std::size_t dim, std::size_t index, Basis basis) {
    if (index >= dim) {
        throw std::out_of_range("basis index " + std::to_string(index) + " outside dimension " +
                                std::to_string(dim));
    }
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return Ket(std::move(v), basis);
}

Ket Ket::unit() const {
    const double n2 = squared_norm();
    if (n2 <= kZeroNormSquared) {
        throw ZeroNorm("state has zero norm");
    }
    return Ket(amps_ / std::sqrt(n2), basis_, true);
}

Complex inner(const Ket& a, const Ket& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("kets have different dimensions");
    }
    return a.amplitudes().dot(b.amplitudes());
}

Ket apply(const Operator& op, const Ket& psi) {
    require_same_dim(op, psi);
    return Ket(op.matrix() * psi.amplitudes(), psi.basis(), false);
}

LadderOperators ladder_operators(const FockConfig& cfg) {
    cfg.validate();
    const auto d = static_cast<Eigen::Index>(cfg.dimension);
    Matrix a = Matrix::Zero(d, d);
    for (Eigen::Index n = 1; n < d; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    Matrix a_dag = a.adjoint();
    return {Operator(std::move(a)), Operator(std::move(a_dag))};
}

CanonicalOperators canonical_operators(const FockConfig& cfg) {
    const auto [a, a_dag] = ladder_operators(cfg);
    const double s = 1.0 / std::sqrt(2.0);
    Operator q(s * (a.matrix() + a_dag.matrix()));
    Operator p(Complex(0.0, -s) * (a.matrix() - a_dag.matrix()));
    Operator n = a_dag * a;
    Operator h0 = n + Complex(0.5) * Operator::identity(cfg.dimension);
    return {std::move(q), std::move(p), std::move(n), std::move(h0)};
}

double coherent_tail(double z_magnitude, std::size_t dim) {
    const double lambda = z_magnitude * z_magnitude;
    if (lambda == 0.0) {
        return dim == 0 ? 1.0 : 0.0;
    }
    // Poisson terms from n = dim upward, in log space to survive large |z|.
    const auto n0 = static_cast<double>(dim);
    double log_term = -lambda + n0 * std::log(lambda) - std::lgamma(n0 + 1.0);
    double term = std::exp(log_term);
    double sum = 0.0;
    for (double n = n0; n < n0 + 100000.0; n += 1.0) {
        sum += term;
        if (n > lambda && term <= 1e-30 * sum) {
            break;
        }
        if (term == 0.0 && n > lambda) {
            break;
        }
        log_term += std::log(lambda) - std::log(n + 1.0);
        term = std::exp(log_term);
    }
    return std::min(sum, 1.0);
}

Ket coherent_ket(Complex z, const FockConfig& cfg) {
    cfg.validate();
    const double r = std::abs(z);
    const double tail = coherent_tail(r, cfg.dimension);
    if (tail >= cfg.truncation_tol) {
        throw TruncationError("coherent amplitude |z| = " + std::to_string(r) +
                              " loses probability " + std::to_string(tail) +
                              " beyond dimension " + std::to_string(cfg.dimension));
    }
    const auto d = static_cast<Eigen::Index>(cfg.dimension);
    Vector c = Vector::Zero(d);
    if (r == 0.0) {
        c(0) = 1.0;
        return Ket(std::move(c), Basis::fock);
    }
    const double phase = std::arg(z);
    const double log_r = std::log(r);
    for (Eigen::Index n = 0; n < d; ++n) {
        const auto nd = static_cast<double>(n);
        const double log_mag = -0.5 * r * r + nd * log_r - 0.5 * std::lgamma(nd + 1.0);
        c(n) = std::polar(std::exp(log_mag), nd * phase);
    }
    c /= c.norm();
    return Ket(std::move(c), Basis::fock);
}

Complex expectation(const Operator& m, const Ket& psi) {
    require_same_dim(m, psi);
    const double n2 = psi.squared_norm();
    if (n2 <= kZeroNormSquared) {
        throw ZeroNorm("expectation value requested on a zero-norm state");
    }
    return psi.amplitudes().dot(m.matrix() * psi.amplitudes()) / n2;
}

double variance(const Operator& m, const Ket& psi) {
    if (!m.is_hermitian()) {
        throw NotHermitian("variance requires a Hermitian operator");
    }
    require_same_dim(m, psi);
    const double n2 = psi.squared_norm();
    if (n2 <= kZeroNormSquared) {
        throw ZeroNorm("variance requested on a zero-norm state");
    }
    const Vector m_psi = m.matrix() * psi.amplitudes();
    const double second = m_psi.squaredNorm() / n2;
    const double first = std::real(psi.amplitudes().dot(m_psi)) / n2;
    return std::max(0.0, second - first * first);
}

HermitianSpectrum::HermitianSpectrum(const Operator& h) {
    if (!h.is_hermitian()) {
        throw NotHermitian("spectral decomposition requires a Hermitian operator");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
    if (solver.info() != Eigen::Success) {
        throw Error("Hermitian eigendecomposition failed to converge");
    }
    values_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
}

Operator HermitianSpectrum::exp_minus_i(double s) const {
    Vector phases(values_.size());
    for (Eigen::Index k = 0; k < values_.size(); ++k) {
        phases(k) = std::polar(1.0, -s * values_(k));
    }
    return Operator(vectors_ * phases.asDiagonal() * vectors_.adjoint());
}

Vector HermitianSpectrum::apply_exp_minus_i(double s, const Vector& psi) const {
    Vector coeffs = vectors_.adjoint() * psi;
    for (Eigen::Index k = 0; k < values_.size(); ++k) {
        coeffs(k) *= std::polar(1.0, -s * values_(k));
    }
    return vectors_ * coeffs;
}

Operator evolve_unitary(const Operator& h, double s) {
    if (s == 0.0) {
        if (!h.is_hermitian()) {
            throw NotHermitian("evolution generator must be Hermitian");
        }
        return Operator::identity(h.dim());
    }
    return HermitianSpectrum(h).exp_minus_i(s);
}

double unitarity_defect(const Operator& u) {
    const auto n = static_cast<Eigen::Index>(u.dim());
    return (u.matrix().adjoint() * u.matrix() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

}  // namespace weakmeter
