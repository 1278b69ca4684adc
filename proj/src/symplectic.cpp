#include "weakmeter/symplectic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "weakmeter/errors.hpp"

namespace weakmeter {

std::string_view to_string(StandardGenerator g) {
    switch (g) {
        case StandardGenerator::Q: return "Q";
        case StandardGenerator::P: return "P";
        case StandardGenerator::N: return "N";
        case StandardGenerator::H0: return "H0";
        case StandardGenerator::G: return "G";
        case StandardGenerator::K: return "K";
    }
    return "?";
}

StandardGenerator parse_generator(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "Q") return StandardGenerator::Q;
    if (upper == "P") return StandardGenerator::P;
    if (upper == "N") return StandardGenerator::N;
    if (upper == "H0") return StandardGenerator::H0;
    if (upper == "G") return StandardGenerator::G;
    if (upper == "K") return StandardGenerator::K;
    throw std::invalid_argument("unknown generator '" + std::string(name) + "'");
}

namespace {

Operator standard_generator(StandardGenerator kind, const FockConfig& cfg) {
    const auto ops = canonical_operators(cfg);
    switch (kind) {
        case StandardGenerator::Q: return ops.Q;
        case StandardGenerator::P: return ops.P;
        case StandardGenerator::N: return ops.N;
        case StandardGenerator::H0: return ops.H0;
        case StandardGenerator::G:
            return Complex(0.5) * anticommutator(ops.Q, ops.P);
        case StandardGenerator::K:
            return Complex(0.5) * (ops.Q * ops.Q - ops.P * ops.P);
    }
    throw std::logic_error("unhandled generator");
}

}  // namespace

Operator generator(const GeneratorKind& kind, const FockConfig& cfg) {
    if (const auto* custom = std::get_if<Operator>(&kind)) {
        if (!custom->is_hermitian()) {
            throw NonHermitianCustom("custom generator must be Hermitian");
        }
        if (custom->dim() != cfg.dimension) {
            throw DimensionMismatch("custom generator dimension does not match the Fock space");
        }
        return *custom;
    }
    return standard_generator(std::get<StandardGenerator>(kind), cfg);
}

Operator fractional_fourier(double theta, const FockConfig& cfg) {
    cfg.validate();
    const auto d = static_cast<Eigen::Index>(cfg.dimension);
    Vector diag(d);
    for (Eigen::Index n = 0; n < d; ++n) {
        // Reduce nθ modulo 2π before taking the phase so that multiples of π/2
        // land on exact fourth roots of unity.
        const double angle = std::remainder(static_cast<double>(n) * theta, 2.0 * M_PI);
        diag(n) = std::polar(1.0, angle);
    }
    return Operator(Matrix(diag.asDiagonal()));
}

Operator displacement(Complex z, const FockConfig& cfg) {
    cfg.validate();
    const double tail = coherent_tail(std::abs(z), cfg.dimension);
    if (tail >= cfg.truncation_tol) {
        throw TruncationError("displacement amplitude |z| = " + std::to_string(std::abs(z)) +
                              " is not tail-safe in dimension " +
                              std::to_string(cfg.dimension));
    }
    if (z == Complex(0.0)) {
        return Operator::identity(cfg.dimension);
    }
    const auto [a, a_dag] = ladder_operators(cfg);
    // z a† − z̄ a = −i H with H = i(z a† − z̄ a) Hermitian, so D = exp(−i·1·H).
    const Operator h(kI * (z * a_dag.matrix() - std::conj(z) * a.matrix()));
    return evolve_unitary(h, 1.0);
}

double commutator_residual(const Operator& a, const Operator& b, const Operator& expected,
                           const FockConfig& cfg) {
    const Matrix diff = commutator(a, b).matrix() - expected.matrix();
    const auto k = static_cast<Eigen::Index>(cfg.interior());
    if (k == 0) {
        return 0.0;
    }
    return diff.topLeftCorner(k, k).cwiseAbs().maxCoeff();
}

AlgebraReport check_commutator(std::string name, const Operator& a, const Operator& b,
                               const Operator& expected, const FockConfig& cfg, double tol) {
    const double r = commutator_residual(a, b, expected, cfg);
    return {std::move(name), r, r < tol};
}

std::vector<AlgebraReport> verify_sl2(const FockConfig& cfg, double tol) {
    cfg.validate();
    const auto ops = canonical_operators(cfg);
    const Operator g = generator(StandardGenerator::G, cfg);
    const Operator k = generator(StandardGenerator::K, cfg);
    const Operator id = Operator::identity(cfg.dimension);
    return {
        check_commutator("[Q,P] = iI", ops.Q, ops.P, kI * id, cfg, tol),
        check_commutator("[H0,G] = 2iK", ops.H0, g, Complex(0.0, 2.0) * k, cfg, tol),
        check_commutator("[H0,K] = -2iG", ops.H0, k, Complex(0.0, -2.0) * g, cfg, tol),
        check_commutator("[G,K] = -2iH0", g, k, Complex(0.0, -2.0) * ops.H0, cfg, tol),
    };
}

std::vector<AlgebraReport> verify_fourier(const FockConfig& cfg, double tol) {
    cfg.validate();
    const Operator f = fractional_fourier(M_PI / 2.0, cfg);
    double eig_residual = 0.0;
    for (std::size_t n = 0; n < cfg.interior(); ++n) {
        const Ket fn = apply(f, Ket::basis_state(cfg.dimension, n, Basis::fock));
        Vector expected = Vector::Zero(static_cast<Eigen::Index>(cfg.dimension));
        static constexpr Complex kPowers[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        expected(static_cast<Eigen::Index>(n)) = kPowers[n % 4];
        eig_residual = std::max(eig_residual, (fn.amplitudes() - expected).cwiseAbs().maxCoeff());
    }
    const Operator f4 = f * f * f * f;
    const double f4_residual =
        (f4.matrix() - Operator::identity(cfg.dimension).matrix()).cwiseAbs().maxCoeff();
    return {
        {"F|n> = i^n|n>", eig_residual, eig_residual < tol},
        {"F^4 = I", f4_residual, f4_residual < tol},
    };
}

}  // namespace weakmeter
