#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "weakmeter/fock.hpp"

namespace weakmeter {

// Phase-plane generators available on the meter. H0, G and K span sl(2,R);
// Q and P generate translations and N (= H0 − I/2) rotations.
enum class StandardGenerator { Q, P, N, H0, G, K };

/// A named generator or a user-supplied Hermitian matrix.
using GeneratorKind = std::variant<StandardGenerator, Operator>;

std::string_view to_string(StandardGenerator g);
/// Accepts "Q", "P", "N", "H0", "G", "K" (case-insensitive). Throws std::invalid_argument.
StandardGenerator parse_generator(std::string_view name);

/// Hermitian matrix of the requested generator:
///   H0 = (Q² + P²)/2, G = (QP + PQ)/2, K = (Q² − P²)/2.
/// Throws NonHermitianCustom for a non-Hermitian custom payload.
Operator generator(const GeneratorKind& kind, const FockConfig& cfg);

/// Fractional Fourier operator exp(+iθN); θ = π/2 gives F|n> = iⁿ|n>.
Operator fractional_fourier(double theta, const FockConfig& cfg);

/// Displacement D[z] = exp(z a† − z̄ a), exponentiated through the Hermitian
/// form i(z a† − z̄ a). Throws TruncationError when |z| is not tail-safe.
Operator displacement(Complex z, const FockConfig& cfg);

struct AlgebraReport {
    std::string relation_name;
    double residual = 0.0;
    bool pass = false;
};

/// Max |entry| of ([A,B] − expected) over the block with both indices below
/// cfg.interior().
double commutator_residual(const Operator& a, const Operator& b, const Operator& expected,
                           const FockConfig& cfg);

AlgebraReport check_commutator(std::string name, const Operator& a, const Operator& b,
                               const Operator& expected, const FockConfig& cfg, double tol);

/// Checks [Q,P] = iI, [H0,G] = 2iK, [H0,K] = −2iG and [G,K] = −2iH0 on the
/// interior block, one report per relation.
std::vector<AlgebraReport> verify_sl2(const FockConfig& cfg, double tol = 1e-9);

/// F|n> = iⁿ|n> for every interior n, and F⁴ = I on the full space.
std::vector<AlgebraReport> verify_fourier(const FockConfig& cfg, double tol = 1e-10);

}  // namespace weakmeter
