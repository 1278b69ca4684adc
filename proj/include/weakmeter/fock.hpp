#pragma once

#include <complex>
#include <cstddef>
#include <utility>

#include <Eigen/Dense>

namespace weakmeter {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// Tolerance used to classify a matrix as Hermitian / anti-Hermitian.
inline constexpr double kHermitianTol = 1e-12;

// Squared norms at or below this are treated as an annihilated state.
inline constexpr double kZeroNormSquared = 1e-30;

/// Truncation settings for the meter's Fock space.
///
/// Levels 0..dimension-1 are represented. The top interior_buffer levels are
/// the "edge" band: operator identities are only asserted below it and a state
/// that populates it after coupling is reported as a leak.
struct FockConfig {
    std::size_t dimension = 32;
    double truncation_tol = 1e-12;
    std::size_t interior_buffer = 8;

    /// Throws std::invalid_argument unless dimension >= 2, buffer < dimension
    /// and truncation_tol > 0.
    void validate() const;

    /// Number of levels below the edge band.
    std::size_t interior() const { return dimension - interior_buffer; }

    /// Default configuration for a coherent amplitude of magnitude |z|:
    /// buffer B = ceil(4|z| + 8) on top of a tail-safe core of
    /// max(32, ceil(|z|^2 + 8|z| + 10)) levels.
    static FockConfig automatic(double z_magnitude, double truncation_tol = 1e-12);
};

enum class Symmetry { hermitian, anti_hermitian, general };

/// Dense square operator with a cached Hermiticity classification.
class Operator {
public:
    Operator() = default;
    explicit Operator(Matrix entries);

    static Operator identity(std::size_t dim);
    static Operator zero(std::size_t dim);

    const Matrix& matrix() const { return entries_; }
    std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
    Symmetry symmetry() const { return symmetry_; }
    bool is_hermitian() const { return symmetry_ == Symmetry::hermitian; }

    Operator adjoint() const { return Operator(entries_.adjoint()); }
    /// (A + A†)/2 and (A − A†)/(2i): A = C + iD with C, D Hermitian.
    std::pair<Operator, Operator> hermitian_split() const;

    Complex operator()(std::size_t row, std::size_t col) const {
        return entries_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    friend Operator operator+(const Operator& a, const Operator& b);
    friend Operator operator-(const Operator& a, const Operator& b);
    friend Operator operator*(const Operator& a, const Operator& b);
    friend Operator operator*(Complex s, const Operator& a);

private:
    Matrix entries_;
    Symmetry symmetry_ = Symmetry::hermitian;
};

Operator commutator(const Operator& a, const Operator& b);
Operator anticommutator(const Operator& a, const Operator& b);

enum class Basis { fock, system };

/// Amplitude vector in a fixed basis. Prepared states carry unit norm;
/// post-selected meter states are tagged unnormalized.
class Ket {
public:
    Ket() = default;
    Ket(Vector amplitudes, Basis basis, bool normalized = true);

    static Ket basis_state(std::size_t dim, std::size_t index, Basis basis);

    const Vector& amplitudes() const { return amps_; }
    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    Basis basis() const { return basis_; }
    bool normalized() const { return normalized_; }

    double squared_norm() const { return amps_.squaredNorm(); }
    /// Unit-norm copy. Throws ZeroNorm on an annihilated state.
    Ket unit() const;

    Complex operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

private:
    Vector amps_;
    Basis basis_ = Basis::fock;
    bool normalized_ = true;
};

/// <a|b>, conjugate-linear in the first argument.
Complex inner(const Ket& a, const Ket& b);

Ket apply(const Operator& op, const Ket& psi);

struct LadderOperators {
    Operator a;
    Operator a_dag;
};

struct CanonicalOperators {
    Operator Q;
    Operator P;
    Operator N;
    Operator H0;
};

LadderOperators ladder_operators(const FockConfig& cfg);

// Q = (a + a†)/√2, P = −i(a − a†)/√2, N = a†a, H0 = N + I/2 (ħ = m = ω = 1).
CanonicalOperators canonical_operators(const FockConfig& cfg);

/// Poisson tail sum_{n >= dim} e^{-|z|^2} |z|^{2n} / n!, the probability that a
/// coherent state of amplitude z has outside the first dim levels.
double coherent_tail(double z_magnitude, std::size_t dim);

/// Coherent state |z> = D[z]|0>, truncated and renormalized.
/// Throws TruncationError when coherent_tail(|z|, D) >= cfg.truncation_tol.
Ket coherent_ket(Complex z, const FockConfig& cfg);

/// <psi|M|psi> / <psi|psi>. Real part is the Hermitian part's expectation,
/// imaginary part the anti-Hermitian part's.
Complex expectation(const Operator& m, const Ket& psi);

/// <M^2> − <M>^2 for Hermitian M, clamped at zero.
double variance(const Operator& m, const Ket& psi);

/// Eigendecomposition of a Hermitian operator, reusable for many exponentials.
class HermitianSpectrum {
public:
    explicit HermitianSpectrum(const Operator& h);

    const Eigen::VectorXd& eigenvalues() const { return values_; }
    const Matrix& eigenvectors() const { return vectors_; }

    /// exp(−i s H).
    Operator exp_minus_i(double s) const;
    /// exp(−i s H) |psi> without forming the full exponential.
    Vector apply_exp_minus_i(double s, const Vector& psi) const;

private:
    Eigen::VectorXd values_;
    Matrix vectors_;
};

/// exp(−i s H) by unitary diagonalization. Throws NotHermitian.
Operator evolve_unitary(const Operator& h, double s);

/// Largest |entry| of (U†U − I).
double unitarity_defect(const Operator& u);

}  // namespace weakmeter
