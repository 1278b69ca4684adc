#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weakmeter/fock.hpp"
#include "weakmeter/symplectic.hpp"

namespace weakmeter {

// |<beta|alpha>| below this is treated as exactly orthogonal.
inline constexpr double kOrthogonalOverlap = 1e-14;

/// Measured system: Hermitian observable O with pre-selected |alpha> and
/// post-selected |beta>, both unit vectors in O's d-dimensional space.
struct SystemSpec {
    Operator observable;
    Ket alpha;
    Ket beta;
    double overlap_floor = 1e-6;

    std::size_t dim() const { return observable.dim(); }
    /// Throws std::invalid_argument on a non-Hermitian observable, mismatched
    /// dimensions or non-unit kets.
    void validate() const;
};

/// Delta-pulse coupling ε O⊗R (weak mode) or λ O⊗R (strong mode).
struct CouplingSpec {
    double epsilon = 0.0;
    GeneratorKind generator = StandardGenerator::P;
    std::optional<double> lambda_strong;

    bool strong() const { return lambda_strong.has_value(); }
    double strength() const { return lambda_strong.value_or(epsilon); }
    void validate() const;
};

struct ShiftReport {
    std::string readout;
    double epsilon = 0.0;
    Complex exact_shift;
    Complex first_order;
    double residual = 0.0;
    double post_prob = 0.0;
};

/// <beta|alpha>.
Complex selection_overlap(const SystemSpec& sys);

/// O_w = <beta|O|alpha> / <beta|alpha>. Throws OrthogonalSelection when the
/// selections are orthogonal.
Complex weak_value(const SystemSpec& sys);

/// True when |<beta|alpha>| is nonzero but below sys.overlap_floor; weak values
/// there are huge and first-order results need a correspondingly tiny ε.
bool near_orthogonal(const SystemSpec& sys);

/// Normalized population of the top interior_buffer levels.
double edge_population(const Ket& psi, const FockConfig& cfg);

/// Exact post-selected meter (<beta| ⊗ I) exp(−i s O⊗R) (|alpha> ⊗ |meter>)
/// with s = coupling.strength(), evaluated per eigenvalue o_j of O as
///   Σ_j <beta|o_j><o_j|alpha> exp(−i s o_j R) |meter>.
/// The result is unnormalized; its squared norm is the post-selection
/// probability. Throws TruncationLeak when the result populates the edge band.
Ket couple_and_postselect(const SystemSpec& sys, const Ket& meter, const CouplingSpec& coupling,
                          const FockConfig& cfg);

/// Exact ΔM = <M>_final − <M>_initial next to its first-order prediction.
ShiftReport exact_shift(const Operator& readout, const std::string& label, const SystemSpec& sys,
                        const Ket& meter, const CouplingSpec& coupling, const FockConfig& cfg);

/// First-order shift for readout M under generator R:
///   ε [ Im(O_w)(<{M,R}> − 2<R><M>) − i Re(O_w) <[M,R]> ]
/// with every expectation taken in the initial meter state.
Complex first_order_shift(const Operator& readout, const Operator& generator, Complex weak_value,
                          const Ket& meter, double epsilon);

/// Annihilator shift for R = N:
///   ε [ −i O_w <a> + 2 Im(O_w)(<N a> − <N><a>) ].
/// Reduces to −iεzO_w on a coherent meter |z>.
Complex annihilator_shift(Complex weak_value, const Ket& meter, double epsilon,
                          const FockConfig& cfg);

struct QuadratureShift {
    double dQ = 0.0;
    double dP = 0.0;
};

/// Closed-form pair for a coherent meter at phase π/2, |z> = |i·z_mag>:
/// ΔQ = ε√2|z| Re(O_w), ΔP = ε√2|z| Im(O_w).
QuadratureShift symmetric_qp_shifts(double z_mag, double epsilon, Complex weak_value);

struct JozsaQ {
    Complex shift;            // ε[2 Im(O_w)(<g> − <P><Q>) + Re(O_w)]
    double dispersion_rate;   // d/dt δ²Q = (2/m)(<g> − <P><Q>) for a free meter of mass m
    Complex rate_form;        // ε[Re(O_w) + m Im(O_w) d/dt δ²Q]
};

/// ΔQ for R = P. The rate form rewrites the ⟨g⟩ term through d/dt δ²Q and
/// must agree with `shift`.
JozsaQ jozsa_deltaQ(Complex weak_value, const Ket& meter, double epsilon, double mass = 1.0);

struct MeasurementBranch {
    double eigenvalue = 0.0;
    double probability = 0.0;
    Ket meter;
};

/// Ideal (non-post-selected) von Neumann measurement with coupling λ O⊗P.
/// Each branch holds the normalized meter exp(−iλ o_j P)|meter>, whose <Q>
/// is translated by λ o_j. Degenerate eigenvalues are merged and branches of
/// vanishing probability dropped.
std::vector<MeasurementBranch> ideal_measurement(const Operator& observable, const Ket& alpha,
                                                 const Ket& meter, double lambda,
                                                 const FockConfig& cfg);

/// Everything except ε needed to evaluate one shift.
struct ShiftExperiment {
    SystemSpec system;
    Ket meter;
    GeneratorKind generator = StandardGenerator::P;
    Operator readout;
    std::string readout_label;
    FockConfig cfg;
};

struct ResidualScan {
    std::vector<ShiftReport> reports;
    double slope = 0.0;
};

/// Fits log|exact − first order| against log ε. The first-order formulas make
/// the residual at least quadratic in ε. Throws DegenerateFit for fewer than
/// four ε values, a span under two decades, or residuals at the rounding floor.
ResidualScan residual_scan(const ShiftExperiment& experiment, std::span<const double> epsilons);

/// The fit step of residual_scan on precomputed reports; `floor` is the
/// absolute residual treated as rounding noise.
double residual_slope(std::span<const ShiftReport> reports, double floor);

/// Residuals at or below this (relative to 1 + |<M>_initial|) are rounding noise.
inline constexpr double kResidualFloor = 1e-13;

}  // namespace weakmeter
