#include "weakmeter/weak.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "weakmeter/errors.hpp"
#include "weakmeter/fit.hpp"

namespace weakmeter {

namespace {

constexpr double kUnitNormTol = 1e-9;
constexpr double kDegenerateEigenvalueTol = 1e-9;
constexpr double kNegligibleBranch = 1e-14;

void require_unit(const Ket& k, const char* what) {
    if (std::abs(std::sqrt(k.squared_norm()) - 1.0) > kUnitNormTol) {
        throw std::invalid_argument(std::string(what) + " must be a unit vector");
    }
}

void require_meter(const Ket& meter, const FockConfig& cfg) {
    if (meter.dim() != cfg.dimension) {
        throw DimensionMismatch("meter has " + std::to_string(meter.dim()) +
                                " amplitudes but the Fock space has " +
                                std::to_string(cfg.dimension) + " levels");
    }
}

void check_leak(const Ket& psi, const FockConfig& cfg, const char* what) {
    if (psi.squared_norm() <= kZeroNormSquared) {
        return;
    }
    const double edge = edge_population(psi, cfg);
    if (edge > cfg.truncation_tol) {
        char prob[32];
        std::snprintf(prob, sizeof prob, "%.3g", edge);
        throw TruncationLeak(std::string(what) + " puts probability " + prob + " into the top " +
                             std::to_string(cfg.interior_buffer) + " Fock levels");
    }
}

}  // namespace

void SystemSpec::validate() const {
    if (!observable.is_hermitian()) {
        throw std::invalid_argument("system observable must be Hermitian");
    }
    if (alpha.dim() != dim() || beta.dim() != dim()) {
        throw std::invalid_argument("pre/post-selected states must match the observable dimension");
    }
    require_unit(alpha, "pre-selected state");
    require_unit(beta, "post-selected state");
}

void CouplingSpec::validate() const {
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("coupling epsilon must be non-negative");
    }
    if (lambda_strong && epsilon != 0.0) {
        throw std::invalid_argument("weak (epsilon) and strong (lambda) coupling are exclusive");
    }
}

Complex selection_overlap(const SystemSpec& sys) { return inner(sys.beta, sys.alpha); }

Complex weak_value(const SystemSpec& sys) {
    sys.validate();
    const Complex overlap = selection_overlap(sys);
    if (std::abs(overlap) < kOrthogonalOverlap) {
        throw OrthogonalSelection("pre- and post-selected states are orthogonal; weak value undefined");
    }
    return inner(sys.beta, apply(sys.observable, sys.alpha)) / overlap;
}

bool near_orthogonal(const SystemSpec& sys) {
    const double overlap = std::abs(selection_overlap(sys));
    return overlap >= kOrthogonalOverlap && overlap < sys.overlap_floor;
}

double edge_population(const Ket& psi, const FockConfig& cfg) {
    require_meter(psi, cfg);
    const double total = psi.squared_norm();
    if (total <= kZeroNormSquared) {
        throw ZeroNorm("edge population of a zero-norm state");
    }
    const auto b = static_cast<Eigen::Index>(cfg.interior_buffer);
    if (b == 0) {
        return 0.0;
    }
    return psi.amplitudes().tail(b).squaredNorm() / total;
}

Ket couple_and_postselect(const SystemSpec& sys, const Ket& meter, const CouplingSpec& coupling,
                          const FockConfig& cfg) {
    sys.validate();
    coupling.validate();
    require_meter(meter, cfg);
    const double s = coupling.strength();
    if (s == 0.0) {
        return Ket(selection_overlap(sys) * meter.amplitudes(), Basis::fock, false);
    }
    const HermitianSpectrum observable(sys.observable);
    const HermitianSpectrum gen(generator(coupling.generator, cfg));
    const Vector beta_c = observable.eigenvectors().adjoint() * sys.beta.amplitudes();
    const Vector alpha_c = observable.eigenvectors().adjoint() * sys.alpha.amplitudes();

    Vector out = Vector::Zero(meter.amplitudes().size());
    for (Eigen::Index j = 0; j < observable.eigenvalues().size(); ++j) {
        const Complex weight = std::conj(beta_c(j)) * alpha_c(j);
        if (weight == Complex(0.0)) {
            continue;
        }
        out += weight * gen.apply_exp_minus_i(s * observable.eigenvalues()(j), meter.amplitudes());
    }
    Ket result(std::move(out), Basis::fock, false);
    check_leak(result, cfg, "coupling");
    return result;
}

ShiftReport exact_shift(const Operator& readout, const std::string& label, const SystemSpec& sys,
                        const Ket& meter, const CouplingSpec& coupling, const FockConfig& cfg) {
    const Complex ow = weak_value(sys);
    const Operator r = generator(coupling.generator, cfg);
    const Ket final_meter = couple_and_postselect(sys, meter, coupling, cfg);

    ShiftReport report;
    report.readout = label;
    report.epsilon = coupling.strength();
    report.post_prob = final_meter.squared_norm();
    if (report.post_prob <= kZeroNormSquared) {
        throw ZeroNorm("post-selection annihilated the meter state");
    }
    // Without coupling the normalized final meter is the initial one.
    report.exact_shift = coupling.strength() == 0.0
                             ? Complex(0.0)
                             : expectation(readout, final_meter) - expectation(readout, meter);
    report.first_order = first_order_shift(readout, r, ow, meter, coupling.strength());
    report.residual = std::abs(report.exact_shift - report.first_order);
    return report;
}

Complex first_order_shift(const Operator& readout, const Operator& generator, Complex weak_value,
                          const Ket& meter, double epsilon) {
    if (!generator.is_hermitian()) {
        throw NotHermitian("coupling generator must be Hermitian");
    }
    if (readout.dim() != generator.dim() || readout.dim() != meter.dim()) {
        throw DimensionMismatch("readout, generator and meter dimensions differ");
    }
    const Complex anti = expectation(anticommutator(readout, generator), meter);
    const Complex comm = expectation(commutator(readout, generator), meter);
    const Complex r = expectation(generator, meter);
    const Complex m = expectation(readout, meter);
    return epsilon * (weak_value.imag() * (anti - 2.0 * r * m) - kI * weak_value.real() * comm);
}

Complex annihilator_shift(Complex weak_value, const Ket& meter, double epsilon,
                          const FockConfig& cfg) {
    require_meter(meter, cfg);
    const auto [a, a_dag] = ladder_operators(cfg);
    const Operator n = a_dag * a;
    const Complex mean_a = expectation(a, meter);
    const Complex mean_na = expectation(n * a, meter);
    const Complex mean_n = expectation(n, meter);
    return epsilon *
           (-kI * weak_value * mean_a + 2.0 * weak_value.imag() * (mean_na - mean_n * mean_a));
}

QuadratureShift symmetric_qp_shifts(double z_mag, double epsilon, Complex weak_value) {
    if (!(z_mag >= 0.0)) {
        throw std::invalid_argument("coherent amplitude magnitude must be non-negative");
    }
    const double scale = epsilon * std::sqrt(2.0) * z_mag;
    return {scale * weak_value.real(), scale * weak_value.imag()};
}

JozsaQ jozsa_deltaQ(Complex weak_value, const Ket& meter, double epsilon, double mass) {
    if (!(mass > 0.0)) {
        throw std::invalid_argument("meter mass must be positive");
    }
    const FockConfig cfg{meter.dim(), 1e-12, 0};
    const auto ops = canonical_operators(cfg);
    const Operator g = generator(StandardGenerator::G, cfg);
    const double mean_g = expectation(g, meter).real();
    const double mean_q = expectation(ops.Q, meter).real();
    const double mean_p = expectation(ops.P, meter).real();
    const double covariance = mean_g - mean_p * mean_q;

    JozsaQ out;
    out.shift = epsilon * (2.0 * weak_value.imag() * covariance + weak_value.real());
    out.dispersion_rate = 2.0 * covariance / mass;
    out.rate_form = epsilon * (weak_value.real() + mass * weak_value.imag() * out.dispersion_rate);
    return out;
}

std::vector<MeasurementBranch> ideal_measurement(const Operator& observable, const Ket& alpha,
                                                 const Ket& meter, double lambda,
                                                 const FockConfig& cfg) {
    if (!observable.is_hermitian()) {
        throw NotHermitian("measured observable must be Hermitian");
    }
    if (alpha.dim() != observable.dim()) {
        throw DimensionMismatch("pre-selected state does not match the observable");
    }
    require_unit(alpha, "pre-selected state");
    require_meter(meter, cfg);

    const HermitianSpectrum spec(observable);
    const HermitianSpectrum translate(canonical_operators(cfg).P);
    const Vector coeffs = spec.eigenvectors().adjoint() * alpha.amplitudes();
    const Eigen::VectorXd& values = spec.eigenvalues();

    std::vector<MeasurementBranch> branches;
    Eigen::Index j = 0;
    while (j < values.size()) {
        // Eigenvalues come sorted; merge a degenerate run into one branch.
        double prob = 0.0;
        Eigen::Index k = j;
        while (k < values.size() && values(k) - values(j) <= kDegenerateEigenvalueTol) {
            prob += std::norm(coeffs(k));
            ++k;
        }
        if (prob > kNegligibleBranch) {
            const double o = values(j);
            Ket moved(translate.apply_exp_minus_i(lambda * o, meter.amplitudes()), Basis::fock);
            check_leak(moved, cfg, "pointer translation");
            branches.push_back({o, prob, std::move(moved)});
        }
        j = k;
    }
    return branches;
}

namespace {

void require_epsilon_span(std::span<const double> epsilons) {
    if (epsilons.size() < 4) {
        throw DegenerateFit("residual scan needs at least four epsilon values");
    }
    const auto [lo, hi] = std::minmax_element(epsilons.begin(), epsilons.end());
    if (!(*lo > 0.0)) {
        throw DegenerateFit("residual scan needs positive epsilon values");
    }
    if (*hi / *lo < 100.0 * (1.0 - 1e-12)) {
        throw DegenerateFit("epsilon values must span at least two decades");
    }
}

}  // namespace

double residual_slope(std::span<const ShiftReport> reports, double floor) {
    std::vector<double> eps, residuals;
    for (const auto& r : reports) {
        eps.push_back(r.epsilon);
        residuals.push_back(r.residual);
    }
    require_epsilon_span(eps);
    for (const auto& r : reports) {
        if (r.residual <= floor) {
            throw DegenerateFit("residual at epsilon = " + std::to_string(r.epsilon) +
                                " is at the floating-point floor; fit is floor-limited");
        }
    }
    return loglog_slope(eps, residuals);
}

ResidualScan residual_scan(const ShiftExperiment& experiment, std::span<const double> epsilons) {
    require_epsilon_span(epsilons);
    ResidualScan scan;
    for (const double eps : epsilons) {
        const CouplingSpec coupling{eps, experiment.generator, std::nullopt};
        scan.reports.push_back(exact_shift(experiment.readout, experiment.readout_label,
                                           experiment.system, experiment.meter, coupling,
                                           experiment.cfg));
    }
    const double floor =
        kResidualFloor * (1.0 + std::abs(expectation(experiment.readout, experiment.meter)));
    scan.slope = residual_slope(scan.reports, floor);
    return scan;
}

}  // namespace weakmeter
