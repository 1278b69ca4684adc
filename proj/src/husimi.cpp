#include "weakmeter/husimi.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "weakmeter/errors.hpp"

namespace weakmeter {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + step * static_cast<double>(i);
    }
    out.back() = hi;
    return out;
}

void put_double(std::ostream& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
}

}  // namespace

double HusimiGrid::cell_q() const {
    return (q_axis.back() - q_axis.front()) / static_cast<double>(q_axis.size() - 1);
}

double HusimiGrid::cell_p() const {
    return (p_axis.back() - p_axis.front()) / static_cast<double>(p_axis.size() - 1);
}

std::pair<double, double> HusimiGrid::centroid() const {
    double w = 0.0, sq = 0.0, sp = 0.0;
    for (std::size_t ip = 0; ip < p_axis.size(); ++ip) {
        for (std::size_t iq = 0; iq < q_axis.size(); ++iq) {
            const double d = at(iq, ip);
            w += d;
            sq += d * q_axis[iq];
            sp += d * p_axis[ip];
        }
    }
    if (w <= 0.0) {
        throw ZeroNorm("Husimi grid carries no weight");
    }
    return {sq / w, sp / w};
}

PhaseWindow default_window(const Ket& psi, const FockConfig& cfg) {
    const auto [a, a_dag] = ladder_operators(cfg);
    const Complex mean_a = expectation(a, psi);
    const double q0 = std::sqrt(2.0) * mean_a.real();
    const double p0 = std::sqrt(2.0) * mean_a.imag();
    const double half = std::max(6.0, std::abs(mean_a) + 6.0);
    return {q0 - half, q0 + half, p0 - half, p0 + half};
}

HusimiGrid husimi_grid(const Ket& psi, const PhaseWindow& window, std::size_t resolution,
                       const FockConfig& cfg) {
    cfg.validate();
    if (resolution < 2) {
        throw std::invalid_argument("Husimi resolution must be at least 2 per axis");
    }
    const double bounds[] = {window.q_min, window.q_max, window.p_min, window.p_max};
    if (!std::all_of(std::begin(bounds), std::end(bounds), [](double v) { return std::isfinite(v); }) ||
        !(window.q_max > window.q_min) || !(window.p_max > window.p_min)) {
        throw std::invalid_argument("Husimi window must be finite with max > min");
    }
    if (psi.dim() != cfg.dimension) {
        throw DimensionMismatch("state does not match the Fock space");
    }

    const Ket unit = psi.unit();
    const double q_far = std::max(std::abs(window.q_min), std::abs(window.q_max));
    const double p_far = std::max(std::abs(window.p_min), std::abs(window.p_max));
    const double z_far = std::hypot(q_far, p_far) / std::sqrt(2.0);
    FockConfig probe = FockConfig::automatic(z_far, cfg.truncation_tol);
    probe.dimension = std::max(probe.dimension, cfg.dimension);
    probe.interior_buffer = 0;
    if (probe.dimension > kMaxProbeDimension) {
        throw TruncationError("Husimi window reaches |z| = " + std::to_string(z_far) +
                              ", beyond the representable coherent amplitudes");
    }

    HusimiGrid grid;
    grid.q_axis = linspace(window.q_min, window.q_max, resolution);
    grid.p_axis = linspace(window.p_min, window.p_max, resolution);
    grid.density.resize(resolution * resolution);
    const auto d = static_cast<Eigen::Index>(cfg.dimension);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    double total = 0.0;
    for (std::size_t ip = 0; ip < resolution; ++ip) {
        for (std::size_t iq = 0; iq < resolution; ++iq) {
            const Complex z(grid.q_axis[iq] * inv_sqrt2, grid.p_axis[ip] * inv_sqrt2);
            const Ket probe_ket = coherent_ket(z, probe);
            // psi has no support above cfg.dimension, so the overlap only needs
            // the leading block of the probe.
            const Complex overlap = probe_ket.amplitudes().head(d).dot(unit.amplitudes());
            const double value = std::norm(overlap) / std::numbers::pi;
            grid.density[ip * resolution + iq] = value;
            total += value;
        }
    }
    // d²z = dq dp / 2, so the z-plane cell area is half the (q, p) one.
    grid.normalization = total * grid.cell_q() * grid.cell_p() / 2.0;
    return grid;
}

void write_husimi_csv(std::ostream& out, const HusimiGrid& grid) {
    out << "q,p,density\n";
    for (std::size_t ip = 0; ip < grid.p_axis.size(); ++ip) {
        for (std::size_t iq = 0; iq < grid.q_axis.size(); ++iq) {
            put_double(out, grid.q_axis[iq]);
            out << ',';
            put_double(out, grid.p_axis[ip]);
            out << ',';
            put_double(out, grid.at(iq, ip));
            out << '\n';
        }
    }
}

}  // namespace weakmeter
