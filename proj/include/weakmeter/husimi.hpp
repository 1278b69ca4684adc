#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "weakmeter/fock.hpp"

namespace weakmeter {

struct PhaseWindow {
    double q_min = -6.0;
    double q_max = 6.0;
    double p_min = -6.0;
    double p_max = 6.0;
};

/// Husimi density |<z|psi>|²/π on a uniform (q, p) grid, z = (q + ip)/√2.
/// density is stored row-major with p as the slow index: density[ip * nq + iq].
struct HusimiGrid {
    std::vector<double> q_axis;
    std::vector<double> p_axis;
    std::vector<double> density;
    double normalization = 0.0;  // Σ density · ΔqΔp/2, the z-plane measure

    double at(std::size_t iq, std::size_t ip) const { return density[ip * q_axis.size() + iq]; }
    double cell_q() const;
    double cell_p() const;
    /// Density-weighted mean (q, p).
    std::pair<double, double> centroid() const;
};

/// Window centred on (<Q>, <P>) of psi with half-width max(6, |<a>| + 6).
PhaseWindow default_window(const Ket& psi, const FockConfig& cfg);

/// Evaluates the density from coherent_ket overlaps. The probe coherent
/// states live in a zero-padded space large enough for the window's largest
/// |z|; throws TruncationError when that exceeds kMaxProbeDimension.
HusimiGrid husimi_grid(const Ket& psi, const PhaseWindow& window, std::size_t resolution,
                       const FockConfig& cfg);

inline constexpr std::size_t kMaxProbeDimension = 4096;

/// CSV with header `q,p,density`, one row per cell, p outer and q inner.
void write_husimi_csv(std::ostream& out, const HusimiGrid& grid);

}  // namespace weakmeter
