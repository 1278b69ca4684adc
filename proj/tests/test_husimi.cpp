#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "support.hpp"
#include "weakmeter/errors.hpp"
#include "weakmeter/husimi.hpp"
#include "weakmeter/symplectic.hpp"

namespace weakmeter {
namespace {

constexpr double kPi = std::numbers::pi;

std::pair<std::size_t, std::size_t> peak(const HusimiGrid& g) {
    const auto it = std::max_element(g.density.begin(), g.density.end());
    const auto idx = static_cast<std::size_t>(it - g.density.begin());
    return {idx % g.q_axis.size(), idx / g.q_axis.size()};
}

// Bilinear interpolation of the grid at (q, p), which must lie inside the window.
double sample(const HusimiGrid& g, double q, double p) {
    const double fq = (q - g.q_axis.front()) / g.cell_q();
    const double fp = (p - g.p_axis.front()) / g.cell_p();
    const auto iq = std::min(static_cast<std::size_t>(fq), g.q_axis.size() - 2);
    const auto ip = std::min(static_cast<std::size_t>(fp), g.p_axis.size() - 2);
    const double tq = fq - static_cast<double>(iq);
    const double tp = fp - static_cast<double>(ip);
    return (1 - tq) * (1 - tp) * g.at(iq, ip) + tq * (1 - tp) * g.at(iq + 1, ip) +
           (1 - tq) * tp * g.at(iq, ip + 1) + tq * tp * g.at(iq + 1, ip + 1);
}

TEST(Husimi, VacuumPeaksAtOriginWithOneOverPi) {
    const FockConfig cfg{32, 1e-12, 8};
    const HusimiGrid g = husimi_grid(coherent_ket(0.0, cfg), {}, 121, cfg);
    const auto [iq, ip] = peak(g);
    EXPECT_NEAR(g.q_axis[iq], 0.0, 1e-12);
    EXPECT_NEAR(g.p_axis[ip], 0.0, 1e-12);
    EXPECT_NEAR(g.at(iq, ip), 1.0 / kPi, 1e-12);
    EXPECT_NEAR(g.at(iq, ip), 0.31831, 1e-5);
}

TEST(Husimi, CoherentDensityMatchesClosedForm) {
    const FockConfig cfg = FockConfig::automatic(3.0);
    const Complex z0(0.0, 3.0);
    const Ket psi = coherent_ket(z0, cfg);
    const HusimiGrid g = husimi_grid(psi, default_window(psi, cfg), 61, cfg);
    double worst = 0.0;
    for (std::size_t ip = 0; ip < g.p_axis.size(); ++ip) {
        for (std::size_t iq = 0; iq < g.q_axis.size(); ++iq) {
            const Complex z(g.q_axis[iq] / std::sqrt(2.0), g.p_axis[ip] / std::sqrt(2.0));
            worst = std::max(worst, std::abs(g.at(iq, ip) - std::exp(-std::norm(z - z0)) / kPi));
        }
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Husimi, CoherentPeakSitsAtPhasePoint) {
    const FockConfig cfg = FockConfig::automatic(3.0);
    const Complex z0(1.0, -2.0);
    const Ket psi = coherent_ket(z0, cfg);
    const HusimiGrid g = husimi_grid(psi, default_window(psi, cfg), 201, cfg);
    const auto [iq, ip] = peak(g);
    EXPECT_NEAR(g.q_axis[iq], std::sqrt(2.0) * z0.real(), g.cell_q());
    EXPECT_NEAR(g.p_axis[ip], std::sqrt(2.0) * z0.imag(), g.cell_p());
}

TEST(Husimi, CentroidWithinOneCell) {
    const FockConfig cfg = FockConfig::automatic(3.0);
    const Ket psi = coherent_ket({0.0, 3.0}, cfg);
    const HusimiGrid g = husimi_grid(psi, default_window(psi, cfg), 201, cfg);
    const auto [cq, cp] = g.centroid();
    EXPECT_NEAR(cq, 0.0, g.cell_q());
    EXPECT_NEAR(cp, 3.0 * std::sqrt(2.0), g.cell_p());
}

TEST(Husimi, NormalizationIsometry) {
    std::mt19937_64 rng(47);
    const FockConfig cfg{24, 1e-12, 4};
    for (int trial = 0; trial < 3; ++trial) {
        const Ket psi = testing::random_ket(24, 6, rng);
        const HusimiGrid g = husimi_grid(psi, default_window(psi, cfg), 161, cfg);
        EXPECT_GE(g.normalization, 0.999);
        EXPECT_LE(g.normalization, 1.000001);
        EXPECT_TRUE(std::all_of(g.density.begin(), g.density.end(), [](double d) { return d >= 0.0; }));
    }
}

TEST(Husimi, ClippedWindowLosesWeight) {
    const FockConfig cfg{32, 1e-12, 8};
    const HusimiGrid g = husimi_grid(coherent_ket(0.0, cfg), {0.0, 3.0, -3.0, 3.0}, 81, cfg);
    EXPECT_LT(g.normalization, 0.6);
    EXPECT_GT(g.normalization, 0.4);
}

TEST(Husimi, QuarterTurnRotatesGridExactly) {
    const FockConfig cfg = FockConfig::automatic(2.0);
    const Ket psi = coherent_ket({1.2, 0.5}, cfg);
    const Ket rotated = apply(fractional_fourier(kPi / 2, cfg), psi);
    const PhaseWindow w{-7.0, 7.0, -7.0, 7.0};
    const std::size_t n = 71;
    const HusimiGrid g0 = husimi_grid(psi, w, n, cfg);
    const HusimiGrid g1 = husimi_grid(rotated, w, n, cfg);
    // Q_rot(q, p) = Q(p, −q) for a rotation by π/2.
    double worst = 0.0;
    for (std::size_t ip = 0; ip < n; ++ip) {
        for (std::size_t iq = 0; iq < n; ++iq) {
            worst = std::max(worst, std::abs(g1.at(iq, ip) - g0.at(ip, n - 1 - iq)));
        }
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Husimi, GeneralRotationResamplesGrid) {
    const FockConfig cfg{40, 1e-12, 8};
    std::mt19937_64 rng(53);
    const Ket psi = testing::random_ket(40, 5, rng);
    const double theta = kPi / 6;
    const Ket rotated = apply(fractional_fourier(theta, cfg), psi);
    const PhaseWindow w{-8.0, 8.0, -8.0, 8.0};
    const HusimiGrid g0 = husimi_grid(psi, w, 241, cfg);
    const HusimiGrid g1 = husimi_grid(rotated, w, 241, cfg);
    double worst = 0.0;
    for (std::size_t ip = 0; ip < 241; ip += 4) {
        for (std::size_t iq = 0; iq < 241; iq += 4) {
            const double q = g1.q_axis[iq], p = g1.p_axis[ip];
            const double qr = std::cos(theta) * q + std::sin(theta) * p;
            const double pr = -std::sin(theta) * q + std::cos(theta) * p;
            if (std::abs(qr) > 7.9 || std::abs(pr) > 7.9) continue;
            worst = std::max(worst, std::abs(g1.at(iq, ip) - sample(g0, qr, pr)));
        }
    }
    EXPECT_LT(worst, 2e-3);
}

TEST(Husimi, DefaultWindowHalfWidth) {
    const FockConfig cfg = FockConfig::automatic(3.0);
    const PhaseWindow w = default_window(coherent_ket({0.0, 3.0}, cfg), cfg);
    EXPECT_NEAR(w.q_max - w.q_min, 18.0, 1e-10);
    EXPECT_NEAR(w.p_max - w.p_min, 18.0, 1e-10);
    EXPECT_NEAR(0.5 * (w.p_max + w.p_min), 3.0 * std::sqrt(2.0), 1e-10);
    const PhaseWindow v = default_window(coherent_ket(0.0, cfg), cfg);
    EXPECT_NEAR(v.q_max, 6.0, 1e-12);
}

TEST(Husimi, InvalidInputsThrow) {
    const FockConfig cfg{16, 1e-12, 4};
    const Ket vac = coherent_ket(0.0, cfg);
    EXPECT_THROW(husimi_grid(vac, {}, 1, cfg), std::invalid_argument);
    EXPECT_THROW(husimi_grid(vac, {1.0, 1.0, -1.0, 1.0}, 10, cfg), std::invalid_argument);
    EXPECT_THROW(husimi_grid(vac, {-INFINITY, 1.0, -1.0, 1.0}, 10, cfg), std::invalid_argument);
    EXPECT_THROW(husimi_grid(vac, {-1e3, 1e3, -1.0, 1.0}, 4, cfg), TruncationError);
    EXPECT_THROW(husimi_grid(coherent_ket(0.0, {20, 1e-12, 4}), {}, 4, cfg), DimensionMismatch);
}

TEST(Husimi, CsvLayoutIsPOuterQInner) {
    const FockConfig cfg{16, 1e-12, 4};
    const HusimiGrid g = husimi_grid(coherent_ket(0.0, cfg), {-1.0, 1.0, -2.0, 2.0}, 3, cfg);
    std::ostringstream out;
    write_husimi_csv(out, g);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "q,p,density");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 9u);
    EXPECT_EQ(rows[0].substr(0, 6), "-1,-2,");
    EXPECT_EQ(rows[1].substr(0, 5), "0,-2,");
    EXPECT_EQ(rows[3].substr(0, 5), "-1,0,");
    EXPECT_EQ(rows[4].substr(0, 4), "0,0,");
    EXPECT_EQ(out.str().find('\r'), std::string::npos);
    const double centre = std::stod(rows[4].substr(4));
    EXPECT_NEAR(centre, 1.0 / kPi, 1e-15);
}

}  // namespace
}  // namespace weakmeter
