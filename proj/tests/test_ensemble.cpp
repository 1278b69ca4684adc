#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>

#include "support.hpp"
#include "weakmeter/ensemble.hpp"
#include "weakmeter/errors.hpp"
#include "weakmeter/philox.hpp"

namespace weakmeter {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Philox, KnownAnswerZero) {
    constexpr auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
    const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                       {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPiDigits) {
    const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                       {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, UnitIntervalEndpoints) {
    EXPECT_EQ(Philox4x32::to_unit(0, 0), 0.0);
    EXPECT_LT(Philox4x32::to_unit(0xffffffffu, 0xffffffffu), 1.0);
    EXPECT_EQ(Philox4x32::to_unit(0, 0x80000000u), 0.5);
}

TEST(Philox, UniformMoments) {
    const auto key = Philox4x32::key_from_seed(99);
    double sum = 0.0, sum2 = 0.0;
    constexpr int n = 200000;
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto w = Philox4x32::block({i, 0, 0, 0}, key);
        const double u = Philox4x32::to_unit(w[0], w[1]);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sum2 / n - mean * mean, 1.0 / 12.0, 2e-3);
}

TEST(PointerBasisTest, NumberReadoutIsFockBasis) {
    const FockConfig cfg{12, 1e-12, 0};
    const PointerBasis pb = pointer_basis(canonical_operators(cfg).N, cfg);
    for (Eigen::Index k = 0; k < 12; ++k) {
        EXPECT_NEAR(pb.values(k), static_cast<double>(k), 1e-13);
        EXPECT_NEAR(std::abs(pb.vectors(k, k)), 1.0, 1e-13);
    }
}

TEST(PointerBasisTest, PositionNodesAreParitySymmetric) {
    const FockConfig cfg{16, 1e-12, 0};
    const PointerBasis pb = pointer_basis(canonical_operators(cfg).Q, cfg);
    ASSERT_EQ(pb.values.size(), 16);
    for (Eigen::Index k = 0; k < 16; ++k) {
        EXPECT_NEAR(pb.values(k), -pb.values(15 - k), 1e-12);
    }
}

TEST(PointerBasisTest, ProbabilitiesSumToOne) {
    std::mt19937_64 rng(43);
    const FockConfig cfg{20, 1e-12, 0};
    const PointerBasis pb = pointer_basis(canonical_operators(cfg).P, cfg);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = pb.probabilities(testing::random_ket(20, 20, rng));
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(PointerBasisTest, NonHermitianReadoutThrows) {
    const FockConfig cfg{8, 1e-12, 0};
    EXPECT_THROW(pointer_basis(ladder_operators(cfg).a, cfg), NotHermitian);
}

ShiftExperiment reference_experiment() {
    const FockConfig cfg = FockConfig::automatic(3.0);
    return {testing::rotated_selection(kPi / 3), coherent_ket({0.0, 3.0}, cfg), StandardGenerator::N,
            canonical_operators(cfg).Q, "Q", cfg};
}

TEST(Ensemble, NoCouplingNoSelectionAcceptsEverything) {
    ShiftExperiment ex = reference_experiment();
    ex.system.beta = ex.system.alpha;
    const EnsembleReport r = run_ensemble(ex, 0.0, {5, 20000, 4, 0});
    EXPECT_EQ(r.accepted, r.attempted);
    EXPECT_EQ(r.acceptance_rate, 1.0);
    EXPECT_LT(std::abs(r.est_shift), 3.0 * r.std_error);
    EXPECT_EQ(r.exact_shift, 0.0);
}

TEST(Ensemble, AcceptanceTracksPostSelectionProbability) {
    const EnsembleReport r = run_ensemble(reference_experiment(), 0.0, {8, 100000, 4, 0});
    EXPECT_NEAR(r.post_prob, 0.25, 1e-14);
    EXPECT_LT(std::abs(r.acceptance_rate - 0.25), 3.0 * r.acceptance_stderr);
}

TEST(Ensemble, ReproducibleAcrossThreadCounts) {
    const ShiftExperiment ex = reference_experiment();
    const SamplerConfig sampler{42, 50000, 8, 0};
    ::setenv("WEAKMETER_THREADS", "1", 1);
    std::vector<double> serial;
    const EnsembleReport a = run_ensemble(ex, 0.05, sampler, &serial);
    ::setenv("WEAKMETER_THREADS", "4", 1);
    std::vector<double> threaded;
    const EnsembleReport b = run_ensemble(ex, 0.05, sampler, &threaded);
    ::unsetenv("WEAKMETER_THREADS");
    EXPECT_EQ(a.accepted, b.accepted);
    EXPECT_EQ(a.mean_M_final, b.mean_M_final);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(serial, threaded);
    EXPECT_EQ(serial.size(), a.accepted);
}

TEST(Ensemble, SeedsAndStreamsDecorrelate) {
    const ShiftExperiment ex = reference_experiment();
    const EnsembleReport a = run_ensemble(ex, 0.05, {1, 20000, 1, 0});
    const EnsembleReport b = run_ensemble(ex, 0.05, {2, 20000, 1, 0});
    const EnsembleReport c = run_ensemble(ex, 0.05, {1, 20000, 1, 1});
    EXPECT_NE(a.mean_M_final, b.mean_M_final);
    EXPECT_NE(a.mean_M_final, c.mean_M_final);
}

TEST(Ensemble, UnbiasedAgainstExactShiftOverSeeds) {
    const ShiftExperiment ex = reference_experiment();
    double z_sum = 0.0;
    constexpr int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        const EnsembleReport r = run_ensemble(ex, 0.05, {static_cast<std::uint64_t>(s), 20000, 1, 0});
        ASSERT_TRUE(r.z_score_exact.has_value());
        z_sum += *r.z_score_exact;
    }
    // Mean of 100 unit-variance z-scores has standard deviation 0.1.
    EXPECT_LT(std::abs(z_sum / seeds), 0.4);
}

TEST(Ensemble, ExactShiftAgreesWithWeakModule) {
    const ShiftExperiment ex = reference_experiment();
    const EnsembleReport r = run_ensemble(ex, 0.05, {3, 1000, 1, 0});
    const ShiftReport s = exact_shift(ex.readout, ex.readout_label, ex.system, ex.meter,
                                      {0.05, ex.generator, std::nullopt}, ex.cfg);
    EXPECT_NEAR(r.exact_shift, s.exact_shift.real(), 1e-13);
    EXPECT_NEAR(r.post_prob, s.post_prob, 1e-15);
    EXPECT_NEAR(r.analytic_shift, 0.05 * std::sqrt(2.0) * 3.0 * std::tan(kPi / 3), 1e-12);
}

TEST(Ensemble, NearOrthogonalSelectionRejectsEverything) {
    ShiftExperiment ex = reference_experiment();
    ex.system.beta = testing::qubit(1e-7, 1.0);
    EXPECT_THROW(run_ensemble(ex, 1e-6, {7, 100, 1, 0}), NoAcceptedSamples);
}

TEST(Ensemble, InvalidSamplerThrows) {
    EXPECT_THROW(run_ensemble(reference_experiment(), 0.05, {1, 0, 1, 0}), std::invalid_argument);
    EXPECT_THROW(run_ensemble(reference_experiment(), 0.05, {1, 10, 0, 0}), std::invalid_argument);
}

TEST(StderrScalingTest, CentralLimitSlope) {
    const std::vector<std::uint64_t> ns{10000, 100000, 1000000};
    const StderrScaling s = stderr_scaling(reference_experiment(), 0.05, {42, 1, 8, 0}, ns);
    ASSERT_EQ(s.stderrs.size(), 3u);
    EXPECT_NEAR(s.slope, -0.5, 0.1);
}

TEST(StderrScalingTest, SingleSizeIsDegenerate) {
    const std::vector<std::uint64_t> one{10000};
    EXPECT_THROW(stderr_scaling(reference_experiment(), 0.05, {42, 1, 1, 0}, one), DegenerateFit);
}

TEST(StderrScalingTest, DeterministicReadoutHasZeroStderr) {
    const FockConfig cfg{16, 1e-12, 4};
    const Ket three = Ket::basis_state(16, 3, Basis::fock);
    const SystemSpec sys{testing::sigma_x(), testing::qubit(1.0, 0.0), testing::qubit(1.0, 0.0)};
    const ShiftExperiment ex{sys, three, StandardGenerator::P, canonical_operators(cfg).N, "N", cfg};
    for (const std::uint64_t n : {100u, 1000u, 10000u}) {
        const EnsembleReport r = run_ensemble(ex, 0.0, {1, n, 1, 0});
        EXPECT_EQ(r.std_error, 0.0);
        EXPECT_FALSE(r.z_score.has_value());
        EXPECT_NEAR(r.mean_M_final, 3.0, 1e-12);
    }
    const std::vector<std::uint64_t> ns{100, 1000, 10000};
    EXPECT_THROW(stderr_scaling(ex, 0.0, {1, 1, 1, 0}, ns), DegenerateFit);
}

}  // namespace
}  // namespace weakmeter
