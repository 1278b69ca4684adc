#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "weakmeter/fock.hpp"
#include "weakmeter/weak.hpp"

namespace weakmeter {

/// Monte-Carlo settings. Sample i of shard s draws from Philox4x32-10 block
/// counter (i_lo, i_hi, s, stream) under key (seed_lo, seed_hi): words 0-1 give
/// the post-selection uniform, words 2-3 the pointer uniform. Shard s owns the
/// s-th slice of the balanced split of [0, n_samples).
struct SamplerConfig {
    std::uint64_t seed = 0;
    std::uint64_t n_samples = 1;
    std::uint32_t shards = 1;
    std::uint32_t stream = 0;  // separates ensembles sharing one seed

    void validate() const;
};

struct EnsembleReport {
    std::uint64_t attempted = 0;
    std::uint64_t accepted = 0;
    double acceptance_rate = 0.0;
    double acceptance_stderr = 0.0;  // sqrt(r(1−r)/attempted)
    double post_prob = 0.0;          // exact post-selection probability
    double mean_M_initial = 0.0;     // analytic <M> in the initial meter
    double mean_M_final = 0.0;       // accepted-sample mean
    double est_shift = 0.0;
    double std_error = 0.0;          // sample stddev / sqrt(accepted)
    double analytic_shift = 0.0;     // first-order prediction
    double exact_shift = 0.0;        // exact post-selected expectation shift
    std::optional<double> z_score;   // (est − analytic)/stderr; empty when stderr = 0
    std::optional<double> z_score_exact;
};

/// Eigen-decomposition of a Hermitian readout; eigenvalues ascending.
struct PointerBasis {
    Eigen::VectorXd values;
    Matrix vectors;

    /// Born probabilities |<m_k|psi>|² / <psi|psi>.
    std::vector<double> probabilities(const Ket& psi) const;
};

/// Throws NotHermitian.
PointerBasis pointer_basis(const Operator& readout, const FockConfig& cfg);

/// Worker count: WEAKMETER_THREADS when set and positive, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_threads();

/// Simulates the protocol sample by sample: accept with the exact
/// post-selection probability, then read a pointer eigenvalue from the
/// normalized post-selected meter. When `samples` is non-null the accepted
/// eigenvalues are appended in shard order.
/// Throws NoAcceptedSamples, NotHermitian, and whatever the exact evolution throws.
EnsembleReport run_ensemble(const ShiftExperiment& experiment, double epsilon,
                            const SamplerConfig& sampler, std::vector<double>* samples = nullptr);

struct StderrScaling {
    std::vector<double> stderrs;
    double slope = 0.0;
};

/// Runs the ensemble at each n (other sampler fields fixed) and fits
/// log(stderr) against log(n); central-limit behaviour gives −1/2.
/// Throws DegenerateFit for fewer than three n, a span under two decades, or a
/// vanishing stderr.
StderrScaling stderr_scaling(const ShiftExperiment& experiment, double epsilon,
                             const SamplerConfig& base, std::span<const std::uint64_t> n_list);

}  // namespace weakmeter
