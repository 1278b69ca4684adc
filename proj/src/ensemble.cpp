#include "weakmeter/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

#include "weakmeter/errors.hpp"
#include "weakmeter/fit.hpp"
#include "weakmeter/philox.hpp"

namespace weakmeter {

namespace {

// Running mean and sum of squared deviations (Welford), mergeable with Chan's
// pairwise update.
struct Moments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const Moments& other) {
        if (other.count == 0) {
            return;
        }
        if (count == 0) {
            *this = other;
            return;
        }
        const auto na = static_cast<double>(count);
        const auto nb = static_cast<double>(other.count);
        const double n = na + nb;
        const double delta = other.mean - mean;
        mean += delta * nb / n;
        m2 += other.m2 + delta * delta * na * nb / n;
        count += other.count;
    }
};

struct ShardResult {
    std::uint64_t attempted = 0;
    Moments moments;
    std::vector<double> samples;
};

struct ShardInput {
    const std::vector<double>* cdf;
    const Eigen::VectorXd* values;
    double accept_prob;
    Philox4x32::Key key;
    std::uint32_t stream;
    bool keep_samples;
};

ShardResult run_shard(const ShardInput& in, std::uint32_t shard, std::uint64_t begin,
                      std::uint64_t count) {
    ShardResult out;
    out.attempted = count;
    const auto& cdf = *in.cdf;
    for (std::uint64_t i = begin; i < begin + count; ++i) {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(i),
                                      static_cast<std::uint32_t>(i >> 32), shard, in.stream};
        const auto words = Philox4x32::block(ctr, in.key);
        const double u_accept = Philox4x32::to_unit(words[0], words[1]);
        if (!(u_accept < in.accept_prob)) {
            continue;
        }
        const double u_pointer = Philox4x32::to_unit(words[2], words[3]);
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u_pointer);
        if (it == cdf.end()) {
            --it;
        }
        const double value = (*in.values)(static_cast<Eigen::Index>(it - cdf.begin()));
        out.moments.push(value);
        if (in.keep_samples) {
            out.samples.push_back(value);
        }
    }
    return out;
}

}  // namespace

void SamplerConfig::validate() const {
    if (n_samples == 0) {
        throw std::invalid_argument("n_samples must be positive");
    }
    if (shards == 0) {
        throw std::invalid_argument("shards must be positive");
    }
}

std::vector<double> PointerBasis::probabilities(const Ket& psi) const {
    if (psi.dim() != static_cast<std::size_t>(vectors.rows())) {
        throw DimensionMismatch("ket does not match the pointer basis");
    }
    const double n2 = psi.squared_norm();
    if (n2 <= kZeroNormSquared) {
        throw ZeroNorm("pointer distribution of a zero-norm state");
    }
    const Vector c = vectors.adjoint() * psi.amplitudes();
    std::vector<double> p(static_cast<std::size_t>(c.size()));
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        p[static_cast<std::size_t>(k)] = std::norm(c(k)) / n2;
    }
    return p;
}

PointerBasis pointer_basis(const Operator& readout, const FockConfig& cfg) {
    if (!readout.is_hermitian()) {
        throw NotHermitian("pointer readout must be Hermitian");
    }
    if (readout.dim() != cfg.dimension) {
        throw DimensionMismatch("readout does not match the Fock space");
    }
    const HermitianSpectrum spec(readout);
    return {spec.eigenvalues(), spec.eigenvectors()};
}

unsigned worker_threads() {
    if (const char* env = std::getenv("WEAKMETER_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

EnsembleReport run_ensemble(const ShiftExperiment& experiment, double epsilon,
                            const SamplerConfig& sampler, std::vector<double>* samples) {
    sampler.validate();
    const FockConfig& cfg = experiment.cfg;
    const PointerBasis basis = pointer_basis(experiment.readout, cfg);
    const CouplingSpec coupling{epsilon, experiment.generator, std::nullopt};
    const Ket final_meter =
        couple_and_postselect(experiment.system, experiment.meter, coupling, cfg);

    EnsembleReport report;
    report.post_prob = final_meter.squared_norm();
    report.mean_M_initial = expectation(experiment.readout, experiment.meter).real();
    const Complex ow = weak_value(experiment.system);
    report.analytic_shift =
        first_order_shift(experiment.readout, generator(experiment.generator, cfg), ow,
                          experiment.meter, epsilon)
            .real();
    report.exact_shift =
        (epsilon == 0.0 || report.post_prob <= kZeroNormSquared)
            ? 0.0
            : expectation(experiment.readout, final_meter).real() - report.mean_M_initial;

    std::vector<double> cdf;
    if (report.post_prob > kZeroNormSquared) {
        const std::vector<double> p = basis.probabilities(final_meter);
        cdf.resize(p.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            acc += p[k];
            cdf[k] = acc;
        }
        for (double& c : cdf) {
            c /= acc;
        }
    } else {
        cdf.assign(basis.values.size(), 1.0);
    }

    const ShardInput input{&cdf, &basis.values, report.post_prob,
                           Philox4x32::key_from_seed(sampler.seed), sampler.stream,
                           samples != nullptr};
    const std::uint32_t shards = sampler.shards;
    const std::uint64_t per = sampler.n_samples / shards;
    const std::uint64_t extra = sampler.n_samples % shards;
    std::vector<ShardResult> results(shards);
    auto shard_range = [&](std::uint32_t s) {
        const std::uint64_t begin = s * per + std::min<std::uint64_t>(s, extra);
        const std::uint64_t count = per + (s < extra ? 1 : 0);
        return std::pair{begin, count};
    };

    const unsigned workers = std::min<unsigned>(worker_threads(), shards);
    if (workers <= 1) {
        for (std::uint32_t s = 0; s < shards; ++s) {
            const auto [begin, count] = shard_range(s);
            results[s] = run_shard(input, s, begin, count);
        }
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::uint32_t s = w; s < shards; s += workers) {
                    const auto [begin, count] = shard_range(s);
                    results[s] = run_shard(input, s, begin, count);
                }
            });
        }
    }

    Moments total;
    for (auto& r : results) {
        report.attempted += r.attempted;
        total.merge(r.moments);
        if (samples) {
            samples->insert(samples->end(), r.samples.begin(), r.samples.end());
        }
    }
    report.accepted = total.count;
    if (report.accepted == 0) {
        throw NoAcceptedSamples("no sample passed post-selection out of " +
                                std::to_string(report.attempted));
    }
    const auto attempted = static_cast<double>(report.attempted);
    const auto accepted = static_cast<double>(report.accepted);
    report.acceptance_rate = accepted / attempted;
    report.acceptance_stderr =
        std::sqrt(report.acceptance_rate * (1.0 - report.acceptance_rate) / attempted);
    report.mean_M_final = total.mean;
    report.est_shift = report.mean_M_final - report.mean_M_initial;
    const double sample_var = report.accepted > 1 ? total.m2 / (accepted - 1.0) : 0.0;
    report.std_error = std::sqrt(std::max(0.0, sample_var) / accepted);
    if (report.std_error > 0.0) {
        report.z_score = (report.est_shift - report.analytic_shift) / report.std_error;
        report.z_score_exact = (report.est_shift - report.exact_shift) / report.std_error;
    }
    return report;
}

StderrScaling stderr_scaling(const ShiftExperiment& experiment, double epsilon,
                             const SamplerConfig& base, std::span<const std::uint64_t> n_list) {
    if (n_list.size() < 3) {
        throw DegenerateFit("stderr scaling needs at least three sample sizes");
    }
    const auto [lo, hi] = std::minmax_element(n_list.begin(), n_list.end());
    if (*lo == 0 || static_cast<double>(*hi) < 100.0 * static_cast<double>(*lo)) {
        throw DegenerateFit("sample sizes must span at least two decades");
    }
    StderrScaling out;
    std::vector<double> ns;
    for (const std::uint64_t n : n_list) {
        SamplerConfig cfg = base;
        cfg.n_samples = n;
        const EnsembleReport r = run_ensemble(experiment, epsilon, cfg);
        if (!(r.std_error > 0.0)) {
            throw DegenerateFit("standard error vanishes at n = " + std::to_string(n) +
                                " (deterministic readout)");
        }
        out.stderrs.push_back(r.std_error);
        ns.push_back(static_cast<double>(n));
    }
    out.slope = loglog_slope(ns, out.stderrs);
    return out;
}

}  // namespace weakmeter
