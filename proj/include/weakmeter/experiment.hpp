#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weakmeter/ensemble.hpp"
#include "weakmeter/fock.hpp"
#include "weakmeter/symplectic.hpp"
#include "weakmeter/weak.hpp"

namespace weakmeter {

using json = nlohmann::json;

inline constexpr const char* kToolName = "weakmeter";
inline constexpr const char* kToolVersion = "1.0.0";

struct MeterSpec {
    enum class Kind { coherent, fock, custom };
    Kind kind = Kind::coherent;
    Complex z;
    std::size_t n = 0;
    std::vector<Complex> amplitudes;
};

/// Readout observable on the meter: a standard operator by label or a custom
/// matrix. "A" is the annihilation operator a (non-Hermitian).
struct ReadoutSpec {
    std::string label;
    std::optional<Matrix> custom;
};

struct GeneratorSpec {
    std::string label;
    std::optional<Matrix> custom;
};

struct FockSettings {
    std::optional<std::size_t> dimension;
    double truncation_tol = 1e-12;
    std::optional<std::size_t> interior_buffer;
};

/// Parsed and validated experiment file. Complex numbers are [re, im] pairs;
/// matrices are arrays of rows.
struct ExperimentSpec {
    json source;
    SystemSpec system;
    MeterSpec meter;
    std::vector<double> epsilons;
    bool epsilon_list = false;
    GeneratorSpec generator;
    std::optional<double> lambda_strong;
    ReadoutSpec readout;
    FockSettings fock;
    std::optional<SamplerConfig> sampler;
};

/// Throws SpecError with a path-qualified message on any schema violation,
/// including non-Hermitian observables and non-unit selection states.
ExperimentSpec parse_experiment(const json& doc);
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// Applies the automatic truncation rule for any setting left unspecified.
FockConfig resolve_fock(const ExperimentSpec& spec);

Ket build_meter(const ExperimentSpec& spec, const FockConfig& cfg);
Operator build_readout(const ExperimentSpec& spec, const FockConfig& cfg);
GeneratorKind build_generator(const ExperimentSpec& spec);

/// Resolves the whole experiment against cfg.
ShiftExperiment build_shift_experiment(const ExperimentSpec& spec, const FockConfig& cfg);

json to_json(Complex c);
json to_json(const FockConfig& cfg);
json to_json(const ShiftReport& r);
json to_json(const AlgebraReport& r);
json to_json(const EnsembleReport& r);
json to_json(const MeasurementBranch& b, const FockConfig& cfg, double initial_q);

}  // namespace weakmeter
