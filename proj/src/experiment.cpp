#include "weakmeter/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "weakmeter/errors.hpp"

namespace weakmeter {

namespace {

constexpr double kUnitNormTol = 1e-9;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw SpecError(where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        fail(where, std::string("missing required field '") + key + "'");
    }
    return obj.at(key);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            fail(where, "unknown field '" + key + "'");
        }
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) {
        fail(where, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        fail(where, "number must be finite");
    }
    return d;
}

std::size_t count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        fail(where, "expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

Complex complex_value(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) {
        fail(where, "complex numbers are encoded as [re, im]");
    }
    return {number(v[0], where + "[0]"), number(v[1], where + "[1]")};
}

std::vector<Complex> complex_array(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) {
        fail(where, "expected a non-empty array of [re, im] pairs");
    }
    std::vector<Complex> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(complex_value(v[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Matrix complex_matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) {
        fail(where, "expected a square matrix as an array of rows");
    }
    const auto n = static_cast<Eigen::Index>(v.size());
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::string row_where = where + "[" + std::to_string(r) + "]";
        const auto row = complex_array(v[static_cast<std::size_t>(r)], row_where);
        if (static_cast<Eigen::Index>(row.size()) != n) {
            fail(row_where, "matrix must be square");
        }
        for (Eigen::Index c = 0; c < n; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)];
        }
    }
    return m;
}

Vector to_vector(const std::vector<Complex>& v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = v[i];
    }
    return out;
}

Ket unit_ket(const json& v, std::size_t dim, const std::string& where) {
    Vector amps = to_vector(complex_array(v, where));
    if (static_cast<std::size_t>(amps.size()) != dim) {
        fail(where, "expected " + std::to_string(dim) + " amplitudes");
    }
    const double norm = amps.norm();
    if (std::abs(norm - 1.0) > kUnitNormTol) {
        fail(where, "state must have unit norm (got " + std::to_string(norm) + ")");
    }
    return Ket(amps / norm, Basis::system);
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

bool hermitian(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() < kHermitianTol;
}

SystemSpec parse_system(const json& s) {
    const std::string where = "system";
    if (!s.is_object()) {
        fail(where, "expected an object");
    }
    reject_unknown(s, {"dim", "observable", "alpha", "beta", "overlap_floor"}, where);
    const std::size_t dim = count(require(s, "dim", where), where + ".dim");
    if (dim == 0) {
        fail(where + ".dim", "must be positive");
    }
    Matrix o = complex_matrix(require(s, "observable", where), where + ".observable");
    if (static_cast<std::size_t>(o.rows()) != dim) {
        fail(where + ".observable", "must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    if (!hermitian(o)) {
        fail(where + ".observable", "must be Hermitian");
    }
    SystemSpec sys{Operator(std::move(o)), unit_ket(require(s, "alpha", where), dim, where + ".alpha"),
                   unit_ket(require(s, "beta", where), dim, where + ".beta")};
    if (s.contains("overlap_floor")) {
        sys.overlap_floor = number(s["overlap_floor"], where + ".overlap_floor");
        if (sys.overlap_floor < 0.0) {
            fail(where + ".overlap_floor", "must be non-negative");
        }
    }
    return sys;
}

MeterSpec parse_meter(const json& m) {
    const std::string where = "meter";
    if (!m.is_object()) {
        fail(where, "expected an object");
    }
    reject_unknown(m, {"kind", "z", "n", "amplitudes"}, where);
    const json& kind = require(m, "kind", where);
    if (!kind.is_string()) {
        fail(where + ".kind", "expected a string");
    }
    MeterSpec out;
    const std::string k = kind.get<std::string>();
    if (k == "coherent") {
        out.kind = MeterSpec::Kind::coherent;
        out.z = complex_value(require(m, "z", where), where + ".z");
    } else if (k == "fock") {
        out.kind = MeterSpec::Kind::fock;
        out.n = count(require(m, "n", where), where + ".n");
    } else if (k == "custom") {
        out.kind = MeterSpec::Kind::custom;
        out.amplitudes = complex_array(require(m, "amplitudes", where), where + ".amplitudes");
        const double norm = to_vector(out.amplitudes).norm();
        if (std::abs(norm - 1.0) > kUnitNormTol) {
            fail(where + ".amplitudes", "meter state must have unit norm");
        }
    } else {
        fail(where + ".kind", "must be one of coherent, fock, custom");
    }
    return out;
}

}  // namespace

ExperimentSpec parse_experiment(const json& doc) {
    if (!doc.is_object()) {
        throw SpecError("experiment: top level must be an object");
    }
    reject_unknown(doc, {"system", "meter", "coupling", "readout", "fock", "sampler", "name"},
                   "experiment");
    ExperimentSpec spec;
    spec.source = doc;
    spec.system = parse_system(require(doc, "system", "experiment"));
    spec.meter = parse_meter(require(doc, "meter", "experiment"));

    const json& c = require(doc, "coupling", "experiment");
    reject_unknown(c, {"epsilon", "epsilon_list", "generator", "matrix", "lambda_strong"}, "coupling");
    const bool has_eps = c.contains("epsilon");
    const bool has_list = c.contains("epsilon_list");
    const bool has_lambda = c.contains("lambda_strong");
    if (static_cast<int>(has_eps) + static_cast<int>(has_list) + static_cast<int>(has_lambda) != 1) {
        fail("coupling", "exactly one of epsilon, epsilon_list, lambda_strong is required");
    }
    if (has_eps) {
        spec.epsilons.push_back(number(c["epsilon"], "coupling.epsilon"));
    } else if (has_list) {
        const json& list = c["epsilon_list"];
        if (!list.is_array() || list.empty()) {
            fail("coupling.epsilon_list", "expected a non-empty array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            spec.epsilons.push_back(number(list[i], "coupling.epsilon_list[" + std::to_string(i) + "]"));
        }
        spec.epsilon_list = true;
    } else {
        spec.lambda_strong = number(c["lambda_strong"], "coupling.lambda_strong");
    }
    for (const double e : spec.epsilons) {
        if (e < 0.0) {
            fail("coupling", "epsilon must be non-negative");
        }
    }
    const json& gen = require(c, "generator", "coupling");
    if (!gen.is_string()) {
        fail("coupling.generator", "expected a string");
    }
    spec.generator.label = upper(gen.get<std::string>());
    if (spec.generator.label == "CUSTOM") {
        Matrix m = complex_matrix(require(c, "matrix", "coupling"), "coupling.matrix");
        if (!hermitian(m)) {
            fail("coupling.matrix", "custom generator must be Hermitian");
        }
        spec.generator.custom = std::move(m);
    } else {
        try {
            parse_generator(spec.generator.label);
        } catch (const std::invalid_argument&) {
            fail("coupling.generator", "must be one of Q, P, N, H0, G, K, custom");
        }
        if (c.contains("matrix")) {
            fail("coupling.matrix", "only allowed with generator 'custom'");
        }
    }
    if (spec.lambda_strong && spec.generator.label != "P") {
        fail("coupling.generator", "strong (ideal) measurement translates the pointer with P");
    }

    const json& r = require(doc, "readout", "experiment");
    reject_unknown(r, {"M", "matrix"}, "readout");
    const json& label = require(r, "M", "readout");
    if (!label.is_string()) {
        fail("readout.M", "expected a string");
    }
    spec.readout.label = upper(label.get<std::string>());
    static const char* kReadouts[] = {"Q", "P", "N", "A", "H0", "G", "K", "CUSTOM"};
    if (std::none_of(std::begin(kReadouts), std::end(kReadouts),
                     [&](const char* k) { return spec.readout.label == k; })) {
        fail("readout.M", "must be one of Q, P, N, A, H0, G, K, custom");
    }
    if (spec.readout.label == "CUSTOM") {
        spec.readout.custom = complex_matrix(require(r, "matrix", "readout"), "readout.matrix");
    } else if (r.contains("matrix")) {
        fail("readout.matrix", "only allowed with M 'custom'");
    }

    if (doc.contains("fock")) {
        const json& f = doc["fock"];
        reject_unknown(f, {"dimension", "truncation_tol", "interior_buffer"}, "fock");
        if (f.contains("dimension")) {
            spec.fock.dimension = count(f["dimension"], "fock.dimension");
        }
        if (f.contains("truncation_tol")) {
            spec.fock.truncation_tol = number(f["truncation_tol"], "fock.truncation_tol");
            if (!(spec.fock.truncation_tol > 0.0)) {
                fail("fock.truncation_tol", "must be positive");
            }
        }
        if (f.contains("interior_buffer")) {
            spec.fock.interior_buffer = count(f["interior_buffer"], "fock.interior_buffer");
        }
    }
    const bool needs_dim = spec.generator.custom || spec.readout.custom;
    if (needs_dim) {
        if (!spec.fock.dimension) {
            fail("fock.dimension", "required when a custom matrix acts on the meter");
        }
        const auto d = static_cast<Eigen::Index>(*spec.fock.dimension);
        if ((spec.generator.custom && spec.generator.custom->rows() != d) ||
            (spec.readout.custom && spec.readout.custom->rows() != d)) {
            fail("fock.dimension", "custom meter matrices must match the Fock dimension");
        }
    }
    if (spec.fock.dimension) {
        const std::size_t d = *spec.fock.dimension;
        const std::size_t b = spec.fock.interior_buffer.value_or(0);
        if (d < 2 || b >= d) {
            fail("fock", "need dimension >= 2 and interior_buffer < dimension");
        }
    }

    if (doc.contains("sampler")) {
        const json& s = doc["sampler"];
        reject_unknown(s, {"seed", "n_samples", "shards"}, "sampler");
        SamplerConfig sc;
        const json& seed = require(s, "seed", "sampler");
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
            fail("sampler.seed", "expected a non-negative integer");
        }
        sc.seed = seed.get<std::uint64_t>();
        sc.n_samples = count(require(s, "n_samples", "sampler"), "sampler.n_samples");
        if (s.contains("shards")) {
            sc.shards = static_cast<std::uint32_t>(count(s["shards"], "sampler.shards"));
        }
        try {
            sc.validate();
        } catch (const std::invalid_argument& e) {
            fail("sampler", e.what());
        }
        spec.sampler = sc;
    }
    return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SpecError("cannot open experiment file '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SpecError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_experiment(doc);
}

FockConfig resolve_fock(const ExperimentSpec& spec) {
    // Effective amplitude: meter amplitude grown by the largest coupling push.
    double z = 0.0;
    switch (spec.meter.kind) {
        case MeterSpec::Kind::coherent: z = std::abs(spec.meter.z); break;
        case MeterSpec::Kind::fock: z = std::sqrt(static_cast<double>(spec.meter.n)); break;
        case MeterSpec::Kind::custom:
            z = std::sqrt(static_cast<double>(spec.meter.amplitudes.size()));
            break;
    }
    const double o_max = spec.system.observable.is_hermitian()
                             ? HermitianSpectrum(spec.system.observable).eigenvalues().cwiseAbs().maxCoeff()
                             : 0.0;
    double s_max = spec.lambda_strong ? std::abs(*spec.lambda_strong) : 0.0;
    for (const double e : spec.epsilons) {
        s_max = std::max(s_max, e);
    }
    const double push = s_max * o_max;
    const std::string& g = spec.generator.label;
    if (g != "N" && g != "H0") {
        z = z * std::exp(push) + push;
    }

    FockConfig cfg = FockConfig::automatic(z, spec.fock.truncation_tol);
    if (spec.fock.interior_buffer) {
        cfg.interior_buffer = *spec.fock.interior_buffer;
    }
    if (spec.fock.dimension) {
        cfg.dimension = *spec.fock.dimension;
        if (!spec.fock.interior_buffer) {
            cfg.interior_buffer = std::min(cfg.interior_buffer, cfg.dimension / 4);
        }
    }
    cfg.validate();
    return cfg;
}

Ket build_meter(const ExperimentSpec& spec, const FockConfig& cfg) {
    const auto d = static_cast<Eigen::Index>(cfg.dimension);
    switch (spec.meter.kind) {
        case MeterSpec::Kind::coherent:
            return coherent_ket(spec.meter.z, cfg);
        case MeterSpec::Kind::fock:
            if (spec.meter.n >= cfg.interior()) {
                throw TruncationError("Fock meter |" + std::to_string(spec.meter.n) +
                                      "> does not fit below the interior buffer");
            }
            return Ket::basis_state(cfg.dimension, spec.meter.n, Basis::fock);
        case MeterSpec::Kind::custom: {
            if (spec.meter.amplitudes.size() > cfg.interior()) {
                throw TruncationError("custom meter has more amplitudes than interior levels");
            }
            Vector v = Vector::Zero(d);
            for (std::size_t i = 0; i < spec.meter.amplitudes.size(); ++i) {
                v(static_cast<Eigen::Index>(i)) = spec.meter.amplitudes[i];
            }
            return Ket(v / v.norm(), Basis::fock);
        }
    }
    throw std::logic_error("unhandled meter kind");
}

Operator build_readout(const ExperimentSpec& spec, const FockConfig& cfg) {
    const std::string& label = spec.readout.label;
    if (spec.readout.custom) {
        return Operator(*spec.readout.custom);
    }
    if (label == "A") {
        return ladder_operators(cfg).a;
    }
    return generator(parse_generator(label), cfg);
}

GeneratorKind build_generator(const ExperimentSpec& spec) {
    if (spec.generator.custom) {
        return Operator(*spec.generator.custom);
    }
    return parse_generator(spec.generator.label);
}

ShiftExperiment build_shift_experiment(const ExperimentSpec& spec, const FockConfig& cfg) {
    return {spec.system, build_meter(spec, cfg), build_generator(spec), build_readout(spec, cfg),
            spec.readout.label, cfg};
}

json to_json(Complex c) { return json::array({c.real(), c.imag()}); }

json to_json(const FockConfig& cfg) {
    return {{"dimension", cfg.dimension},
            {"truncation_tol", cfg.truncation_tol},
            {"interior_buffer", cfg.interior_buffer}};
}

json to_json(const ShiftReport& r) {
    return {{"readout", r.readout},         {"epsilon", r.epsilon},
            {"exact_shift", to_json(r.exact_shift)}, {"first_order", to_json(r.first_order)},
            {"residual", r.residual},       {"post_prob", r.post_prob}};
}

json to_json(const AlgebraReport& r) {
    return {{"relation", r.relation_name}, {"residual", r.residual}, {"pass", r.pass}};
}

json to_json(const EnsembleReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"attempted", r.attempted},
            {"accepted", r.accepted},
            {"acceptance_rate", r.acceptance_rate},
            {"acceptance_stderr", r.acceptance_stderr},
            {"post_prob", r.post_prob},
            {"mean_M_initial", r.mean_M_initial},
            {"mean_M_final", r.mean_M_final},
            {"est_shift", r.est_shift},
            {"stderr", r.std_error},
            {"analytic_shift", r.analytic_shift},
            {"exact_shift", r.exact_shift},
            {"z_score", opt(r.z_score)},
            {"z_score_exact", opt(r.z_score_exact)}};
}

json to_json(const MeasurementBranch& b, const FockConfig& cfg, double initial_q) {
    const double q = expectation(canonical_operators(cfg).Q, b.meter).real();
    return {{"eigenvalue", b.eigenvalue},
            {"probability", b.probability},
            {"mean_Q", q},
            {"Q_shift", q - initial_q}};
}

}  // namespace weakmeter
