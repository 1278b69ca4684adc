#include "weakmeter/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "weakmeter/errors.hpp"
#include "weakmeter/experiment.hpp"
#include "weakmeter/husimi.hpp"

namespace weakmeter {

namespace {

using Clock = std::chrono::steady_clock;

json tool_block() { return {{"name", kToolName}, {"version", kToolVersion}}; }

void emit(const json& report, const std::string& path, std::ostream& out) {
    const std::string text = report.dump(2) + "\n";
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw SpecError("cannot write '" + path + "'");
    }
    file << text;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

json base_report(const char* command, const ExperimentSpec& spec, const FockConfig& cfg) {
    return {{"tool", tool_block()},
            {"command", command},
            {"spec", spec.source},
            {"fock", to_json(cfg)}};
}

void add_selection(json& report, const SystemSpec& sys) {
    report["selection_overlap"] = to_json(selection_overlap(sys));
    report["weak_value"] = to_json(weak_value(sys));
    report["near_orthogonal"] = near_orthogonal(sys);
}

int cmd_verify_algebra(std::size_t dim, std::optional<std::size_t> buffer, const std::string& out_path,
                       std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    FockConfig cfg{dim, 1e-12, buffer.value_or(std::min<std::size_t>(8, dim / 4))};
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        err << "verify-algebra: " << e.what() << "\n";
        return kExitBadInput;
    }
    auto reports = verify_sl2(cfg);
    const auto fourier = verify_fourier(cfg);
    reports.insert(reports.end(), fourier.begin(), fourier.end());

    bool all_pass = true;
    json list = json::array();
    for (const auto& r : reports) {
        list.push_back(to_json(r));
        all_pass = all_pass && r.pass;
    }
    json report = {{"tool", tool_block()},
                   {"command", "verify-algebra"},
                   {"fock", to_json(cfg)},
                   {"algebra", list},
                   {"pass", all_pass},
                   {"wall_time_s", seconds_since(start)}};
    emit(report, out_path, out);
    return all_pass ? kExitOk : kExitAlgebraFailure;
}

int cmd_run(const std::string& spec_path, const std::string& out_path, bool with_algebra,
            std::ostream& out) {
    const auto start = Clock::now();
    const ExperimentSpec spec = load_experiment(spec_path);
    const FockConfig cfg = resolve_fock(spec);
    const ShiftExperiment ex = build_shift_experiment(spec, cfg);
    json report = base_report("run", spec, cfg);

    if (spec.lambda_strong) {
        report["mode"] = "strong";
        const double q0 = expectation(canonical_operators(cfg).Q, ex.meter).real();
        json branches = json::array();
        for (const auto& b : ideal_measurement(ex.system.observable, ex.system.alpha, ex.meter,
                                               *spec.lambda_strong, cfg)) {
            branches.push_back(to_json(b, cfg, q0));
        }
        report["branches"] = branches;
    } else {
        report["mode"] = "weak";
        add_selection(report, ex.system);
        json shifts = json::array();
        std::vector<ShiftReport> reports;
        for (const double eps : spec.epsilons) {
            const CouplingSpec coupling{eps, ex.generator, std::nullopt};
            reports.push_back(
                exact_shift(ex.readout, ex.readout_label, ex.system, ex.meter, coupling, cfg));
            shifts.push_back(to_json(reports.back()));
        }
        report["shifts"] = shifts;
        if (spec.epsilon_list) {
            json scan = {{"slope", nullptr}};
            try {
                const double floor =
                    kResidualFloor * (1.0 + std::abs(expectation(ex.readout, ex.meter)));
                scan["slope"] = residual_slope(reports, floor);
                scan["status"] = "ok";
            } catch (const DegenerateFit& e) {
                scan["status"] = "degenerate";
                scan["message"] = e.what();
            }
            report["residual_scan"] = scan;
        }
    }
    if (with_algebra) {
        json list = json::array();
        for (const auto& r : verify_sl2(cfg)) {
            list.push_back(to_json(r));
        }
        report["algebra"] = list;
    }
    report["wall_time_s"] = seconds_since(start);
    emit(report, out_path, out);
    return kExitOk;
}

int cmd_ensemble(const std::string& spec_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed, std::optional<std::uint64_t> samples,
                 const std::string& dump_path, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    const ExperimentSpec spec = load_experiment(spec_path);
    if (!spec.sampler) {
        err << "ensemble: experiment has no sampler block\n";
        return kExitBadInput;
    }
    if (spec.lambda_strong || spec.epsilons.size() != 1) {
        err << "ensemble: needs a single weak coupling 'epsilon'\n";
        return kExitBadInput;
    }
    SamplerConfig sampler = *spec.sampler;
    if (seed) sampler.seed = *seed;
    if (samples) sampler.n_samples = *samples;
    sampler.validate();

    const FockConfig cfg = resolve_fock(spec);
    ShiftExperiment ex = build_shift_experiment(spec, cfg);
    json report = base_report("ensemble", spec, cfg);
    add_selection(report, ex.system);
    report["sampler"] = {{"seed", sampler.seed},
                         {"n_samples", sampler.n_samples},
                         {"shards", sampler.shards},
                         {"generator", "philox4x32-10"}};

    // Non-Hermitian readouts run as two ensembles on their Hermitian parts.
    std::vector<std::pair<std::string, Operator>> parts;
    if (ex.readout.is_hermitian()) {
        parts.emplace_back(ex.readout_label, ex.readout);
    } else {
        auto [c, d] = ex.readout.hermitian_split();
        parts.emplace_back(ex.readout_label + ".C", std::move(c));
        parts.emplace_back(ex.readout_label + ".D", std::move(d));
    }
    std::vector<double> dumped;
    json list = json::array();
    for (std::size_t k = 0; k < parts.size(); ++k) {
        ex.readout = parts[k].second;
        SamplerConfig part_sampler = sampler;
        part_sampler.stream = static_cast<std::uint32_t>(k);
        const EnsembleReport r = run_ensemble(ex, spec.epsilons.front(), part_sampler,
                                              dump_path.empty() ? nullptr : &dumped);
        json entry = to_json(r);
        entry["part"] = parts[k].first;
        entry["epsilon"] = spec.epsilons.front();
        list.push_back(entry);
    }
    report["ensemble"] = list;
    if (!dump_path.empty()) {
        std::ofstream file(dump_path, std::ios::binary);
        if (!file) {
            throw SpecError("cannot write '" + dump_path + "'");
        }
        for (const double v : dumped) {
            file << json(v).dump() << '\n';
        }
    }
    report["wall_time_s"] = seconds_since(start);
    emit(report, out_path, out);
    return kExitOk;
}

int cmd_husimi(const std::string& spec_path, const std::string& stage, const std::string& out_path,
               std::size_t resolution, std::ostream& out, std::ostream& err) {
    const ExperimentSpec spec = load_experiment(spec_path);
    if (spec.lambda_strong) {
        err << "husimi: needs a weak coupling experiment\n";
        return kExitBadInput;
    }
    const FockConfig cfg = resolve_fock(spec);
    const ShiftExperiment ex = build_shift_experiment(spec, cfg);
    const double eps = spec.epsilons.front();
    Ket state = ex.meter;
    if (stage == "final") {
        const CouplingSpec coupling{eps, ex.generator, std::nullopt};
        weak_value(ex.system);
        state = couple_and_postselect(ex.system, ex.meter, coupling, cfg).unit();
    }
    const PhaseWindow window = default_window(ex.meter, cfg);
    const HusimiGrid grid = husimi_grid(state, window, resolution, cfg);

    std::ofstream file(out_path, std::ios::binary);
    if (!file) {
        throw SpecError("cannot write '" + out_path + "'");
    }
    write_husimi_csv(file, grid);

    const auto [cq, cp] = grid.centroid();
    const auto ops = canonical_operators(cfg);
    json summary = {{"tool", tool_block()},
                    {"command", "husimi"},
                    {"stage", stage},
                    {"epsilon", stage == "final" ? eps : 0.0},
                    {"fock", to_json(cfg)},
                    {"q_axis", grid.q_axis},
                    {"p_axis", grid.p_axis},
                    {"normalization", grid.normalization},
                    {"centroid", {cq, cp}},
                    {"mean_QP", {expectation(ops.Q, state).real(), expectation(ops.P, state).real()}},
                    {"csv", out_path}};
    out << summary.dump() << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weak-measurement laboratory on a truncated Fock space", "weakmeter"};
    app.require_subcommand(1);

    std::string out_path;
    std::string spec_path;

    auto* algebra = app.add_subcommand("verify-algebra", "Check sl(2,R) and Fourier identities");
    std::size_t dim = 0;
    std::optional<std::size_t> buffer;
    algebra->add_option("--dim", dim, "Fock dimension")->required();
    algebra->add_option("--buffer", buffer, "interior buffer (default min(8, dim/4))");
    algebra->add_option("--out", out_path, "report path (stdout when absent)");

    auto* run = app.add_subcommand("run", "Exact vs first-order shifts for an experiment file");
    bool with_algebra = false;
    run->add_option("spec", spec_path, "experiment JSON")->required();
    run->add_option("--out", out_path, "report path (stdout when absent)");
    run->add_flag("--with-algebra", with_algebra, "attach sl(2,R) checks for the resolved space");

    auto* ensemble = app.add_subcommand("ensemble", "Monte-Carlo post-selected ensemble");
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> samples;
    std::string dump_path;
    ensemble->add_option("spec", spec_path, "experiment JSON")->required();
    ensemble->add_option("--out", out_path, "report path (stdout when absent)");
    ensemble->add_option("--seed", seed, "override sampler.seed");
    ensemble->add_option("--samples", samples, "override sampler.n_samples");
    ensemble->add_option("--dump-samples", dump_path, "write accepted pointer values, one per line");

    auto* husimi = app.add_subcommand("husimi", "Export a Husimi density grid as CSV");
    std::string stage;
    std::size_t resolution = 201;
    husimi->add_option("spec", spec_path, "experiment JSON")->required();
    husimi->add_option("--stage", stage, "initial or final")
        ->required()
        ->check(CLI::IsMember({"initial", "final"}));
    husimi->add_option("--out", out_path, "CSV path")->required();
    husimi->add_option("--resolution", resolution, "points per axis")->check(CLI::Range(2, 4001));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (algebra->parsed()) {
            return cmd_verify_algebra(dim, buffer, out_path, out, err);
        }
        if (run->parsed()) {
            return cmd_run(spec_path, out_path, with_algebra, out);
        }
        if (ensemble->parsed()) {
            return cmd_ensemble(spec_path, out_path, seed, samples, dump_path, out, err);
        }
        return cmd_husimi(spec_path, stage, out_path, resolution, out, err);
    } catch (const SpecError& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const TruncationError& e) {
        err << "truncation: " << e.what() << "\n";
        return kExitTruncation;
    } catch (const TruncationLeak& e) {
        err << "truncation leak: " << e.what() << "\n";
        return kExitTruncation;
    } catch (const OrthogonalSelection& e) {
        err << "selection: " << e.what() << "\n";
        return kExitSelection;
    } catch (const ZeroNorm& e) {
        err << "selection: " << e.what() << "\n";
        return kExitSelection;
    } catch (const NoAcceptedSamples& e) {
        err << "ensemble: " << e.what() << "\n";
        return kExitNoSamples;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
}

}  // namespace weakmeter
