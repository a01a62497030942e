#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "parity_cal/decision.hpp"
#include "parity_cal/io.hpp"
#include "parity_cal/metrics.hpp"
#include "parity_cal/schedule.hpp"
#include "parity_cal/synthetic.hpp"

namespace parity_cal::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kParse = 2, kUsage = 64 };

inline constexpr const char* kPresetEnv = "PARITY_CAL_PRESET";

/// Options shared by every subcommand.
struct RunConfig {
    std::string method = "ops";
    int uf = 1;
    int ws = 100;
    double gamma = OnsState::kDefaultGamma;
    double D = OnsState::kDefaultD;
    int n_bins = kDefaultParityBins;
    int n_levels = kDefaultQuantileLevels;
    std::uint64_t seed = 0;
    int horizon = 10000;
    std::string input;
    std::string output;
    std::string forecasts;
    std::string diagram;
    std::string quantile_diagram;
    std::string svg;
    std::string loss = "paper";
    bool prehoc = false;
};

namespace detail {

// Writes to the named file, or to the fallback stream when the name is
// empty or "-".
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(io::open_output(path));
            stream_ = file_.get();
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

inline std::vector<ParityRecord> load_records(const std::string& path) {
    if (path.empty()) throw ValidationError("--input is required");
    auto in = io::open_input(path);
    return io::read_records(in);
}

inline int run_synthetic(const RunConfig& cfg, std::ostream& out) {
    const auto stream = generate(cfg.horizon, cfg.seed);
    Sink sink(cfg.output, out);
    io::write_forecasts(sink.get(), io::synthetic_table(stream));
    return kOk;
}

inline int run_calibrate(RunConfig cfg, const CLI::App& sub, std::ostream& out) {
    if (cfg.input.empty()) throw ValidationError("--input is required");
    if (const char* preset_name = std::getenv(kPresetEnv); preset_name && *preset_name) {
        const auto preset = find_ops_preset(preset_name);
        if (!preset) throw ValidationError(std::string("unknown ") + kPresetEnv + " value '" + preset_name + "'");
        if (sub.count("--gamma") == 0) cfg.gamma = preset->gamma;
        if (sub.count("--cap-d") == 0) cfg.D = preset->D;
    }
    ScheduleConfig sched;
    sched.method = parse_method(cfg.method);
    sched.uf = cfg.uf;
    sched.ws = cfg.ws;
    sched.gamma = cfg.gamma;
    sched.D = cfg.D;
    sched.validate();

    const auto table = io::ingest(cfg.input);
    const auto stream = prehoc_stream(table.forecasts, table.y, table.t);
    const auto records = run_stream(sched, stream);
    Sink sink(cfg.output, out);
    io::write_records(sink.get(), records);
    return kOk;
}

inline int run_evaluate(const RunConfig& cfg, std::ostream& out) {
    const auto records = load_records(cfg.input);
    const bool calibrated = !cfg.prehoc;
    auto report = evaluate_records(records, calibrated, cfg.n_bins);

    if (!cfg.forecasts.empty()) {
        const auto table = io::ingest(cfg.forecasts);
        const auto qd = quantile_reliability(table.forecasts, table.y, cfg.n_levels);
        report.qce = qce(qd);
        if (!cfg.quantile_diagram.empty()) {
            auto f = io::open_output(cfg.quantile_diagram);
            io::write_diagram(f, qd);
        }
    }
    const auto diagram = parity_reliability(records, cfg.n_bins, calibrated);
    if (!cfg.diagram.empty()) {
        auto f = io::open_output(cfg.diagram);
        io::write_diagram(f, diagram);
    }
    if (!cfg.svg.empty()) {
        auto f = io::open_output(cfg.svg);
        io::write_reliability_svg(f, diagram, calibrated ? "Parity calibration (posthoc)" : "Parity calibration (prehoc)");
    }
    Sink sink(cfg.output, out);
    sink.get() << io::to_json(report).dump(2) << '\n';
    return kOk;
}

inline int run_decide(const RunConfig& cfg, std::ostream& out) {
    const auto records = load_records(cfg.input);
    const LossMatrix loss = [&] {
        if (cfg.loss == "paper") return LossMatrix::restriction_policy();
        auto in = io::open_input(cfg.loss);
        return io::read_loss_matrix(in);
    }();
    const auto result = simulate_policy(records, loss, !cfg.prehoc);
    Sink sink(cfg.output, out);
    sink.get() << io::to_json(result).dump(2) << '\n';
    return kOk;
}

}  // namespace detail

/// Entry point of the parity_cal tool. Exit status: 0 success, 1 invalid
/// input, 2 malformed file, 64 bad command line.
inline int cli_run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Parity calibration of sequential regression forecasts", "parity_cal"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* synthetic = app.add_subcommand("synthetic", "Write the alternating half-normal example as a forecast CSV");
    synthetic->add_option("--horizon", cfg.horizon, "Number of timesteps T")->check(CLI::Range(2, 100'000'000));
    synthetic->add_option("--seed", cfg.seed, "Generator seed");
    synthetic->add_option("--output", cfg.output, "Forecast CSV (default stdout)");

    auto* calibrate = app.add_subcommand("calibrate", "Forecast CSV -> parity records CSV");
    calibrate->add_option("--input", cfg.input, "Forecast CSV")->required();
    calibrate->add_option("--output", cfg.output, "Records CSV (default stdout)");
    calibrate->add_option("--method", cfg.method, "Recalibration method")
        ->check(CLI::IsMember({"none", "mw", "iw", "ops"}));
    calibrate->add_option("--uf", cfg.uf, "Refit every N steps (iw, mw)")->check(CLI::PositiveNumber);
    calibrate->add_option("--ws", cfg.ws, "Moving-window size (mw)")->check(CLI::PositiveNumber);
    calibrate->add_option("--gamma", cfg.gamma, "OPS step parameter")->check(CLI::PositiveNumber);
    calibrate->add_option("--cap-d", cfg.D, "OPS regularization parameter D")->check(CLI::PositiveNumber);
    calibrate->add_option("--seed", cfg.seed, "Unused; accepted for symmetry");

    auto* evaluate = app.add_subcommand("evaluate", "Records CSV -> metrics JSON and reliability diagrams");
    evaluate->add_option("--input", cfg.input, "Records CSV")->required();
    evaluate->add_option("--output", cfg.output, "Metrics JSON (default stdout)");
    evaluate->add_option("--forecasts", cfg.forecasts, "Forecast CSV; enables QCE");
    evaluate->add_option("--diagram", cfg.diagram, "Parity reliability diagram CSV");
    evaluate->add_option("--quantile-diagram", cfg.quantile_diagram, "Quantile reliability diagram CSV");
    evaluate->add_option("--svg", cfg.svg, "Parity reliability plot (SVG)");
    evaluate->add_option("--bins", cfg.n_bins, "Parity bins")->check(CLI::PositiveNumber);
    evaluate->add_option("--levels", cfg.n_levels, "Quantile levels")->check(CLI::PositiveNumber);
    evaluate->add_flag("--prehoc", cfg.prehoc, "Score p_raw instead of p_cal");

    auto* decide = app.add_subcommand("decide", "Records CSV + loss matrix -> policy JSON");
    decide->add_option("--input", cfg.input, "Records CSV")->required();
    decide->add_option("--loss", cfg.loss, "'paper' (built-in restriction-policy matrix) or a 2x3 CSV/JSON loss file");
    decide->add_option("--output", cfg.output, "Policy JSON (default stdout)");
    decide->add_flag("--prehoc", cfg.prehoc, "Act on p_raw instead of p_cal");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "parity_cal: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (synthetic->parsed()) return detail::run_synthetic(cfg, out);
        if (calibrate->parsed()) return detail::run_calibrate(cfg, *calibrate, out);
        if (evaluate->parsed()) return detail::run_evaluate(cfg, out);
        if (decide->parsed()) return detail::run_decide(cfg, out);
    } catch (const ParseError& e) {
        err << "parity_cal: parse error: " << e.what() << '\n';
        return kParse;
    } catch (const std::exception& e) {
        err << "parity_cal: " << e.what() << '\n';
        return kValidation;
    }
    return kUsage;
}

}  // namespace parity_cal::cli
