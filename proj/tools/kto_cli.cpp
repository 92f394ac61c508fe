// kto: batch runner for the feedforward experiments.
//
//   kto analyze  --preset paper-eq32
//   kto identify --config cfg.json --out out/
//   kto track    --config cfg.json --k out/K.csv
//   kto oracle   --config cfg.json
//   kto sweep    --config cfg.json --axis N_mc

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kto/config.hpp"
#include "kto/csv.hpp"
#include "kto/error.hpp"
#include "kto/experiment.hpp"
#include "kto/plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kto;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitAssumption = 3;
constexpr int kExitNumerical = 4;

int exit_code(const Error& e) {
    if (e.is_assumption_violation()) return kExitAssumption;
    switch (e.kind()) {
        case ErrorKind::NumericalFailure:
        case ErrorKind::TransformationFailure:
        case ErrorKind::Divergence:
        case ErrorKind::SingularGain:
            return kExitNumerical;
        case ErrorKind::Io:
            return kExitOther;
        default:
            return kExitValidation;
    }
}

struct Common {
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "experiment config (JSON)");
    cmd->add_option("--preset", c.preset, "built-in experiment (paper-eq32)");
    cmd->add_option("--seed", c.seed, "override the config seed");
    cmd->add_option("--out", c.out, "output directory (overrides config)");
}

config::ExperimentConfig resolve(const Common& c) {
    if (!c.config_path.empty() && !c.preset.empty()) {
        throw Error(ErrorKind::Validation, "--config and --preset are mutually exclusive");
    }
    config::ExperimentConfig cfg;
    if (!c.config_path.empty()) {
        cfg = config::load(c.config_path);
    } else if (!c.preset.empty()) {
        cfg = config::parse(config::preset_document(c.preset));
    } else {
        throw Error(ErrorKind::Validation, "one of --config or --preset is required");
    }
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.output_dir = c.out;
    fs::create_directories(cfg.output_dir);
    return cfg;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

json base_report(const config::ExperimentConfig& cfg, const char* command) {
    return {{"command", command}, {"plant", cfg.plant_name}, {"seed", cfg.seed}, {"config", cfg.source}};
}

int cmd_analyze(const Common& c) {
    const auto cfg = resolve(c);
    const auto analysis = experiment::analyze(cfg);
    json doc = experiment::to_json(analysis);
    const fs::path path = cfg.output_dir / "analysis.json";
    write_json(path, doc);
    std::cout << doc.dump(2) << '\n';
    return kExitOk;
}

int cmd_identify(const Common& c, std::optional<int> trials_flag) {
    const auto start = Clock::now();
    const auto cfg = resolve(c);
    const int trials = trials_flag.value_or(cfg.monte_carlo_trials.front());
    if (trials < 1) throw Error(ErrorKind::Validation, "--trials must be >= 1");
    const auto id = experiment::identify(cfg, trials, cfg.seed);
    const fs::path k_path = cfg.output_dir / "K.csv";
    koopman::write_operator_csv(k_path, id.op);

    json report = base_report(cfg, "identify");
    report["residual"] = id.residual;
    report["desired_norm"] = id.desired_norm;
    report["relative_residual"] = id.desired_norm > 0.0 ? id.residual / id.desired_norm : 0.0;
    report["monte_carlo_trials"] = id.trials;
    report["atoms"] = id.op.dictionary.size();
    report["files"] = {k_path.string()};
    report["wall_time_s"] = seconds_since(start);
    write_json(cfg.output_dir / "identify_report.json", report);
    std::cout << "K written to " << k_path.string() << " (residual " << id.residual << ")\n";
    return kExitOk;
}

koopman::KoopmanOperator load_operator(const config::ExperimentConfig& cfg, const std::string& k_flag) {
    const fs::path path = k_flag.empty() ? cfg.output_dir / "K.csv" : fs::path(k_flag);
    if (!fs::exists(path)) throw Error(ErrorKind::Io, "operator file " + path.string() + " not found");
    return koopman::read_operator_csv(path, experiment::dictionary(cfg));
}

int cmd_track(const Common& c, const std::string& k_flag) {
    const auto start = Clock::now();
    const auto cfg = resolve(c);
    const auto op = load_operator(cfg, k_flag);
    const auto result = experiment::track(cfg, op, cfg.tracking_disturbance, cfg.seed);
    const fs::path csv_path = cfg.output_dir / "track.csv";
    experiment::write_track_csv(csv_path, result, cfg.trajectory);

    json report = base_report(cfg, "track");
    report["metrics"] = experiment::to_json(result.metrics);
    report["files"] = {csv_path.string()};
    report["wall_time_s"] = seconds_since(start);
    write_json(cfg.output_dir / "track_report.json", report);
    std::cout << "steady-state max |y - y_d| = " << result.metrics.max_error << ", rms = " << result.metrics.rms_error
              << " on [" << result.metrics.window_start << ", " << result.metrics.window_end << "]\n";
    return kExitOk;
}

int cmd_oracle(const Common& c, const std::string& k_flag) {
    const auto start = Clock::now();
    const auto cfg = resolve(c);
    const auto op = k_flag.empty() ? experiment::identify(cfg, cfg.monte_carlo_trials.front(), cfg.seed).op
                                   : load_operator(cfg, k_flag);
    const auto model = experiment::oracle(cfg, cfg.tracking_disturbance, cfg.seed);
    const auto data = experiment::track(cfg, op, cfg.tracking_disturbance, cfg.seed);
    const fs::path csv_path = cfg.output_dir / "oracle.csv";
    experiment::write_oracle_csv(csv_path, model, data, cfg.trajectory);

    json report = base_report(cfg, "oracle");
    report["oracle_metrics"] = experiment::to_json(model.metrics);
    report["koopman_metrics"] = experiment::to_json(data.metrics);
    report["error_bound"] = {{"window_term", model.bound.window_term},
                             {"output_window_term", model.bound.output_window_term},
                             {"beta", model.bound.beta},
                             {"gamma", model.bound.gamma},
                             {"delta", model.bound.delta},
                             {"alpha", model.bound.alpha},
                             {"alpha_plant", model.bound.alpha_plant},
                             {"kappa_plant", model.bound.kappa_plant}};
    report["files"] = {csv_path.string()};
    report["wall_time_s"] = seconds_since(start);
    write_json(cfg.output_dir / "oracle_report.json", report);
    std::cout << "oracle max error " << model.metrics.max_error << ", operator max error " << data.metrics.max_error
              << '\n';
    return kExitOk;
}

int cmd_sweep(const Common& c, const std::string& axis_flag, const std::vector<double>& values_flag,
              std::optional<int> reps_flag) {
    const auto start = Clock::now();
    auto cfg = resolve(c);
    config::SweepConfig sw = cfg.sweep.value_or(config::SweepConfig{});
    if (!axis_flag.empty()) {
        if (cfg.sweep && cfg.sweep->axis != axis_flag) sw.values.clear();
        sw.axis = axis_flag;
    }
    if (!values_flag.empty()) sw.values = values_flag;
    if (reps_flag) sw.repetitions = *reps_flag;
    if (sw.axis.empty()) throw Error(ErrorKind::Validation, "sweep axis missing (config sweep.axis or --axis)");
    if (sw.axis != "N" && sw.axis != "dt" && sw.axis != "N_mc" && sw.axis != "disturbance") {
        throw Error(ErrorKind::Validation, "sweep axis must be one of N, dt, N_mc, disturbance");
    }
    if (sw.repetitions < 1) throw Error(ErrorKind::Validation, "--repetitions must be >= 1");
    cfg.sweep = sw;

    const auto result = experiment::sweep(cfg);
    const fs::path table = cfg.output_dir / ("sweep_" + sw.axis + ".csv");
    const fs::path runs = cfg.output_dir / ("sweep_" + sw.axis + "_runs.csv");
    const fs::path svg = cfg.output_dir / ("sweep_" + sw.axis + ".svg");
    experiment::write_sweep_csv(table, result);
    experiment::write_sweep_runs_csv(runs, result);

    // the chart is drawn from the aggregated table as written
    const auto written = csv::read(table);
    plot::Series mean{"mean max error", {}, {}};
    plot::Series med{"median max error", {}, {}};
    for (const auto& row : written.rows) {
        const double x = csv::parse_double(row[0]);
        mean.x.push_back(x);
        mean.y.push_back(csv::parse_double(row[3]));
        med.x.push_back(x);
        med.y.push_back(csv::parse_double(row[4]));
    }
    plot::write_svg(svg, {"steady-state tracking error vs " + sw.axis, sw.axis, "max |y - y_d|", true, {mean, med}});

    json report = base_report(cfg, "sweep");
    report["axis"] = sw.axis;
    json points = json::array();
    for (const auto& p : result.points) {
        points.push_back({{"value", p.value},
                          {"runs", p.runs},
                          {"failed", p.failed},
                          {"mean_max_error", p.mean_max_error},
                          {"median_max_error", p.median_max_error},
                          {"mean_rms_error", p.mean_rms_error}});
    }
    report["points"] = points;
    report["window"] = {cfg.steady_state.start, cfg.steady_state.end};
    report["files"] = {table.string(), runs.string(), svg.string()};
    report["wall_time_s"] = seconds_since(start);
    write_json(cfg.output_dir / ("sweep_" + sw.axis + "_report.json"), report);

    for (const auto& p : result.points) {
        std::cout << sw.axis << " = " << p.value << ": mean max error " << p.mean_max_error << " (" << p.failed
                  << " failed)\n";
    }
    if (result.any_failed()) {
        for (const auto& r : result.runs) {
            if (!r.ok) std::cerr << "run " << sw.axis << "=" << r.value << " rep " << r.repetition << ": " << r.error << '\n';
        }
        return kExitOther;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Koopman-type feedforward experiments for linear non-minimum-phase plants", "kto"};
    app.require_subcommand(1);

    Common analyze_opts, identify_opts, track_opts, oracle_opts, sweep_opts;
    auto* analyze = app.add_subcommand("analyze", "relative degree, zeros, poles and internal dynamics");
    add_common(analyze, analyze_opts);

    auto* identify = app.add_subcommand("identify", "identify the operator coefficients K");
    add_common(identify, identify_opts);
    std::optional<int> trials;
    identify->add_option("--trials", trials, "Monte Carlo trials (default: first monte_carlo.trials entry)");

    auto* track = app.add_subcommand("track", "track y_d with a stored operator");
    add_common(track, track_opts);
    std::string track_k;
    track->add_option("--k", track_k, "operator CSV (default: <out>/K.csv)");

    auto* oracle = app.add_subcommand("oracle", "model-based feedforward next to the identified operator");
    add_common(oracle, oracle_opts);
    std::string oracle_k;
    oracle->add_option("--k", oracle_k, "operator CSV (default: identify from the config)");

    auto* sweep = app.add_subcommand("sweep", "one identify+track run per axis value");
    add_common(sweep, sweep_opts);
    std::string axis;
    std::vector<double> values;
    std::optional<int> reps;
    sweep->add_option("--axis", axis, "N | dt | N_mc | disturbance");
    sweep->add_option("--values", values, "axis values (override config)")->delimiter(',');
    sweep->add_option("--repetitions", reps, "seeded repetitions per value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*analyze) return cmd_analyze(analyze_opts);
        if (*identify) return cmd_identify(identify_opts, trials);
        if (*track) return cmd_track(track_opts, track_k);
        if (*oracle) return cmd_oracle(oracle_opts, oracle_k);
        if (*sweep) return cmd_sweep(sweep_opts, axis, values, reps);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error (io): " << e.what() << '\n';
        return kExitOther;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
    return kExitOther;
}
