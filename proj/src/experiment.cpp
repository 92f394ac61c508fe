#include "kto/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "kto/csv.hpp"
#include "kto/error.hpp"

namespace kto::experiment {

using nlohmann::json;

namespace {

json complex_list(const std::vector<lti::Complex>& values) {
    json out = json::array();
    for (const auto& z : values) out.push_back({{"re", z.real()}, {"im", z.imag()}});
    return out;
}

json matrix_json(const lti::Matrix& M) {
    json out = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        out.push_back(row);
    }
    return out;
}

json vector_json(const lti::Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double signal_bound(const signals::Signal& y_d, const sim::SimGrid& grid) {
    if (auto b = y_d.bound()) return *b;
    double peak = 0.0;
    for (std::size_t k = 0; k <= grid.steps(); ++k) peak = std::max(peak, std::abs(y_d.eval(grid.time(k))));
    return peak;
}

}  // namespace

Metrics steady_state_metrics(const sim::Trajectory& traj, const signals::Signal& y_d,
                             const config::SteadyStateWindow& window) {
    Metrics m;
    m.window_start = window.start;
    m.window_end = window.end;
    const double slack = 1e-9 * traj.h;
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        if (t < window.start - slack || t > window.end + slack) continue;
        const double e = std::abs(traj.y[k] - y_d.eval(t));
        m.max_error = std::max(m.max_error, e);
        sum_sq += e * e;
        ++m.samples;
    }
    if (m.samples == 0) throw Error(ErrorKind::Validation, "steady-state window contains no simulation samples");
    m.rms_error = std::sqrt(sum_sq / static_cast<double>(m.samples));
    return m;
}

int relative_degree(const config::ExperimentConfig& cfg) {
    const int r = lti::relative_degree(cfg.plant);
    if (cfg.relative_degree && *cfg.relative_degree != r) {
        throw Error(ErrorKind::Validation, "config relative_degree " + std::to_string(*cfg.relative_degree) +
                                               " disagrees with the plant (" + std::to_string(r) + ")");
    }
    return r;
}

Analysis analyze(const config::ExperimentConfig& cfg) {
    Analysis a;
    a.r = relative_degree(cfg);
    a.transfer = lti::to_transfer(cfg.plant);
    a.zeros = lti::zeros(cfg.plant);
    a.poles = lti::poles(cfg.plant);
    a.phase = lti::classify_phase(cfg.plant);
    a.normal_form = lti::normal_form(cfg.plant);
    a.internal_eigenvalues = a.normal_form.eta_dim() > 0 ? numkit::eigenvalues(a.normal_form.A4)
                                                         : std::vector<lti::Complex>{};
    a.split = lti::hyperbolic_split(a.normal_form.A4);
    return a;
}

json to_json(const Analysis& a) {
    const auto& nf = a.normal_form;
    json out;
    out["relative_degree"] = a.r;
    out["k"] = a.transfer.k;
    out["numerator_descending"] = a.transfer.numerator_descending();
    out["denominator_descending"] = a.transfer.denominator_descending();
    out["zeros"] = complex_list(a.zeros);
    out["poles"] = complex_list(a.poles);
    out["phase"] = lti::to_string(a.phase);
    out["internal_eigenvalues"] = complex_list(a.internal_eigenvalues);
    out["internal_stable_dim"] = a.split.stable_dim;
    out["internal_unstable_dim"] = a.split.unstable_dim;
    out["normal_form"] = {{"r_vec", vector_json(nf.r_vec)}, {"s_vec", vector_json(nf.s_vec)}, {"k", nf.k},
                          {"g", nf.g},                      {"A4", matrix_json(nf.A4)},      {"A3", matrix_json(nf.A3)},
                          {"T", matrix_json(nf.T)}};
    return out;
}

koopman::Dictionary dictionary(const config::ExperimentConfig& cfg) {
    return koopman::build_dictionary(cfg.trajectory, cfg.dictionary.N, cfg.dictionary.dt, relative_degree(cfg));
}

sim::SimGrid identification_grid(const config::ExperimentConfig& cfg) {
    const auto& sg = cfg.sample_grid;
    const double last = sg.t1 + static_cast<double>(sg.count - 1) * sg.spacing;
    const double h = cfg.sim_grid.h;
    const double steps = std::ceil(last / h - 1e-9);
    return {h, steps * h};
}

IdentifyResult identify(const config::ExperimentConfig& cfg, int trials, std::uint64_t seed) {
    const auto dict = dictionary(cfg);
    const auto times = koopman::sample_times(cfg.sample_grid.t1, cfg.sample_grid.count, cfg.sample_grid.spacing);
    const auto report = koopman::monte_carlo_collect(cfg.plant, dict, times, cfg.identification_disturbance,
                                                     identification_grid(cfg), trials, seed);
    const auto id = koopman::identify_K(report.mean);
    IdentifyResult result;
    result.op.dictionary = dict;
    result.op.K = id.K;
    result.residual = id.residual;
    result.desired_norm = report.mean.O_d.norm();
    result.trials = trials;
    result.seed = seed;
    return result;
}

TrackResult track(const config::ExperimentConfig& cfg, const koopman::KoopmanOperator& op,
                  const signals::DisturbancePair& dist, std::uint64_t seed) {
    const sim::Simulator simulator(cfg.plant, cfg.sim_grid);
    auto rng = signals::make_rng(seed, kTrackingStream);
    TrackResult result;
    result.traj = simulator.run(op.as_input(), dist, lti::Vector::Zero(cfg.plant.order()), rng);
    result.metrics = steady_state_metrics(result.traj, cfg.trajectory, cfg.steady_state);
    return result;
}

OracleResult oracle(const config::ExperimentConfig& cfg, const signals::DisturbancePair& dist, std::uint64_t seed) {
    relative_degree(cfg);
    lti::classify_phase(cfg.plant);
    const auto nf = lti::normal_form(cfg.plant);
    const auto split = lti::hyperbolic_split(nf.A4);
    const int N = cfg.dictionary.N;
    const double dt = cfg.dictionary.dt;
    const inversion::InternalStateReconstructor reconstruct(nf, split, N, dt);
    const inversion::EtaFn eta = [&](double t) { return reconstruct(cfg.trajectory, t); };

    OracleResult result;
    const auto& grid = cfg.sim_grid;
    result.u_hat.resize(grid.steps() + 1);
    for (std::size_t k = 0; k < result.u_hat.size(); ++k) {
        result.u_hat[k] = inversion::feedforward_input(nf, cfg.trajectory, eta, grid.time(k));
    }
    const auto& u_hat = result.u_hat;
    const double h = grid.h;
    const sim::InputFn input = [&u_hat, h](double t) {
        const auto k = static_cast<std::size_t>(std::llround(t / h));
        return u_hat[std::min(k, u_hat.size() - 1)];
    };
    const lti::Vector x0 = inversion::matched_initial_state(nf, cfg.trajectory, eta, 0.0);
    const sim::Simulator simulator(cfg.plant, grid);
    auto rng = signals::make_rng(seed, kTrackingStream);
    result.traj = simulator.run(input, dist, x0, rng);
    result.metrics = steady_state_metrics(result.traj, cfg.trajectory, cfg.steady_state);
    result.bound = inversion::error_bound(nf, split, signal_bound(cfg.trajectory, grid), N, dt);
    return result;
}

bool SweepResult::any_failed() const {
    return std::any_of(runs.begin(), runs.end(), [](const SweepRun& r) { return !r.ok; });
}

config::ExperimentConfig apply_axis(const config::ExperimentConfig& cfg, const std::string& axis, double value,
                                    int& trials) {
    config::ExperimentConfig out = cfg;
    trials = cfg.monte_carlo_trials.front();
    auto as_count = [&](const char* what) {
        const double rounded = std::round(value);
        if (rounded < 1.0 || std::abs(rounded - value) > 1e-9) {
            throw Error(ErrorKind::Validation, std::string("sweep value for ") + what + " must be a positive integer");
        }
        return static_cast<int>(rounded);
    };
    if (axis == "N") {
        out.dictionary.N = as_count("N");
    } else if (axis == "dt") {
        if (!(value > 0.0)) throw Error(ErrorKind::Validation, "sweep value for dt must be positive");
        const double span = static_cast<double>(cfg.dictionary.N) * cfg.dictionary.dt;
        out.dictionary.dt = value;
        out.dictionary.N = std::max(1, static_cast<int>(std::lround(span / value)));
    } else if (axis == "N_mc") {
        trials = as_count("N_mc");
    } else if (axis == "disturbance") {
        if (!(value >= 0.0)) throw Error(ErrorKind::Validation, "sweep value for disturbance must be non-negative");
        out.identification_disturbance = signals::DisturbancePair::multiplicative(value);
    } else {
        throw Error(ErrorKind::Validation, "unknown sweep axis '" + axis + "'");
    }
    return out;
}

SweepResult sweep(const config::ExperimentConfig& cfg) {
    if (!cfg.sweep) throw Error(ErrorKind::Validation, "config has no sweep section");
    const auto& sw = *cfg.sweep;
    std::vector<double> values = sw.values;
    if (values.empty() && sw.axis == "N_mc") {
        for (int n : cfg.monte_carlo_trials) values.push_back(n);
    }
    if (values.empty()) throw Error(ErrorKind::Validation, "sweep.values is empty");

    SweepResult result;
    result.axis = sw.axis;
    for (double value : values) {
        SweepPoint point;
        point.value = value;
        std::vector<double> maxima;
        double rms_sum = 0.0;
        for (int rep = 0; rep < sw.repetitions; ++rep) {
            SweepRun run;
            run.value = value;
            run.repetition = rep;
            run.seed = cfg.seed + static_cast<std::uint64_t>(rep);
            try {
                int trials = 1;
                const auto point_cfg = apply_axis(cfg, sw.axis, value, trials);
                const auto id = identify(point_cfg, trials, run.seed);
                const auto tr = track(point_cfg, id.op, point_cfg.tracking_disturbance, run.seed);
                run.residual = id.residual;
                run.metrics = tr.metrics;
                run.ok = true;
                maxima.push_back(tr.metrics.max_error);
                rms_sum += tr.metrics.rms_error;
            } catch (const std::exception& e) {
                run.error = e.what();
                ++point.failed;
            }
            ++point.runs;
            result.runs.push_back(std::move(run));
        }
        const auto ok = static_cast<double>(maxima.size());
        if (!maxima.empty()) {
            double sum = 0.0;
            for (double m : maxima) sum += m;
            point.mean_max_error = sum / ok;
            point.median_max_error = median(maxima);
            point.mean_rms_error = rms_sum / ok;
        } else {
            point.mean_max_error = point.median_max_error = point.mean_rms_error = std::nan("");
        }
        result.points.push_back(point);
    }
    return result;
}

void write_track_csv(const std::filesystem::path& path, const TrackResult& result, const signals::Signal& y_d) {
    csv::Writer w(path, {"t", "y_d", "y", "error", "u"});
    const auto& tr = result.traj;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double yd = y_d.eval(tr.times[k]);
        w.row(std::vector<double>{tr.times[k], yd, tr.y[k], tr.y[k] - yd, tr.u[k]});
    }
}

void write_oracle_csv(const std::filesystem::path& path, const OracleResult& oracle, const TrackResult& koopman,
                      const signals::Signal& y_d) {
    if (oracle.traj.size() != koopman.traj.size()) {
        throw Error(ErrorKind::Dimension, "oracle and operator runs use different grids");
    }
    csv::Writer w(path, {"t", "u_hat", "u_koopman", "y_oracle", "y_koopman", "y_d"});
    for (std::size_t k = 0; k < oracle.traj.size(); ++k) {
        const double t = oracle.traj.times[k];
        w.row(std::vector<double>{t, oracle.u_hat[k], koopman.traj.u[k], oracle.traj.y[k], koopman.traj.y[k],
                                  y_d.eval(t)});
    }
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
    csv::Writer w(path, {result.axis, "runs", "failed", "mean_max_error", "median_max_error", "mean_rms_error"});
    for (const auto& p : result.points) {
        w.row(std::vector<double>{p.value, static_cast<double>(p.runs), static_cast<double>(p.failed),
                                  p.mean_max_error, p.median_max_error, p.mean_rms_error});
    }
}

void write_sweep_runs_csv(const std::filesystem::path& path, const SweepResult& result) {
    csv::Writer w(path, {result.axis, "repetition", "seed", "status", "residual", "max_error", "rms_error", "error"});
    for (const auto& r : result.runs) {
        std::string message = r.error;
        std::replace(message.begin(), message.end(), ',', ';');
        std::replace(message.begin(), message.end(), '\n', ' ');
        w.row(std::vector<std::string>{csv::format_double(r.value), std::to_string(r.repetition),
                                       std::to_string(r.seed), r.ok ? "ok" : "failed",
                                       r.ok ? csv::format_double(r.residual) : "",
                                       r.ok ? csv::format_double(r.metrics.max_error) : "",
                                       r.ok ? csv::format_double(r.metrics.rms_error) : "", message});
    }
}

json to_json(const Metrics& m) {
    return {{"max_error", m.max_error},
            {"rms_error", m.rms_error},
            {"window", {m.window_start, m.window_end}},
            {"samples", m.samples}};
}

}  // namespace kto::experiment
