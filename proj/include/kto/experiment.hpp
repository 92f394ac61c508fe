#pragma once

// Experiment pipeline shared by the CLI and the acceptance suite:
// structural analysis, identification, tracking, the model-based oracle and
// parameter sweeps. Nothing here writes files except the explicit writers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kto/config.hpp"
#include "kto/koopman.hpp"
#include "kto/sim.hpp"
#include "kto/stable_inverse.hpp"

namespace kto::experiment {

// rng stream for tracking runs; identification rows use streams 0 … 2N+r−1
inline constexpr std::uint64_t kTrackingStream = 0xFFFFFFFFULL;

struct Metrics {
    double max_error = 0.0;
    double rms_error = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
    std::size_t samples = 0;
};

// max and RMS of |y − y_d| over grid points with start ≤ t ≤ end.
Metrics steady_state_metrics(const sim::Trajectory& traj, const signals::Signal& y_d,
                             const config::SteadyStateWindow& window);

struct Analysis {
    int r = 0;
    lti::TransferFunction transfer;
    std::vector<lti::Complex> zeros;
    std::vector<lti::Complex> poles;
    lti::Phase phase = lti::Phase::MinimumPhase;
    std::vector<lti::Complex> internal_eigenvalues;
    lti::NormalForm normal_form;
    lti::HyperbolicSplit split;
};

// Throws the assumption-violation error kinds when the plant is unusable.
Analysis analyze(const config::ExperimentConfig& cfg);
nlohmann::json to_json(const Analysis& a);

int relative_degree(const config::ExperimentConfig& cfg);
koopman::Dictionary dictionary(const config::ExperimentConfig& cfg);

// Simulation grid for identification: ends at the first grid point at or after the last sample.
sim::SimGrid identification_grid(const config::ExperimentConfig& cfg);

struct IdentifyResult {
    koopman::KoopmanOperator op;
    double residual = 0.0;
    double desired_norm = 0.0;  // ‖O_d‖
    int trials = 1;
    std::uint64_t seed = 0;
};

IdentifyResult identify(const config::ExperimentConfig& cfg, int trials, std::uint64_t seed);

struct TrackResult {
    sim::Trajectory traj;
    Metrics metrics;
};

TrackResult track(const config::ExperimentConfig& cfg, const koopman::KoopmanOperator& op,
                  const signals::DisturbancePair& dist, std::uint64_t seed);

struct OracleResult {
    std::vector<double> u_hat;  // on the simulation grid
    sim::Trajectory traj;
    Metrics metrics;
    inversion::ErrorBoundReport bound;
};

// Model-based feedforward with a matched initial state.
OracleResult oracle(const config::ExperimentConfig& cfg, const signals::DisturbancePair& dist, std::uint64_t seed);

struct SweepRun {
    double value = 0.0;
    int repetition = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double residual = 0.0;
    Metrics metrics;
};

struct SweepPoint {
    double value = 0.0;
    int runs = 0;
    int failed = 0;
    double mean_max_error = 0.0;
    double median_max_error = 0.0;
    double mean_rms_error = 0.0;
};

struct SweepResult {
    std::string axis;
    std::vector<SweepRun> runs;
    std::vector<SweepPoint> points;
    [[nodiscard]] bool any_failed() const;
};

// Config with one sweep coordinate applied. The dt axis keeps N·dt fixed; the
// disturbance axis sets the identification fraction on both sides.
config::ExperimentConfig apply_axis(const config::ExperimentConfig& cfg, const std::string& axis, double value,
                                    int& trials);

// Repetition k uses seed cfg.seed + k for both identification and tracking.
SweepResult sweep(const config::ExperimentConfig& cfg);

// Files
void write_track_csv(const std::filesystem::path& path, const TrackResult& result, const signals::Signal& y_d);
void write_oracle_csv(const std::filesystem::path& path, const OracleResult& oracle, const TrackResult& koopman,
                      const signals::Signal& y_d);
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);
void write_sweep_runs_csv(const std::filesystem::path& path, const SweepResult& result);

nlohmann::json to_json(const Metrics& m);

}  // namespace kto::experiment
