#pragma once

// Experiment configuration: a JSON document validated against a fixed schema
// (docs/config.schema.json). Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kto/lti.hpp"
#include "kto/signals.hpp"
#include "kto/sim.hpp"

namespace kto::config {

inline constexpr const char* kPaperPreset = "paper-eq32";

struct DictionaryConfig {
    int N = 20;
    double dt = 0.5;
};

struct SampleGridConfig {
    double t1 = 50.5;
    int count = 100;
    double spacing = 0.5;
};

struct SteadyStateWindow {
    double start = 50.0;
    double end = 100.0;
};

struct SweepConfig {
    std::string axis;  // N | dt | N_mc | disturbance
    std::vector<double> values;
    int repetitions = 1;
};

struct ExperimentConfig {
    std::string plant_name;  // preset name or "inline"
    lti::StateSpace plant;
    std::optional<int> relative_degree;
    signals::Signal trajectory;
    DictionaryConfig dictionary;
    SampleGridConfig sample_grid;
    sim::SimGrid sim_grid{0.01, 150.0};
    signals::DisturbancePair identification_disturbance;
    signals::DisturbancePair tracking_disturbance;
    std::vector<int> monte_carlo_trials{1};
    SteadyStateWindow steady_state;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    std::optional<SweepConfig> sweep;
    nlohmann::json source;  // normalized document as loaded
};

lti::StateSpace paper_plant();

// The checked-in paper-eq32 experiment as a JSON document.
nlohmann::json preset_document(const std::string& name);

ExperimentConfig parse(const nlohmann::json& doc);
ExperimentConfig load(const std::filesystem::path& path);

signals::Signal parse_signal(const nlohmann::json& doc);
signals::DisturbanceSpec parse_disturbance(const nlohmann::json& doc, signals::DisturbanceTarget target);

}  // namespace kto::config
