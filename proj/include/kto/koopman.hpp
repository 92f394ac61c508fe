#pragma once

// Koopman-type feedforward operator u(t) = ⟨K, Φ(t)⟩ over a dictionary of
// shifted desired outputs and their derivatives, identified from plant data by
// a pseudoinverse fit, with optional Monte Carlo averaging of the output matrix.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kto/lti.hpp"
#include "kto/signals.hpp"
#include "kto/sim.hpp"

namespace kto::koopman {

using lti::Matrix;
using lti::Vector;

struct Atom {
    enum class Kind { Shift, Derivative };
    Kind kind = Kind::Shift;
    int value = 0;  // shift index d (offset d·Δt) or derivative order

    [[nodiscard]] std::string descriptor() const;  // "shift:+19", "derivative:2"
    static Atom parse(const std::string& descriptor);

    friend bool operator==(const Atom&, const Atom&) = default;
};

struct Dictionary {
    int N = 0;
    double dt = 0.0;
    int r = 0;
    std::vector<Atom> atoms;
    signals::Signal base;

    [[nodiscard]] std::size_t size() const { return atoms.size(); }
    [[nodiscard]] double eval_atom(std::size_t i, double t) const;
    [[nodiscard]] Vector evaluate(double t) const;
    // φ_i as a plant input
    [[nodiscard]] sim::InputFn atom_input(std::size_t i) const;
};

// 2N shifts with offsets (N−1)Δt … −NΔt (descending), then derivatives 1 … r.
Dictionary build_dictionary(const signals::Signal& y_d, int N, double dt, int r);

struct KoopmanOperator {
    Dictionary dictionary;
    Vector K;

    [[nodiscard]] double apply(double t) const;
    [[nodiscard]] sim::InputFn as_input() const;
};

double apply_operator(const KoopmanOperator& op, double t);

struct OutputMatrix {
    Matrix O;       // one row per atom, one column per sample time
    Vector O_d;     // y_d at the sample times
    std::vector<double> sample_times;
};

// t_k = t1 + k·spacing, k = 0 … count−1
std::vector<double> sample_times(double t1, int count, double spacing);

// Row i is the measured output under u = φ_i, row disturbances drawn from
// stream i of `seed`.
OutputMatrix collect_output_matrix(const lti::StateSpace& ss, const Dictionary& dict, std::span<const double> times,
                                   const signals::DisturbancePair& dist, const sim::SimGrid& grid, std::uint64_t seed,
                                   bool parallel_rows = true);

struct Identification {
    Vector K;
    double residual = 0.0;  // ‖O_d − Kᵀ O‖
};

// Minimum-norm least squares Kᵀ = O_d O†.
Identification identify_K(const OutputMatrix& om, std::optional<double> cutoff = std::nullopt);

struct MonteCarloReport {
    int trials = 0;
    OutputMatrix mean;
    Matrix stddev;  // per-entry sample standard deviation (zero for a single trial)
    std::vector<std::uint64_t> seeds;
};

inline constexpr std::uint64_t kTrialSeedStride = 2147483647ULL;

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial);

MonteCarloReport monte_carlo_collect(const lti::StateSpace& ss, const Dictionary& dict, std::span<const double> times,
                                     const signals::DisturbancePair& dist, const sim::SimGrid& grid, int n_trials,
                                     std::uint64_t seed);

// (atom descriptor, coefficient) rows with a header.
void write_operator_csv(const std::filesystem::path& path, const KoopmanOperator& op);
// Loads coefficients and checks that the atom list matches `dict` exactly.
KoopmanOperator read_operator_csv(const std::filesystem::path& path, const Dictionary& dict);

}  // namespace kto::koopman
