#include "kto/koopman.hpp"

#include <cmath>
#include <string>

#include "kto/csv.hpp"
#include "kto/error.hpp"
#include "kto/parallel.hpp"

namespace kto::koopman {

std::string Atom::descriptor() const {
    if (kind == Kind::Derivative) return "derivative:" + std::to_string(value);
    return std::string("shift:") + (value >= 0 ? "+" : "") + std::to_string(value);
}

Atom Atom::parse(const std::string& descriptor) {
    const auto colon = descriptor.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::Validation, "bad atom descriptor '" + descriptor + "'");
    const std::string kind = descriptor.substr(0, colon);
    const std::string value = descriptor.substr(colon + 1);
    int parsed = 0;
    try {
        std::size_t used = 0;
        parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
        throw Error(ErrorKind::Validation, "bad atom index in '" + descriptor + "'");
    }
    if (kind == "shift") return {Kind::Shift, parsed};
    if (kind == "derivative") return {Kind::Derivative, parsed};
    throw Error(ErrorKind::Validation, "unknown atom kind in '" + descriptor + "'");
}

double Dictionary::eval_atom(std::size_t i, double t) const {
    const Atom& atom = atoms.at(i);
    if (atom.kind == Atom::Kind::Shift) return base.eval(t + static_cast<double>(atom.value) * dt);
    return base.eval(t, atom.value);
}

Vector Dictionary::evaluate(double t) const {
    Vector phi(static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t i = 0; i < atoms.size(); ++i) phi(static_cast<Eigen::Index>(i)) = eval_atom(i, t);
    return phi;
}

sim::InputFn Dictionary::atom_input(std::size_t i) const {
    const Atom atom = atoms.at(i);
    const signals::Signal sig = base;
    const double step = dt;
    if (atom.kind == Atom::Kind::Shift) {
        const double offset = static_cast<double>(atom.value) * step;
        return [sig, offset](double t) { return sig.eval(t + offset); };
    }
    return [sig, order = atom.value](double t) { return sig.eval(t, order); };
}

Dictionary build_dictionary(const signals::Signal& y_d, int N, double dt, int r) {
    if (N < 1) throw Error(ErrorKind::Validation, "dictionary: N must be >= 1");
    if (!(dt > 0.0)) throw Error(ErrorKind::Validation, "dictionary: dt must be positive");
    if (r < 1) throw Error(ErrorKind::Validation, "dictionary: r must be >= 1");
    Dictionary dict;
    dict.N = N;
    dict.dt = dt;
    dict.r = r;
    dict.base = y_d;
    dict.atoms.reserve(static_cast<std::size_t>(2 * N + r));
    for (int d = N - 1; d >= -N; --d) dict.atoms.push_back({Atom::Kind::Shift, d});
    for (int i = 1; i <= r; ++i) dict.atoms.push_back({Atom::Kind::Derivative, i});
    return dict;
}

double KoopmanOperator::apply(double t) const {
    if (static_cast<std::size_t>(K.size()) != dictionary.size()) {
        throw Error(ErrorKind::Contract, "apply_operator: K has " + std::to_string(K.size()) +
                                             " coefficients but the dictionary has " +
                                             std::to_string(dictionary.size()) + " atoms");
    }
    double u = 0.0;
    for (std::size_t i = 0; i < dictionary.size(); ++i) u += K(static_cast<Eigen::Index>(i)) * dictionary.eval_atom(i, t);
    return u;
}

sim::InputFn KoopmanOperator::as_input() const {
    if (static_cast<std::size_t>(K.size()) != dictionary.size()) {
        throw Error(ErrorKind::Contract, "operator: K does not match the dictionary");
    }
    return [op = *this](double t) { return op.apply(t); };
}

double apply_operator(const KoopmanOperator& op, double t) { return op.apply(t); }

std::vector<double> sample_times(double t1, int count, double spacing) {
    if (count < 1) throw Error(ErrorKind::Validation, "sample grid: count must be >= 1");
    if (!(spacing > 0.0)) throw Error(ErrorKind::Validation, "sample grid: spacing must be positive");
    std::vector<double> times(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) times[static_cast<std::size_t>(k)] = t1 + static_cast<double>(k) * spacing;
    return times;
}

namespace {

Matrix collect_rows(const sim::Simulator& simulator, const Dictionary& dict, std::span<const double> times,
                    const signals::DisturbancePair& dist, std::uint64_t seed, bool parallel_rows) {
    const auto rows = dict.size();
    Matrix O(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(times.size()));
    const Vector x0 = Vector::Zero(simulator.plant().order());
    auto one_row = [&](std::size_t i) {
        auto rng = signals::make_rng(seed, i);
        std::vector<double> y;
        try {
            y = simulator.run_output(dict.atom_input(i), dist, x0, rng);
        } catch (const Error& e) {
            throw Error(e.kind(), "row " + std::to_string(i) + " (" + dict.atoms[i].descriptor() + "): " + e.what());
        }
        const auto sampled = sim::sample_series(y, simulator.grid().h, times);
        for (std::size_t j = 0; j < sampled.size(); ++j) {
            O(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sampled[j];
        }
    };
    if (parallel_rows) {
        parallel_for(rows, one_row);
    } else {
        for (std::size_t i = 0; i < rows; ++i) one_row(i);
    }
    return O;
}

void check_times(std::span<const double> times, const sim::SimGrid& grid) {
    if (times.empty()) throw Error(ErrorKind::Validation, "output matrix: no sample times");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw Error(ErrorKind::Validation, "output matrix: sample times must increase");
    }
    if (times.back() > grid.t_end + 1e-9 * grid.h) {
        throw Error(ErrorKind::Range, "output matrix: last sample time lies beyond the simulation horizon");
    }
}

Vector desired_row(const Dictionary& dict, std::span<const double> times) {
    Vector O_d(static_cast<Eigen::Index>(times.size()));
    for (std::size_t j = 0; j < times.size(); ++j) O_d(static_cast<Eigen::Index>(j)) = dict.base.eval(times[j]);
    return O_d;
}

}  // namespace

OutputMatrix collect_output_matrix(const lti::StateSpace& ss, const Dictionary& dict, std::span<const double> times,
                                   const signals::DisturbancePair& dist, const sim::SimGrid& grid, std::uint64_t seed,
                                   bool parallel_rows) {
    check_times(times, grid);
    const sim::Simulator simulator(ss, grid);
    OutputMatrix om;
    om.O = collect_rows(simulator, dict, times, dist, seed, parallel_rows);
    om.O_d = desired_row(dict, times);
    om.sample_times.assign(times.begin(), times.end());
    return om;
}

Identification identify_K(const OutputMatrix& om, std::optional<double> cutoff) {
    if (om.O.cols() != om.O_d.size()) {
        throw Error(ErrorKind::Dimension, "identify_K: O and O_d disagree on the number of samples");
    }
    Identification id;
    id.K = numkit::pinv(om.O, cutoff).transpose() * om.O_d;
    id.residual = (om.O_d - om.O.transpose() * id.K).norm();
    return id;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial) { return base_seed + trial * kTrialSeedStride; }

MonteCarloReport monte_carlo_collect(const lti::StateSpace& ss, const Dictionary& dict, std::span<const double> times,
                                     const signals::DisturbancePair& dist, const sim::SimGrid& grid, int n_trials,
                                     std::uint64_t seed) {
    if (n_trials < 1) throw Error(ErrorKind::Validation, "monte carlo: need at least one trial");
    check_times(times, grid);
    const sim::Simulator simulator(ss, grid);
    const auto trials = static_cast<std::size_t>(n_trials);

    MonteCarloReport report;
    report.trials = n_trials;
    report.seeds.resize(trials);
    for (std::size_t n = 0; n < trials; ++n) report.seeds[n] = trial_seed(seed, n);

    std::vector<Matrix> samples(trials);
    parallel_for(trials, [&](std::size_t n) {
        try {
            samples[n] = collect_rows(simulator, dict, times, dist, report.seeds[n], /*parallel_rows=*/false);
        } catch (const Error& e) {
            throw Error(e.kind(), "trial " + std::to_string(n) + ": " + e.what());
        }
    });

    // fixed summation order
    Matrix mean = Matrix::Zero(samples[0].rows(), samples[0].cols());
    for (const auto& s : samples) mean += s;
    mean /= static_cast<double>(trials);
    Matrix var = Matrix::Zero(mean.rows(), mean.cols());
    if (trials > 1) {
        for (const auto& s : samples) var += (s - mean).cwiseAbs2();
        var /= static_cast<double>(trials - 1);
    }

    report.mean.O = std::move(mean);
    report.mean.O_d = desired_row(dict, times);
    report.mean.sample_times.assign(times.begin(), times.end());
    report.stddev = var.cwiseSqrt();
    return report;
}

void write_operator_csv(const std::filesystem::path& path, const KoopmanOperator& op) {
    if (static_cast<std::size_t>(op.K.size()) != op.dictionary.size()) {
        throw Error(ErrorKind::Contract, "write_operator_csv: K does not match the dictionary");
    }
    csv::Writer w(path, {"atom", "coefficient"});
    for (std::size_t i = 0; i < op.dictionary.size(); ++i) {
        w.row(std::vector<std::string>{op.dictionary.atoms[i].descriptor(),
                                       csv::format_double(op.K(static_cast<Eigen::Index>(i)))});
    }
}

KoopmanOperator read_operator_csv(const std::filesystem::path& path, const Dictionary& dict) {
    const auto table = csv::read(path);
    if (table.header != std::vector<std::string>{"atom", "coefficient"}) {
        throw Error(ErrorKind::Validation, path.string() + ": expected header 'atom,coefficient'");
    }
    if (table.rows.size() != dict.size()) {
        throw Error(ErrorKind::Contract, path.string() + ": has " + std::to_string(table.rows.size()) +
                                             " coefficients, dictionary has " + std::to_string(dict.size()) + " atoms");
    }
    KoopmanOperator op;
    op.dictionary = dict;
    op.K.resize(static_cast<Eigen::Index>(dict.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() != 2) throw Error(ErrorKind::Validation, path.string() + ": malformed row");
        if (!(Atom::parse(row[0]) == dict.atoms[i])) {
            throw Error(ErrorKind::Contract, path.string() + ": atom '" + row[0] + "' at position " +
                                                 std::to_string(i) + " does not match dictionary atom '" +
                                                 dict.atoms[i].descriptor() + "'");
        }
        op.K(static_cast<Eigen::Index>(i)) = csv::parse_double(row[1]);
    }
    return op;
}

}  // namespace kto::koopman
