#include "kto/config.hpp"

#include <fstream>
#include <set>

#include "kto/error.hpp"

namespace kto::config {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::Validation, "config " + where + ": " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) invalid(where, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) invalid(where, "unknown key '" + key + "'");
    }
}

const json& member(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) invalid(where, "missing required key '" + key + "'");
    return *it;
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) invalid(where, "expected a number");
    return v.get<double>();
}

double number(const json& obj, const std::string& key, const std::string& where) {
    return number(member(obj, key, where), where + "." + key);
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) invalid(where, "expected an integer");
    return v.get<int>();
}

double positive(const json& obj, const std::string& key, const std::string& where) {
    const double v = number(obj, key, where);
    if (!(v > 0.0)) invalid(where + "." + key, "must be positive");
    return v;
}

lti::Matrix matrix_from(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) invalid(where, "expected a non-empty array");
    if (!v[0].is_array()) {
        // flat list → column vector
        lti::Matrix m(static_cast<Eigen::Index>(v.size()), 1);
        for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = number(v[i], where);
        return m;
    }
    const std::size_t cols = v[0].size();
    lti::Matrix m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_array() || v[i].size() != cols) invalid(where, "rows must have equal length");
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], where);
        }
    }
    return m;
}

lti::StateSpace parse_plant(const json& v, std::string& name) {
    if (v.is_string()) {
        name = v.get<std::string>();
        if (name != kPaperPreset) invalid("plant", "unknown preset '" + name + "'");
        return paper_plant();
    }
    check_keys(v, {"A", "B", "C", "G"}, "plant");
    name = "inline";
    lti::Matrix A = matrix_from(member(v, "A", "plant"), "plant.A");
    lti::Matrix B = matrix_from(member(v, "B", "plant"), "plant.B");
    lti::Matrix C = matrix_from(member(v, "C", "plant"), "plant.C");
    if (C.cols() == 1 && C.rows() > 1) C.transposeInPlace();
    lti::Matrix G = v.contains("G") ? matrix_from(v["G"], "plant.G") : lti::Matrix::Zero(A.rows(), 1);
    try {
        return lti::StateSpace::make(std::move(A), std::move(B), std::move(C), std::move(G));
    } catch (const Error& e) {
        invalid("plant", e.what());
    }
}

signals::DisturbancePair parse_pair(const json& v, const std::string& where) {
    check_keys(v, {"input", "output"}, where);
    signals::DisturbancePair pair;
    if (v.contains("input")) pair.input = parse_disturbance(v["input"], signals::DisturbanceTarget::Input);
    if (v.contains("output")) pair.output = parse_disturbance(v["output"], signals::DisturbanceTarget::Output);
    return pair;
}

}  // namespace

lti::StateSpace paper_plant() {
    lti::Matrix A(4, 4);
    A << 0, 1, 0, 0,  //
        0, 0, 1, 0,   //
        0, 0, 0, 1,   //
        -1, -4, -5.5, -3.5;
    lti::Matrix B(4, 1);
    B << 0, 0, 0, 1;
    lti::Matrix C(1, 4);
    C << -2, 1, 1, 0;
    return lti::StateSpace::make(A, B, C, B);
}

json preset_document(const std::string& name) {
    if (name != kPaperPreset) throw Error(ErrorKind::Validation, "unknown preset '" + name + "'");
    return json::parse(R"({
  "plant": "paper-eq32",
  "trajectory": {"type": "sinusoid", "amplitude": 1.0, "omega": 0.1, "phase": 0.0},
  "dictionary": {"N": 20, "dt": 0.5},
  "sample_grid": {"t1": 50.5, "count": 100, "spacing": 0.5},
  "sim_grid": {"h": 0.01, "t_end": 150.0},
  "disturbances": {
    "identification": {
      "input": {"kind": "uniform_multiplicative", "fraction": 0.05},
      "output": {"kind": "uniform_multiplicative", "fraction": 0.05}
    },
    "tracking": {
      "input": {"kind": "uniform_multiplicative", "fraction": 0.05},
      "output": {"kind": "uniform_multiplicative", "fraction": 0.05}
    }
  },
  "monte_carlo": {"trials": [1]},
  "steady_state": {"start": 60.0, "end": 150.0},
  "seed": 1,
  "output_dir": "out"
})");
}

signals::Signal parse_signal(const json& v) {
    if (!v.is_object()) invalid("trajectory", "expected an object");
    const std::string type = v.value("type", "");
    if (type == "sinusoid") {
        check_keys(v, {"type", "amplitude", "omega", "phase"}, "trajectory(sinusoid)");
        return signals::Signal::sinusoid(number(v, "amplitude", "trajectory"), number(v, "omega", "trajectory"),
                                         v.contains("phase") ? number(v["phase"], "trajectory.phase") : 0.0);
    }
    if (type == "polynomial") {
        check_keys(v, {"type", "coeffs"}, "trajectory(polynomial)");
        std::vector<double> coeffs;
        for (const auto& c : member(v, "coeffs", "trajectory")) coeffs.push_back(number(c, "trajectory.coeffs"));
        return signals::Signal::polynomial(std::move(coeffs));
    }
    if (type == "sum") {
        check_keys(v, {"type", "terms"}, "trajectory(sum)");
        std::vector<signals::Signal> terms;
        const auto& arr = member(v, "terms", "trajectory");
        if (!arr.is_array()) invalid("trajectory.terms", "expected an array");
        for (const auto& t : arr) terms.push_back(parse_signal(t));
        return signals::Signal::sum(std::move(terms));
    }
    if (type == "shifted") {
        check_keys(v, {"type", "base", "offset"}, "trajectory(shifted)");
        return signals::Signal::shifted(parse_signal(member(v, "base", "trajectory")),
                                        number(v, "offset", "trajectory"));
    }
    invalid("trajectory", "type must be one of sinusoid, polynomial, sum, shifted");
}

signals::DisturbanceSpec parse_disturbance(const json& v, signals::DisturbanceTarget target) {
    const std::string where = target == signals::DisturbanceTarget::Input ? "disturbance.input" : "disturbance.output";
    if (!v.is_object()) invalid(where, "expected an object");
    const std::string kind = v.value("kind", "");
    if (kind == "none") {
        check_keys(v, {"kind"}, where);
        signals::DisturbanceSpec spec;
        spec.target = target;
        return spec;
    }
    if (kind == "uniform_multiplicative") {
        check_keys(v, {"kind", "fraction"}, where);
        const double f = number(v, "fraction", where);
        if (!(f >= 0.0)) invalid(where, "fraction must be non-negative");
        return signals::DisturbanceSpec::multiplicative(f, target);
    }
    if (kind == "uniform_absolute") {
        check_keys(v, {"kind", "bound"}, where);
        const double b = number(v, "bound", where);
        if (!(b >= 0.0)) invalid(where, "bound must be non-negative");
        return signals::DisturbanceSpec::absolute(b, target);
    }
    invalid(where, "kind must be one of none, uniform_multiplicative, uniform_absolute");
}

ExperimentConfig parse(const json& doc) {
    check_keys(doc, {"plant", "relative_degree", "trajectory", "dictionary", "sample_grid", "sim_grid", "disturbances",
                     "monte_carlo", "steady_state", "seed", "output_dir", "sweep"},
               "root");
    ExperimentConfig cfg;
    cfg.source = doc;
    cfg.plant = parse_plant(member(doc, "plant", "root"), cfg.plant_name);
    if (doc.contains("relative_degree")) {
        const int r = integer(doc["relative_degree"], "relative_degree");
        if (r < 1 || r > cfg.plant.order()) invalid("relative_degree", "must lie in [1, n]");
        if (r != lti::relative_degree(cfg.plant)) invalid("relative_degree", "disagrees with the plant");
        cfg.relative_degree = r;
    }
    cfg.trajectory = parse_signal(member(doc, "trajectory", "root"));

    const auto& dict = member(doc, "dictionary", "root");
    check_keys(dict, {"N", "dt"}, "dictionary");
    cfg.dictionary.N = integer(member(dict, "N", "dictionary"), "dictionary.N");
    if (cfg.dictionary.N < 1) invalid("dictionary.N", "must be >= 1");
    cfg.dictionary.dt = positive(dict, "dt", "dictionary");

    const auto& sg = member(doc, "sample_grid", "root");
    check_keys(sg, {"t1", "count", "spacing"}, "sample_grid");
    cfg.sample_grid.t1 = number(sg, "t1", "sample_grid");
    if (cfg.sample_grid.t1 < 0.0) invalid("sample_grid.t1", "must be non-negative");
    cfg.sample_grid.count = integer(member(sg, "count", "sample_grid"), "sample_grid.count");
    if (cfg.sample_grid.count < 1) invalid("sample_grid.count", "must be >= 1");
    cfg.sample_grid.spacing = positive(sg, "spacing", "sample_grid");

    const auto& grid = member(doc, "sim_grid", "root");
    check_keys(grid, {"h", "t_end"}, "sim_grid");
    cfg.sim_grid = {positive(grid, "h", "sim_grid"), positive(grid, "t_end", "sim_grid")};
    try {
        cfg.sim_grid.validate();
    } catch (const Error& e) {
        invalid("sim_grid", e.what());
    }

    if (doc.contains("disturbances")) {
        const auto& d = doc["disturbances"];
        check_keys(d, {"identification", "tracking"}, "disturbances");
        if (d.contains("identification")) {
            cfg.identification_disturbance = parse_pair(d["identification"], "disturbances.identification");
        }
        if (d.contains("tracking")) cfg.tracking_disturbance = parse_pair(d["tracking"], "disturbances.tracking");
    }

    if (doc.contains("monte_carlo")) {
        const auto& mc = doc["monte_carlo"];
        check_keys(mc, {"trials"}, "monte_carlo");
        const auto& trials = member(mc, "trials", "monte_carlo");
        if (!trials.is_array() || trials.empty()) invalid("monte_carlo.trials", "expected a non-empty array");
        cfg.monte_carlo_trials.clear();
        for (const auto& t : trials) {
            const int n = integer(t, "monte_carlo.trials");
            if (n < 1) invalid("monte_carlo.trials", "entries must be >= 1");
            cfg.monte_carlo_trials.push_back(n);
        }
    }

    if (doc.contains("steady_state")) {
        const auto& ss = doc["steady_state"];
        check_keys(ss, {"start", "end"}, "steady_state");
        cfg.steady_state = {number(ss, "start", "steady_state"), number(ss, "end", "steady_state")};
    } else {
        cfg.steady_state.end = std::min(cfg.steady_state.end, cfg.sim_grid.t_end);
    }
    if (!(cfg.steady_state.start < cfg.steady_state.end) || cfg.steady_state.start < 0.0 ||
        cfg.steady_state.end > cfg.sim_grid.t_end + 1e-9) {
        invalid("steady_state", "window must satisfy 0 <= start < end <= sim_grid.t_end");
    }

    const double last_sample =
        cfg.sample_grid.t1 + static_cast<double>(cfg.sample_grid.count - 1) * cfg.sample_grid.spacing;
    if (last_sample > cfg.sim_grid.t_end + 1e-9) invalid("sample_grid", "last sample time exceeds sim_grid.t_end");

    if (doc.contains("seed")) {
        const auto& s = doc["seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            invalid("seed", "expected a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string()) invalid("output_dir", "expected a string");
        cfg.output_dir = doc["output_dir"].get<std::string>();
    }

    if (doc.contains("sweep")) {
        const auto& sw = doc["sweep"];
        check_keys(sw, {"axis", "values", "repetitions"}, "sweep");
        SweepConfig sweep;
        const auto& axis = member(sw, "axis", "sweep");
        if (!axis.is_string()) invalid("sweep.axis", "expected a string");
        sweep.axis = axis.get<std::string>();
        if (sweep.axis != "N" && sweep.axis != "dt" && sweep.axis != "N_mc" && sweep.axis != "disturbance") {
            invalid("sweep.axis", "must be one of N, dt, N_mc, disturbance");
        }
        if (sw.contains("values")) {
            if (!sw["values"].is_array()) invalid("sweep.values", "expected an array");
            for (const auto& v : sw["values"]) sweep.values.push_back(number(v, "sweep.values"));
        }
        if (sw.contains("repetitions")) {
            sweep.repetitions = integer(sw["repetitions"], "sweep.repetitions");
            if (sweep.repetitions < 1) invalid("sweep.repetitions", "must be >= 1");
        }
        cfg.sweep = sweep;
    }
    return cfg;
}

ExperimentConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Validation, "config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse(doc);
}

}  // namespace kto::config
