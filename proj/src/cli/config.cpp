#include <fstream>
#include <set>
#include <sstream>

#include "qgcc/cli.hpp"
#include "qgcc/grid.hpp"

namespace qgcc::cli {

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

double number(const json& value, const std::string& what) {
    if (!value.is_number()) {
        throw ConfigError(what + " must be a number");
    }
    return value.get<double>();
}

Complex complex_entry(const json& value, const std::string& what) {
    if (value.is_number()) return Complex(value.get<double>(), 0.0);
    if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number()) {
        return Complex(value[0].get<double>(), value[1].get<double>());
    }
    throw ConfigError(what + ": complex entries are [re, im] pairs");
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj[key].is_string()) throw ConfigError(std::string(key) + " must be a string");
    return obj[key].get<std::string>();
}

Method parse_method(const json& value) {
    if (!value.is_string()) throw ConfigError("method must be a string");
    const std::string name = value.get<std::string>();
    if (name == "smallgain") return Method::SmallGain;
    if (name == "popov") return Method::Popov;
    throw ConfigError("method must be smallgain or popov, got '" + name + "'");
}

SystemSpec parse_system(const json& obj) {
    if (obj.is_object() && obj.contains("S")) {
        throw ConfigError("a scattering matrix S other than the identity is not supported");
    }
    SystemSpec spec;
    if (obj.is_object() && obj.contains("fixture")) {
        reject_unknown(obj, {"fixture", "kappa", "gamma", "delta"}, "system");
        spec.fixture = optional_string(obj, "fixture");
        if (*spec.fixture != "dpa") {
            throw ConfigError("unknown fixture '" + *spec.fixture + "' (only dpa exists)");
        }
        if (obj.contains("kappa")) spec.kappa = number(obj["kappa"], "system.kappa");
    } else {
        reject_unknown(obj, {"M1", "M2", "N1", "N2", "E1", "E2", "gamma", "delta"}, "system");
        for (const char* key : {"M1", "M2", "N1", "N2"}) {
            if (!obj.contains(key)) throw ConfigError(std::string("system.") + key + " is required");
        }
        spec.M1 = complex_matrix_from_json(obj["M1"], "system.M1");
        spec.M2 = complex_matrix_from_json(obj["M2"], "system.M2");
        spec.N1 = complex_matrix_from_json(obj["N1"], "system.N1");
        spec.N2 = complex_matrix_from_json(obj["N2"], "system.N2");
        if (obj.contains("E1") != obj.contains("E2")) {
            throw ConfigError("system.E1 and system.E2 go together");
        }
        if (obj.contains("E1")) {
            spec.E1 = complex_matrix_from_json(obj["E1"], "system.E1");
            spec.E2 = complex_matrix_from_json(obj["E2"], "system.E2");
        }
    }
    if (obj.contains("gamma")) spec.gamma = number(obj["gamma"], "system.gamma");
    if (obj.contains("delta")) spec.delta = number(obj["delta"], "system.delta");
    return spec;
}

}  // namespace

json complex_matrix_to_json(const CMatrix& A) {
    json rows = json::array();
    for (Index r = 0; r < A.rows(); ++r) {
        json row = json::array();
        // "+ 0.0" turns -0 into 0 so artifacts do not carry signed zeros.
        for (Index c = 0; c < A.cols(); ++c) {
            row.push_back({A(r, c).real() + 0.0, A(r, c).imag() + 0.0});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix complex_matrix_from_json(const json& value, const std::string& what) {
    if (!value.is_array() || value.empty() || !value[0].is_array() || value[0].empty()) {
        throw ConfigError(what + " must be a non-empty row-major array of rows");
    }
    const auto rows = static_cast<Index>(value.size());
    const auto cols = static_cast<Index>(value[0].size());
    CMatrix A(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = value[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw ConfigError(what + " has ragged rows");
        }
        for (Index c = 0; c < cols; ++c) A(r, c) = complex_entry(row[static_cast<std::size_t>(c)], what);
    }
    return A;
}

RunConfig default_config() {
    RunConfig config;
    config.system.fixture = "dpa";
    return config;
}

RunConfig parse_config(const json& doc) {
    reject_unknown(doc, {"system", "cost", "method", "theta_grid", "epsilon", "verification", "output"},
                   "config");
    RunConfig config;
    if (!doc.contains("system")) throw ConfigError("config needs a system section");
    config.system = parse_system(doc["system"]);

    if (doc.contains("cost")) {
        const json& cost = doc["cost"];
        reject_unknown(cost, {"R", "rho"}, "cost");
        if (cost.contains("R")) {
            if (cost["R"].is_string()) {
                if (cost["R"].get<std::string>() != "identity") {
                    throw ConfigError("cost.R must be \"identity\" or a matrix");
                }
            } else {
                config.R = complex_matrix_from_json(cost["R"], "cost.R");
            }
        }
        if (cost.contains("rho")) config.rho = number(cost["rho"], "cost.rho");
    }
    if (doc.contains("method")) config.method = parse_method(doc["method"]);
    if (doc.contains("theta_grid")) {
        const json& grid = doc["theta_grid"];
        reject_unknown(grid, {"from", "to", "step"}, "theta_grid");
        if (grid.contains("from")) config.theta_grid.from = number(grid["from"], "theta_grid.from");
        if (grid.contains("to")) config.theta_grid.to = number(grid["to"], "theta_grid.to");
        if (grid.contains("step")) config.theta_grid.step = number(grid["step"], "theta_grid.step");
        if (!(config.theta_grid.step > 0.0) || !(config.theta_grid.from <= config.theta_grid.to) ||
            config.theta_grid.from < 0.0) {
            throw ConfigError("theta_grid needs 0 <= from <= to and step > 0");
        }
    }
    if (doc.contains("epsilon")) {
        config.epsilon = number(doc["epsilon"], "epsilon");
        if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    }
    if (doc.contains("verification")) {
        const json& ver = doc["verification"];
        reject_unknown(ver, {"samples", "seed"}, "verification");
        if (ver.contains("samples")) {
            if (!ver["samples"].is_number_integer() || ver["samples"].get<long long>() < 0) {
                throw ConfigError("verification.samples must be a non-negative integer");
            }
            config.samples = ver["samples"].get<int>();
        }
        if (ver.contains("seed")) {
            if (!ver["seed"].is_number_unsigned()) {
                throw ConfigError("verification.seed must be a non-negative integer");
            }
            config.seed = ver["seed"].get<std::uint64_t>();
        }
    }
    if (auto out = optional_string(doc, "output")) config.output = *out;
    return config;
}

json serialize_config(const RunConfig& config) {
    json doc;
    json system;
    const SystemSpec& s = config.system;
    if (s.fixture) {
        system["fixture"] = *s.fixture;
        system["kappa"] = s.kappa;
    } else {
        system["M1"] = complex_matrix_to_json(s.M1);
        system["M2"] = complex_matrix_to_json(s.M2);
        system["N1"] = complex_matrix_to_json(s.N1);
        system["N2"] = complex_matrix_to_json(s.N2);
        if (s.E1.size() > 0) {
            system["E1"] = complex_matrix_to_json(s.E1);
            system["E2"] = complex_matrix_to_json(s.E2);
        }
    }
    if (s.gamma) system["gamma"] = *s.gamma;
    system["delta"] = s.delta;
    doc["system"] = std::move(system);
    doc["cost"] = {{"R", config.R.size() == 0 ? json("identity") : complex_matrix_to_json(config.R)},
                   {"rho", config.rho}};
    doc["method"] = to_string(config.method);
    doc["theta_grid"] = {{"from", config.theta_grid.from},
                         {"to", config.theta_grid.to},
                         {"step", config.theta_grid.step}};
    doc["epsilon"] = config.epsilon;
    doc["verification"] = {{"samples", config.samples}, {"seed", config.seed}};
    doc["output"] = config.output;
    return doc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
    try {
        return parse_config(doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

UncertainSystem build_system(const RunConfig& config) {
    const UncertaintyClass cls = required_class(config.method);
    const SystemSpec& s = config.system;
    UncertainSystem sys;
    if (s.fixture) {
        sys = dpa_fixture(s.kappa, cls).system;
    } else {
        sys.M = DoubledMatrix::validate(s.M1, s.M2, MatrixKind::Hermitian);
        sys.N = CouplingOperator{s.N1, s.N2};
        const Index n = sys.M.block_rows();
        sys.E = s.E1.size() > 0 ? DoubledMatrix::validate(s.E1, s.E2, MatrixKind::General)
                                : DoubledMatrix::identity(n);
        sys.gamma = cls == UncertaintyClass::NormBound ? 1.0 : 2.0;
        sys.uncertainty_class = cls;
    }
    if (s.gamma) sys.gamma = *s.gamma;
    sys.delta = s.delta;
    sys.validate();
    return sys;
}

CostSpec build_cost(const RunConfig& config) {
    const Index n = build_system(config).n_modes();
    CostSpec cost{config.R.size() == 0 ? CMatrix(CMatrix::Identity(2 * n, 2 * n)) : config.R,
                  config.rho};
    cost.validate(n);
    return cost;
}

std::vector<double> theta_grid(const RunConfig& config) {
    return make_grid(config.theta_grid.from, config.theta_grid.to, config.theta_grid.step);
}

}  // namespace qgcc::cli
