#pragma once

#include <iosfwd>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgcc/qmodel.hpp"

namespace qgcc::cli {

using json = nlohmann::ordered_json;

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

enum ExitCode : int {
    kExitFeasible = 0,
    kExitInfeasible = 1,
    kExitConfig = 2,
    kExitSolver = 3,
    kExitViolation = 4,
};

/// Either the example fixture at a given kappa or explicit doubled blocks.
struct SystemSpec {
    std::optional<std::string> fixture;
    double kappa = 4.5;
    CMatrix M1, M2, N1, N2, E1, E2;
    /// Unset: the example's choice for the method (1 small gain, 2 Popov).
    std::optional<double> gamma;
    double delta = 0.0;
};

struct ThetaGridSpec {
    double from = 0.0;
    double to = 1.0;
    double step = 0.05;
};

struct RunConfig {
    SystemSpec system;
    /// Empty means identity.
    CMatrix R;
    double rho = 0.1;
    Method method = Method::SmallGain;
    ThetaGridSpec theta_grid;
    double epsilon = 1e-6;
    int samples = 200;
    std::uint64_t seed = 42;
    std::string output;
};

/// Throws ConfigError on unknown keys, wrong types or unsupported features.
RunConfig parse_config(const json& doc);
json serialize_config(const RunConfig& config);
RunConfig load_config(const std::string& path);

/// The default run: example fixture at kappa = 4.5.
RunConfig default_config();

/// Uncertain system described by the config; the uncertainty class follows the method.
UncertainSystem build_system(const RunConfig& config);
CostSpec build_cost(const RunConfig& config);
std::vector<double> theta_grid(const RunConfig& config);

json complex_matrix_to_json(const CMatrix& A);
CMatrix complex_matrix_from_json(const json& value, const std::string& what);

/// Options that only exist on the command line.
struct Invocation {
    RunConfig config;
    std::optional<std::string> controller_path;
    std::optional<double> bound_override;
    std::optional<double> kappa_tilde;
    std::string param = "kappa";
    std::optional<double> from, to, step;
    /// "synthesis" or "analysis" for sweep and verify.
    std::string mode = "synthesis";
    /// Records real wall-clock times; off by default so artifacts are byte-stable.
    bool timing = false;
    /// Overrides QGCC_THREADS.
    std::optional<int> threads;
};

/// One CSV row in the fixed schema.
struct ResultRow {
    std::string method;
    std::optional<double> kappa;
    std::optional<double> theta;
    bool feasible = false;
    double bound = 0.0;
    std::optional<double> q;
    std::optional<double> t;
    std::string solver_status;
    double wall_ms = 0.0;
};

inline constexpr const char* kCsvHeader = "method,kappa,theta,feasible,bound,q,t,solver_status,wall_ms";

std::string format_number(double value);
std::string csv_line(const ResultRow& row);
/// "# key=value" lines describing the run, then the header, then rows.
std::string csv_document(const std::vector<std::pair<std::string, std::string>>& metadata,
                         const std::vector<ResultRow>& rows);

int cmd_analyze(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_synthesize(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_sweep(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_verify(const Invocation& inv, std::ostream& out, std::ostream& err);
int cmd_realize(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Worker count for sweeps: explicit value, else QGCC_THREADS, else all cores.
unsigned sweep_threads(std::optional<int> requested);

}  // namespace qgcc::cli
