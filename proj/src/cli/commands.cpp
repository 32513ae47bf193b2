#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "qgcc/analysis.hpp"
#include "qgcc/cli.hpp"
#include "qgcc/grid.hpp"
#include "qgcc/oracle.hpp"
#include "qgcc/realize.hpp"
#include "qgcc/synthesis.hpp"

namespace qgcc::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;
using Metadata = std::vector<std::pair<std::string, std::string>>;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string status_name(lmi::SolveStatus status) { return lmi::to_string(status); }

// Maps library exceptions onto the exit-code contract; everything is reported on err.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NotHurwitz& e) {
        err << e.what() << "\n";
        return kExitInfeasible;
    } catch (const Unrealizable& e) {
        err << "unrealizable: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const NoControllerNeeded& e) {
        err << "no controller needed: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const SingularSqueezer& e) {
        err << "unrealizable: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const NumericalFailure& e) {
        err << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const IllConditioned& e) {
        err << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const Error& e) {
        // Structure, dimension, positivity, class and support problems all trace back
        // to the input.
        err << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitSolver;
    }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot write " + path);
    file << text;
}

std::optional<double> fixture_kappa(const RunConfig& config) {
    if (config.system.fixture) return config.system.kappa;
    return std::nullopt;
}

Metadata run_metadata(const Invocation& inv, const std::string& command) {
    const RunConfig& c = inv.config;
    const UncertainSystem sys = build_system(c);
    Metadata meta;
    meta.emplace_back("command", command);
    meta.emplace_back("method", to_string(c.method));
    meta.emplace_back("system", c.system.fixture ? *c.system.fixture : "explicit");
    if (c.system.fixture) meta.emplace_back("kappa", format_number(c.system.kappa));
    meta.emplace_back("gamma", format_number(sys.gamma));
    meta.emplace_back("delta", format_number(sys.delta));
    meta.emplace_back("uncertainty_class", to_string(sys.uncertainty_class));
    meta.emplace_back("R", c.R.size() == 0 ? "identity" : "custom");
    meta.emplace_back("rho", format_number(c.rho));
    meta.emplace_back("epsilon", format_number(c.epsilon));
    meta.emplace_back("theta_from", format_number(c.theta_grid.from));
    meta.emplace_back("theta_to", format_number(c.theta_grid.to));
    meta.emplace_back("theta_step", format_number(c.theta_grid.step));
    meta.emplace_back("samples", std::to_string(c.samples));
    meta.emplace_back("seed", std::to_string(c.seed));
    return meta;
}

ResultRow analysis_row(const analysis::AnalysisOutcome& o, std::optional<double> kappa) {
    ResultRow row;
    row.method = to_string(o.method);
    row.kappa = kappa;
    row.feasible = o.feasible;
    row.bound = o.feasible ? o.bound : kInf;
    if (o.method == Method::Popov) {
        row.theta = o.s_or_theta;
    } else if (o.feasible) {
        row.t = 1.0 / o.s_or_theta;  // tau^2
    }
    row.solver_status = status_name(o.solver.status);
    return row;
}

ResultRow synthesis_row(const synthesis::SynthesisOutcome& o, std::optional<double> kappa) {
    ResultRow row;
    row.method = to_string(o.method);
    row.kappa = kappa;
    row.feasible = o.feasible;
    row.bound = o.feasible ? o.bound : kInf;
    if (o.method == Method::Popov) row.theta = o.theta;
    if (o.feasible) {
        row.q = o.q;
        if (o.method == Method::SmallGain) row.t = o.t;
    }
    row.solver_status = o.solver.ok() && !o.feasible ? "closed_loop_unstable"
                                                      : status_name(o.solver.status);
    return row;
}

analysis::AnalysisOutcome run_analysis(const RunConfig& config) {
    const UncertainSystem sys = build_system(config);
    const CostSpec cost = build_cost(config);
    analysis::AnalysisOptions options;
    options.epsilon = config.epsilon;
    if (config.method == Method::SmallGain) return analysis::analyze_smallgain(sys, cost.R, options);
    return analysis::analyze_popov(sys, cost.R, theta_grid(config), options);
}

synthesis::SynthesisOutcome run_synthesis(const RunConfig& config) {
    const UncertainSystem sys = build_system(config);
    const CostSpec cost = build_cost(config);
    synthesis::SynthesisOptions options;
    options.epsilon = config.epsilon;
    if (config.method == Method::SmallGain) return synthesis::synth_smallgain(sys, cost, options);
    return synthesis::synth_popov(sys, cost, theta_grid(config), options);
}

std::string controller_path_for(const Invocation& inv) {
    if (inv.controller_path) return *inv.controller_path;
    if (inv.config.output.empty()) return "controller.json";
    std::filesystem::path p(inv.config.output);
    p.replace_extension(".controller.json");
    return p.string();
}

json number_or_null(double value) {
    return std::isfinite(value) ? json(value) : json(nullptr);
}

json controller_document(const synthesis::SynthesisOutcome& o, const RunConfig& config) {
    json doc;
    doc["method"] = to_string(o.method);
    if (auto kappa = fixture_kappa(config)) doc["kappa"] = *kappa;
    doc["theta"] = o.theta;
    doc["q"] = o.q;
    doc["t"] = o.t;
    doc["bound"] = o.bound;
    doc["closed_loop_abscissa"] = o.closed_loop_abscissa;
    doc["solver_status"] = status_name(o.solver.status);
    doc["K1"] = complex_matrix_to_json(o.K.block1());
    doc["K2"] = complex_matrix_to_json(o.K.block2());
    return doc;
}

struct LoadedController {
    DoubledMatrix K;
    std::optional<double> bound;
};

LoadedController load_controller(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open controller " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed controller JSON in " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("K1") || !doc.contains("K2")) {
        throw ConfigError("controller file needs K1 and K2");
    }
    LoadedController c;
    c.K = DoubledMatrix::validate(complex_matrix_from_json(doc["K1"], "K1"),
                                  complex_matrix_from_json(doc["K2"], "K2"), MatrixKind::Hermitian);
    if (doc.contains("bound") && doc["bound"].is_number()) c.bound = doc["bound"].get<double>();
    return c;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

// ---------------------------------------------------------------------------
// CSV

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string csv_line(const ResultRow& row) {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    std::ostringstream os;
    os << row.method << ',' << opt(row.kappa) << ',' << opt(row.theta) << ','
       << (row.feasible ? "true" : "false") << ',' << format_number(row.bound) << ',' << opt(row.q)
       << ',' << opt(row.t) << ',' << row.solver_status << ',' << format_number(row.wall_ms);
    return os.str();
}

std::string csv_document(const Metadata& metadata, const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    for (const auto& [key, value] : metadata) os << "# " << key << '=' << value << '\n';
    os << kCsvHeader << '\n';
    for (const auto& row : rows) os << csv_line(row) << '\n';
    return os.str();
}

unsigned sweep_threads(std::optional<int> requested) {
    if (requested && *requested > 0) return static_cast<unsigned>(*requested);
    if (const char* env = std::getenv("QGCC_THREADS")) {
        char* end = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && value > 0) return static_cast<unsigned>(value);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Commands

int cmd_analyze(const Invocation& inv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        const auto start = Clock::now();
        const Metadata meta = run_metadata(inv, "analyze");
        analysis::AnalysisOutcome o;
        try {
            o = run_analysis(inv.config);
        } catch (const NotHurwitz& e) {
            // Analysis needs a stable nominal drift; record the row, then report.
            ResultRow row;
            row.method = to_string(inv.config.method);
            row.kappa = fixture_kappa(inv.config);
            row.bound = kInf;
            row.solver_status = "not_hurwitz";
            write_text(inv.config.output, csv_document(meta, {row}), out);
            err << e.what() << "\n";
            return kExitInfeasible;
        }
        ResultRow row = analysis_row(o, fixture_kappa(inv.config));
        if (inv.timing) row.wall_ms = elapsed_ms(start);
        write_text(inv.config.output, csv_document(meta, {row}), out);
        if (!o.feasible) err << "analysis LMI infeasible\n";
        return o.feasible ? kExitFeasible : kExitInfeasible;
    });
}

int cmd_synthesize(const Invocation& inv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        const auto start = Clock::now();
        const synthesis::SynthesisOutcome o = run_synthesis(inv.config);
        ResultRow row = synthesis_row(o, fixture_kappa(inv.config));
        if (inv.timing) row.wall_ms = elapsed_ms(start);
        write_text(inv.config.output, csv_document(run_metadata(inv, "synthesize"), {row}), out);
        if (o.solver.status == lmi::SolveStatus::NumericalFailure) {
            err << "solver failure: no certified point\n";
            return kExitSolver;
        }
        if (!o.feasible) {
            err << (o.solver.ok() ? "extracted controller does not stabilize the nominal loop\n"
                                  : "synthesis LMI infeasible\n");
            return kExitInfeasible;
        }
        std::ostringstream sink;
        write_text(controller_path_for(inv), dump(controller_document(o, inv.config)), sink);
        return kExitFeasible;
    });
}

int cmd_sweep(const Invocation& inv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        const bool over_kappa = inv.param == "kappa";
        if (!over_kappa && inv.param != "theta") {
            throw ConfigError("--param must be kappa or theta");
        }
        if (inv.mode != "synthesis" && inv.mode != "analysis") {
            throw ConfigError("--mode must be synthesis or analysis");
        }
        if (over_kappa && !inv.config.system.fixture) {
            throw ConfigError("kappa sweeps need the dpa fixture");
        }
        if (!over_kappa && inv.config.method != Method::Popov) {
            throw ConfigError("theta sweeps need method popov");
        }
        const ThetaGridSpec& g = inv.config.theta_grid;
        const double from = inv.from.value_or(over_kappa ? 4.05 : g.from);
        const double to = inv.to.value_or(over_kappa ? 10.0 : g.to);
        const double step = inv.step.value_or(over_kappa ? 0.05 : g.step);
        if (!(from < to) || !(step > 0.0)) {
            throw ConfigError("sweep range needs from < to and step > 0");
        }
        const std::vector<double> points = make_grid(from, to, step);
        const bool synth = inv.mode == "synthesis";

        // Validates the base configuration up front so config errors still exit 2.
        Metadata meta = run_metadata(inv, "sweep");
        meta.emplace_back("mode", inv.mode);
        meta.emplace_back("param", inv.param);
        meta.emplace_back("from", format_number(from));
        meta.emplace_back("to", format_number(to));
        meta.emplace_back("step", format_number(step));

        auto evaluate = [&](double value) {
            RunConfig config = inv.config;
            const auto start = Clock::now();
            ResultRow row;
            row.method = to_string(config.method);
            if (over_kappa) config.system.kappa = value;
            row.kappa = fixture_kappa(config);
            if (!over_kappa) row.theta = value;
            try {
                if (over_kappa) {
                    row = synth ? synthesis_row(run_synthesis(config), row.kappa)
                                : analysis_row(run_analysis(config), row.kappa);
                } else {
                    const UncertainSystem sys = build_system(config);
                    const CostSpec cost = build_cost(config);
                    if (synth) {
                        synthesis::SynthesisOptions options;
                        options.epsilon = config.epsilon;
                        row = synthesis_row(synthesis::synth_popov_at(sys, cost, value, options),
                                            row.kappa);
                    } else {
                        analysis::AnalysisOptions options;
                        options.epsilon = config.epsilon;
                        row = analysis_row(analysis::analyze_popov_at(sys, cost.R, value, options),
                                           row.kappa);
                    }
                }
            } catch (const NotHurwitz&) {
                row.feasible = false;
                row.bound = kInf;
                row.solver_status = "not_hurwitz";
            } catch (const NumericalFailure&) {
                row.feasible = false;
                row.bound = kInf;
                row.solver_status = "numerical_failure";
            } catch (const Error&) {
                row.feasible = false;
                row.bound = kInf;
                row.solver_status = "error";
            }
            if (inv.timing) row.wall_ms = elapsed_ms(start);
            return row;
        };

        std::vector<ResultRow> rows(points.size());
        const unsigned workers =
            std::min<unsigned>(sweep_threads(inv.threads), static_cast<unsigned>(points.size()));
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < points.size(); i = next++) rows[i] = evaluate(points[i]);
        };
        std::vector<std::thread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();

        write_text(inv.config.output, csv_document(meta, rows), out);
        return kExitFeasible;
    });
}

int cmd_verify(const Invocation& inv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (inv.mode != "synthesis" && inv.mode != "analysis") {
            throw ConfigError("--mode must be synthesis or analysis");
        }
        const RunConfig& config = inv.config;
        const UncertainSystem sys = build_system(config);
        const CostSpec cost = build_cost(config);

        std::optional<DoubledMatrix> K;
        std::optional<double> bound;
        std::string source;
        if (inv.controller_path) {
            LoadedController c = load_controller(*inv.controller_path);
            K = c.K;
            bound = c.bound;
            source = "controller_file";
        } else if (inv.mode == "synthesis") {
            const synthesis::SynthesisOutcome o = run_synthesis(config);
            if (o.feasible) {
                K = o.K;
                bound = o.bound;
            } else if (o.solver.status == lmi::SolveStatus::NumericalFailure) {
                throw NumericalFailure("synthesis did not reach a certified point");
            }
            source = "synthesis";
        } else {
            const analysis::AnalysisOutcome o = run_analysis(config);
            if (o.feasible) bound = o.bound;
            source = "analysis";
        }
        if (inv.bound_override) {
            bound = *inv.bound_override;
            source += "+override";
        }
        if (!bound || !std::isfinite(*bound)) {
            err << "no finite bound to verify (" << source << " infeasible)\n";
            return kExitInfeasible;
        }

        const oracle::VerificationReport report =
            oracle::verify_bound(sys, K, cost, *bound, config.samples, config.seed);
        json doc;
        doc["method"] = to_string(config.method);
        doc["mode"] = inv.mode;
        doc["bound_source"] = source;
        doc["bound"] = *bound;
        doc["controller"] = K.has_value();
        doc["samples"] = report.samples;
        doc["violations"] = report.violations;
        doc["worst_margin"] = number_or_null(report.worst_margin);
        doc["worst_cost"] = report.worst_cost;
        doc["unstable_samples"] = report.unstable_samples;
        doc["seed"] = report.seed;
        doc["passed"] = report.passed();
        write_text(config.output, dump(doc), out);
        if (!report.passed()) {
            err << "verification failed: " << report.violations << " violations, "
                << report.unstable_samples << " unstable samples\n";
            return kExitViolation;
        }
        return kExitFeasible;
    });
}

int cmd_realize(const Invocation& inv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (!inv.controller_path) throw ConfigError("realize needs --controller");
        if (!inv.kappa_tilde) throw ConfigError("realize needs --ktilde");
        if (!(*inv.kappa_tilde > 0.0)) throw ConfigError("--ktilde must be positive");
        const LoadedController c = load_controller(*inv.controller_path);
        const realize::SqueezerRealization s = realize::solve_squeezer(c.K, *inv.kappa_tilde);

        const CMatrix J = commutation_matrix(1);
        const CMatrix target = Complex(0.0, -1.0) * J * c.K.assembled();
        const CMatrix term = realize::realized_coupling_term(s);
        json doc;
        doc["r"] = s.r;
        doc["sinh_r"] = std::sinh(s.r);
        doc["cosh_r"] = std::cosh(s.r);
        doc["alpha"] = s.alpha;
        doc["beta"] = s.beta;
        doc["kappa_tilde"] = s.kappa_tilde;
        doc["B"] = complex_matrix_to_json(s.B);
        doc["coupling_term"] = complex_matrix_to_json(term);
        doc["target"] = complex_matrix_to_json(target);
        doc["residual"] = max_abs(term - target);
        doc["bogoliubov_defect"] = realize::bogoliubov_defect(s.B);
        write_text(inv.config.output, dump(doc), out);
        return kExitFeasible;
    });
}

}  // namespace qgcc::cli
