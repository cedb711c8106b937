#include "ebt/config.hpp"
#include "ebt/experiments.hpp"
#include "ebt/measure_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

/// Flags shared by `simulate` and `convergence`; mirrors the run configuration.
struct RunOptions {
    std::string config;
    std::string problem = "example1";
    std::string variant = "simplified";
    double dt = 0.1;
    int substeps = 8;
    int order = 4;
    std::string boundary_rule = "moment";
    bool no_clamp = false;
    std::optional<double> horizon;
    std::optional<double> gamma;
    std::optional<double> a0;
    std::optional<double> domain;
    std::string singles_solver = "exact-1d";
    std::string couples_solver = "graph";
    int graph_radius = 2;
    std::string out;
};

struct StudyOptions {
    int rows = 5;
    std::string reference = "successive";
    int reference_substeps = 16;
    unsigned jobs = 1;
};

void add_run_flags(CLI::App &cmd, RunOptions &o, std::map<std::string, CLI::Option *> &flags) {
    flags["problem"] = cmd.add_option("--problem", o.problem, "example1 or example2");
    flags["variant"] = cmd.add_option("--variant", o.variant, "simplified or original");
    flags["dt"] = cmd.add_option("--dt", o.dt, "macro step (first row for convergence)");
    flags["substeps"] = cmd.add_option("--substeps", o.substeps, "integrator steps per macro step");
    flags["order"] = cmd.add_option("--order", o.order, "1 = Euler, 4 = Runge-Kutta");
    flags["boundary_rule"] =
        cmd.add_option("--boundary-rule", o.boundary_rule, "moment or characteristic (original variant)");
    flags["no_clamp"] = cmd.add_flag("--no-clamp", o.no_clamp, "keep negative masses");
    flags["T"] = cmd.add_option("--T", o.horizon, "final time");
    flags["gamma"] = cmd.add_option("--gamma", o.gamma, "marriage saturation constant");
    flags["a0"] = cmd.add_option("--a0", o.a0, "minimal marriage age");
    flags["domain"] = cmd.add_option("--domain", o.domain, "initial age grid extent");
    flags["singles_solver"] =
        cmd.add_option("--singles-solver", o.singles_solver, "W1 solver for singles");
    flags["couples_solver"] =
        cmd.add_option("--couples-solver", o.couples_solver, "W1 solver for couples");
    flags["graph_radius"] = cmd.add_option("--graph-radius", o.graph_radius, "graph W1 stencil radius");
    flags["out"] = cmd.add_option("--out", o.out, "output directory (default $EBT_OUT_DIR or .)");
    cmd.add_option("--config", o.config, "key = value file; flags take precedence");
}

/// Fills options not given on the command line from the config file.
void apply_config(const std::string &path, const std::map<std::string, CLI::Option *> &flags) {
    if (path.empty()) {
        return;
    }
    for (const auto &[key, value] : ebt::load_key_values(path)) {
        const auto it = flags.find(key);
        if (it == flags.end()) {
            throw std::invalid_argument("unknown config key '" + key + "' in " + path);
        }
        if (it->second->count() == 0) {
            it->second->clear();
            it->second->add_result(value);
            it->second->run_callback();
        }
    }
}

fs::path output_dir(const RunOptions &o) {
    fs::path dir = o.out;
    if (dir.empty()) {
        const char *env = std::getenv("EBT_OUT_DIR");
        dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
    }
    fs::create_directories(dir);
    return dir;
}

ebt::Problem problem_from(const RunOptions &o) {
    ebt::ProblemOverrides ov;
    ov.gamma = o.gamma;
    ov.a0 = o.a0;
    ov.horizon = o.horizon;
    ov.domain = o.domain;
    return ebt::make_problem(o.problem, ov);
}

ebt::StepConfig step_from(const RunOptions &o) {
    ebt::StepConfig s;
    s.dt = o.dt;
    s.substeps = o.substeps;
    s.order = o.order;
    s.clamp = !o.no_clamp;
    s.boundary_rule = ebt::parse_boundary_rule(o.boundary_rule);
    s.validate();
    return s;
}

ebt::MetricConfig metric_from(const RunOptions &o) {
    ebt::MetricConfig m;
    m.singles = ebt::parse_w1_solver(o.singles_solver);
    m.couples = ebt::parse_w1_solver(o.couples_solver);
    m.options.graph.radius = o.graph_radius;
    return m;
}

json config_echo(const RunOptions &o, const ebt::Problem &p, const ebt::StepConfig &s) {
    return {{"problem", o.problem},
            {"variant", o.variant},
            {"dt", s.dt},
            {"substeps", s.substeps},
            {"order", s.order},
            {"clamp", s.clamp},
            {"boundary_rule", ebt::to_string(s.boundary_rule)},
            {"T", p.horizon},
            {"gamma", p.kernel.gamma},
            {"a0", p.kernel.a0},
            {"domain", p.domain}};
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_simulate(const RunOptions &o) {
    const ebt::Problem problem = problem_from(o);
    const ebt::StepConfig step = step_from(o);
    const ebt::Variant variant = ebt::parse_variant(o.variant);
    if (step.dt > problem.kernel.a0) {
        throw std::invalid_argument("dt exceeds a0: the scheme requires dt <= a0 (dt = " +
                                    std::to_string(step.dt) +
                                    ", a0 = " + std::to_string(problem.kernel.a0) + ")");
    }
    const fs::path dir = output_dir(o);
    const auto start = std::chrono::steady_clock::now();
    const ebt::CohortState state = ebt::run(problem, variant, step);
    const double seconds = seconds_since(start);
    const ebt::StateMeasures m = ebt::to_measures(state);
    ebt::save_measure(dir / "male.csv", m.male);
    ebt::save_measure(dir / "female.csv", m.female);
    ebt::save_measure(dir / "couples.csv", m.couples);

    json manifest;
    manifest["command"] = "simulate";
    manifest["config"] = config_echo(o, problem, step);
    manifest["final_time"] = state.t;
    manifest["cohorts"] = state.size();
    manifest["total_mass"] = {{"male", ebt::total_mass(m.male)},
                              {"female", ebt::total_mass(m.female)},
                              {"couples", ebt::total_mass(m.couples)}};
    manifest["diagnostics"] = {{"max_negative", state.diagnostics.max_negative},
                               {"excursions", state.diagnostics.excursions},
                               {"substeps", state.diagnostics.substeps}};
    manifest["files"] = {"male.csv", "female.csv", "couples.csv"};
    manifest["wall_seconds"] = seconds;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << std::setprecision(10) << "t = " << state.t << ", cohorts = " << state.size()
              << "\nmale    " << ebt::total_mass(m.male) << "\nfemale  "
              << ebt::total_mass(m.female) << "\ncouples " << ebt::total_mass(m.couples)
              << "\nwritten to " << dir.string() << '\n';
    return 0;
}

int cmd_convergence(const RunOptions &o, const StudyOptions &so) {
    const ebt::Problem problem = problem_from(o);
    ebt::StudyConfig cfg;
    cfg.step = step_from(o);
    cfg.dts = ebt::halving_list(o.dt, so.rows);
    cfg.variant = ebt::parse_variant(o.variant);
    cfg.reference = ebt::parse_reference_mode(so.reference);
    cfg.reference_substeps = so.reference_substeps;
    cfg.metric = metric_from(o);
    cfg.jobs = so.jobs;
    if (o.dt > problem.kernel.a0) {
        throw std::invalid_argument("dt exceeds a0: the scheme requires dt <= a0");
    }
    const fs::path dir = output_dir(o);
    const auto start = std::chrono::steady_clock::now();
    const ebt::StudyResult result = ebt::convergence_study(problem, cfg);
    const double seconds = seconds_since(start);
    write_text(dir / "table.csv", ebt::table_csv(result));

    json rows = json::array();
    for (const auto &row : result.rows) {
        json r = {{"dt", row.dt},
                  {"err_flat", row.err_flat},
                  {"err_tv", row.err_tv},
                  {"flat_parts",
                   {{"male", row.parts.flat.male},
                    {"female", row.parts.flat.female},
                    {"couples", row.parts.flat.couples}}},
                  {"tv_parts",
                   {{"male", row.parts.tv.male},
                    {"female", row.parts.tv.female},
                    {"couples", row.parts.tv.couples}}},
                  {"run_seconds", row.run_seconds},
                  {"metric_seconds", row.metric_seconds}};
        r["q"] = row.q ? json(*row.q) : json(nullptr);
        rows.push_back(r);
    }
    json manifest;
    manifest["command"] = "convergence";
    manifest["config"] = config_echo(o, problem, cfg.step);
    manifest["reference"] = {{"kind", result.reference_kind},
                             {"mode", ebt::to_string(cfg.reference)},
                             {"dt", result.reference_dt},
                             {"substeps", cfg.reference_substeps},
                             {"seconds", result.reference_seconds}};
    manifest["metric"] = {{"singles_solver", ebt::to_string(cfg.metric.singles)},
                          {"couples_solver", ebt::to_string(cfg.metric.couples)},
                          {"graph_radius", cfg.metric.options.graph.radius},
                          {"couples_aggregation", "none"}};
    manifest["jobs"] = cfg.jobs;
    manifest["rows"] = rows;
    manifest["wall_seconds"] = seconds;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << problem.name << ", " << o.variant << ", reference " << result.reference_kind;
    if (result.reference_kind != "exact") {
        std::cout << " (" << ebt::to_string(cfg.reference) << ")";
    }
    std::cout << '\n' << ebt::table_text(result) << "written to " << dir.string() << '\n';
    return 0;
}

struct DistanceOptions {
    std::string a;
    std::string b;
    std::string metric = "flat";
    std::string solver = "exact-lp";
    bool sandwich = false;
    std::optional<double> diameter;
};

int cmd_distance(const DistanceOptions &o) {
    const ebt::AtomicMeasure a = ebt::load_measure(o.a);
    const ebt::AtomicMeasure b = ebt::load_measure(o.b);
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                    std::to_string(b.dim()));
    }
    ebt::W1Options opts;
    opts.solver = ebt::parse_w1_solver(o.solver);
    std::cout << std::setprecision(12);
    if (o.metric == "tv") {
        std::cout << "tv " << ebt::tv_distance(a, b) << '\n';
    } else if (o.metric == "w1") {
        const ebt::AtomicMeasure pa = ebt::normalize(ebt::drop_zero_atoms(a));
        const ebt::AtomicMeasure pb = ebt::normalize(ebt::drop_zero_atoms(b));
        std::cout << "w1 " << ebt::w1_distance(pa, pb, opts) << " solver=" << o.solver
                  << " (masses normalized)\n";
    } else if (o.metric == "flat") {
        const ebt::AtomicMeasure da = ebt::drop_zero_atoms(a);
        const ebt::AtomicMeasure db = ebt::drop_zero_atoms(b);
        if (o.sandwich) {
            double diameter = 0.0;
            if (o.diameter) {
                diameter = *o.diameter;
            } else {
                const ebt::BoundingBox box = ebt::joint_bounding_box(da, db);
                diameter = box.diameter();
            }
            const ebt::FlatBracket br = ebt::flat_sandwich(da, db, diameter, opts);
            std::cout << "flat in [" << br.lower << ", " << br.upper << "] K=" << diameter
                      << " solver=" << o.solver << '\n';
        } else {
            std::cout << "flat " << ebt::rho_distance(da, db, opts) << " solver=" << o.solver
                      << '\n';
        }
    } else {
        throw std::invalid_argument("unknown metric '" + o.metric + "' (expected flat, tv or w1)");
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Escalator boxcar train solver for the two-sex population model"};
    app.require_subcommand(1);

    RunOptions sim_opts;
    std::map<std::string, CLI::Option *> sim_flags;
    CLI::App *sim = app.add_subcommand("simulate", "run one simulation and write final measures");
    add_run_flags(*sim, sim_opts, sim_flags);

    RunOptions conv_opts;
    StudyOptions study;
    std::map<std::string, CLI::Option *> conv_flags;
    CLI::App *conv = app.add_subcommand("convergence", "error table over a halving dt list");
    add_run_flags(*conv, conv_opts, conv_flags);
    conv_flags["rows"] = conv->add_option("--rows", study.rows, "number of dt rows");
    conv_flags["reference"] =
        conv->add_option("--reference", study.reference, "successive or fixed (self-refined problems)");
    conv_flags["reference_substeps"] =
        conv->add_option("--reference-substeps", study.reference_substeps, "substeps of the finest run");
    conv_flags["jobs"] = conv->add_option("--jobs", study.jobs, "maximal concurrent runs");

    DistanceOptions dist_opts;
    CLI::App *dist = app.add_subcommand("distance", "distance between two measure files");
    dist->add_option("a", dist_opts.a, "first measure (CSV or JSON)")->required();
    dist->add_option("b", dist_opts.b, "second measure (CSV or JSON)")->required();
    dist->add_option("--metric", dist_opts.metric, "flat, tv or w1");
    dist->add_option("--solver", dist_opts.solver, "exact-1d, exact-lp, sinkhorn or graph");
    dist->add_flag("--sandwich", dist_opts.sandwich, "print the (C_K rho, rho) bracket");
    dist->add_option("--diameter", dist_opts.diameter, "support diameter K for the bracket");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }
    try {
        if (*sim) {
            apply_config(sim_opts.config, sim_flags);
            return cmd_simulate(sim_opts);
        }
        if (*conv) {
            apply_config(conv_opts.config, conv_flags);
            return cmd_convergence(conv_opts, study);
        }
        return cmd_distance(dist_opts);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
