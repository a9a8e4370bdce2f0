#pragma once

/**
 * @file cli.hpp
 * @brief Command-line front end: solve, study, estimate-gamma and cache
 *        maintenance. Exit codes: 0 success, 1 configuration error,
 *        2 numerical failure.
 */

#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fnrd/errors.hpp"
#include "fnrd/integrator.hpp"
#include "fnrd/io.hpp"
#include "fnrd/study.hpp"
#include "fnrd/table_io.hpp"

namespace fnrd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

inline fs::path default_cache_dir()
{
    if (const char* env = std::getenv("FNRD_CACHE"); env && *env) {
        return env;
    }
    return ".fnrd-cache";
}

namespace detail {

struct CliOptions {
    std::string config_path;
    std::string datum;
    bool quick = false;
    std::string cache_dir;
    std::string out;
    std::optional<int> level;
    std::vector<long> steps;
    std::optional<double> T;
    std::string nonlinearity;
    // estimate-gamma
    std::vector<int> levels{3, 4, 5, 6};
    std::optional<double> s;
};

/// Effective configuration: config file (or a table sidecar's echoed config),
/// then --quick, then explicit flags.
inline StudyConfig effective_config(const CliOptions& o)
{
    StudyConfig c;
    if (!o.config_path.empty()) {
        json j = read_json_file(o.config_path);
        if (j.is_object() && j.contains("config") && j.contains("rows")) {
            j = j.at("config");
        }
        c = StudyConfig::from_json(j);
    }
    if (o.quick && !c.quick) {
        c.apply_quick();
    }
    if (!o.datum.empty()) {
        InitialDatum::parse(o.datum);
        c.datum = o.datum;
    }
    if (o.level) c.ref_level = *o.level;
    if (!o.steps.empty()) c.temporal_steps = o.steps;
    if (o.T) c.T = *o.T;
    if (!o.nonlinearity.empty()) c.nonlinearity = parse_nonlinearity(o.nonlinearity);
    c.cache_dir = o.cache_dir.empty() ? (c.cache_dir ? *c.cache_dir : default_cache_dir()) : fs::path(o.cache_dir);
    return c;
}

inline int run_study(const CliOptions& o, const std::string& protocol, std::ostream& out, std::ostream& err)
{
    StudyConfig config = effective_config(o);
    StudyRunner runner(config, [&err](const std::string& m) { err << m << '\n'; });
    ConvergenceTable table;
    if (protocol == "spatial") {
        table = runner.run_spatial_study();
    } else if (protocol == "temporal") {
        table = runner.run_temporal_study();
    } else {
        table = runner.run_first_step_study();
    }
    const TableFiles files = write_table(table, o.out.empty() ? fs::path("results") : fs::path(o.out));
    write_csv(out, table);
    out << "# wrote " << files.csv.string() << " and " << files.sidecar.string() << '\n';
    if (!table.monotone) {
        err << "warning: errors do not decrease monotonically (reference contamination?)\n";
    }
    for (const auto& row : table.rows) {
        if (row.failed) {
            err << "row " << row.label << " failed: " << row.failure << '\n';
            return kExitNumerical;
        }
    }
    return kExitOk;
}

inline int run_solve(const CliOptions& o, std::ostream& out, std::ostream& err)
{
    StudyConfig config = effective_config(o);
    const int level = o.level.value_or(4);
    const long steps = o.steps.empty() ? 32 : o.steps.front();
    if (o.steps.size() > 1) {
        throw ConfigError("solve takes a single --steps value");
    }
    if (steps < 1) {
        throw ConfigError("--steps must be positive");
    }
    config.ref_level = level;
    config.params.validate();
    const InitialDatum datum = config.make_datum();
    const auto disc = Discretization::create(config.dim, level, config.cache_dir);
    const FemSystem sys(disc, config.params, config.nonlinearity);
    const double dt = config.T / static_cast<double>(steps);
    const State s = integrate(sys, sys.initial_state(datum), dt, steps);

    const fs::path dir = o.out.empty() ? fs::path("results") : fs::path(o.out);
    const std::string stem = "solve_" + datum.name() + "_l" + std::to_string(level) + "_n" + std::to_string(steps);
    write_f64_file(dir / (stem + ".bin"), {s.u.data(), static_cast<std::size_t>(s.u.size())});
    json meta = config.to_json();
    meta["level"] = level;
    meta["steps"] = steps;
    meta["dt"] = dt;
    meta["t"] = s.t;
    meta["n"] = s.u.rows();
    meta["layout"] = "column-major n x 3 float64, little-endian";
    meta["state_hash"] = hash_matrix_bytes(s.u);
    meta["build"] = kBuildDescribe;
    write_json_file(dir / (stem + ".json"), meta);

    out << std::setprecision(10) << "t = " << s.t << "  L2 = " << sobolev_norm(disc->mass(), disc->stiffness(), 0, s.u)
        << "  H1 = " << sobolev_norm(disc->mass(), disc->stiffness(), 1, s.u)
        << "  max|u| = " << s.u.cwiseAbs().maxCoeff() << '\n';
    out << "# wrote " << (dir / (stem + ".bin")).string() << '\n';
    (void)err;
    return kExitOk;
}

inline int run_estimate_gamma(const CliOptions& o, std::ostream& out)
{
    StudyConfig config = effective_config(o);
    const InitialDatum datum = config.make_datum();
    const double s = o.s.value_or(datum.id() == DatumId::kink ? 2.0 : 1.0);
    const GammaEstimate est = estimate_gamma(datum, o.levels, s, config.dim, config.cache_dir);
    json j{{"datum", datum.name()}, {"s", s}, {"levels", est.levels}, {"norms", est.norms},
           {"slope", est.slope}, {"gamma", est.gamma}};
    if (datum.gamma()) {
        j["nominal_gamma"] = *datum.gamma();
    }
    out << j.dump(2) << '\n';
    return kExitOk;
}

inline int run_cache_clear(const CliOptions& o, std::ostream& out)
{
    const fs::path dir = o.cache_dir.empty() ? default_cache_dir() : fs::path(o.cache_dir);
    if (!fs::exists(dir)) {
        out << "cache " << dir.string() << " is empty\n";
        return kExitOk;
    }
    const auto removed = fs::remove_all(dir);
    out << "removed " << removed << " entries from " << dir.string() << '\n';
    return kExitOk;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Exponential Runge-Kutta / P1 finite element solver and convergence studies for the "
                 "Field-Noyes reaction-diffusion system", "fnrd"};
    app.require_subcommand(1);
    detail::CliOptions o;

    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON study config, or a table sidecar to replay");
        sub->add_option("--datum", o.datum, "initial datum: i, ii, iii or iv");
        sub->add_flag("--quick", o.quick, "coarser reference (level 5, dt = 1/10240)");
        sub->add_option("--cache-dir", o.cache_dir, "cache directory (default $FNRD_CACHE or .fnrd-cache)");
        sub->add_option("--out", o.out, "output directory (default results)");
        sub->add_option("--T", o.T, "final time");
        sub->add_option("--nonlinearity", o.nonlinearity, "field-noyes (default) or zero");
    };

    CLI::App* solve = app.add_subcommand("solve", "integrate one configuration and dump the final state");
    add_common(solve);
    solve->add_option("--level", o.level, "mesh level (default 4)");
    solve->add_option("--steps", o.steps, "number of time steps (default 32)");

    CLI::App* study = app.add_subcommand("study", "run a convergence study");
    study->require_subcommand(1);
    std::string protocol;
    for (const char* name : {"spatial", "temporal", "first-step"}) {
        CLI::App* sub = study->add_subcommand(name, std::string(name) + " convergence table");
        add_common(sub);
        sub->add_option("--level", o.level, "reference mesh level");
        sub->add_option("--steps", o.steps, "temporal study step counts")->delimiter(',');
        sub->callback([&protocol, name] { protocol = name; });
    }

    CLI::App* gamma = app.add_subcommand("estimate-gamma", "estimate the regularity exponent of a datum");
    add_common(gamma);
    gamma->add_option("--levels", o.levels, "mesh levels (at least 3)")->delimiter(',');
    gamma->add_option("--s", o.s, "norm exponent (default 1, or 2 for datum iv)");

    CLI::App* cache = app.add_subcommand("cache", "cache maintenance");
    cache->require_subcommand(1);
    CLI::App* clear = cache->add_subcommand("clear", "delete all cached spectra and references");
    clear->add_option("--cache-dir", o.cache_dir, "cache directory");

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) {
        args.emplace_back(argv[i]);
    }
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitConfig;
    }

    try {
        if (solve->parsed()) {
            return detail::run_solve(o, out, err);
        }
        if (study->parsed()) {
            return detail::run_study(o, protocol, out, err);
        }
        if (gamma->parsed()) {
            return detail::run_estimate_gamma(o, out);
        }
        if (clear->parsed()) {
            return detail::run_cache_clear(o, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    err << "error: nothing to do\n";
    return kExitConfig;
}

}  // namespace fnrd
