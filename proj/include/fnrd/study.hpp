#pragma once

/**
 * @file study.hpp
 * @brief Convergence studies against a fine reference solution: spatial
 *        (mesh refinement at the reference step), temporal (step refinement on
 *        the reference mesh) and first-step errors, plus an empirical estimate
 *        of the regularity exponent of an initial datum.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fnrd/assembly.hpp"
#include "fnrd/discretization.hpp"
#include "fnrd/errors.hpp"
#include "fnrd/integrator.hpp"
#include "fnrd/io.hpp"
#include "fnrd/model.hpp"
#include "fnrd/spectral.hpp"

#ifndef FNRD_BUILD_DESCRIBE
#define FNRD_BUILD_DESCRIBE "unknown"
#endif

namespace fnrd {

inline constexpr const char* kBuildDescribe = FNRD_BUILD_DESCRIBE;

// Bumped whenever a change would alter reference states bit-for-bit.
inline constexpr int kReferenceFormat = 1;

inline const char* to_string(NonlinearityMode mode)
{
    switch (mode) {
    case NonlinearityMode::field_noyes: return "field-noyes";
    case NonlinearityMode::zero: return "zero";
    case NonlinearityMode::supplied: return "supplied";
    }
    return "?";
}

inline NonlinearityMode parse_nonlinearity(const std::string& s)
{
    if (s == "field-noyes") return NonlinearityMode::field_noyes;
    if (s == "zero") return NonlinearityMode::zero;
    throw ConfigError("unknown nonlinearity '" + s + "' (expected field-noyes or zero)");
}

/// Whether `value` is an integer multiple of `unit` up to rounding.
inline std::optional<long> integer_ratio(double value, double unit)
{
    if (!(unit > 0.0) || !(value > 0.0)) {
        return std::nullopt;
    }
    const double r = value / unit;
    const long n = std::lround(r);
    if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-9 * std::max(1.0, r)) {
        return std::nullopt;
    }
    return n;
}

struct StudyConfig {
    int dim = 2;
    ModelParams params;
    /// "i".."iv", or "custom" with datum_value or datum_file.
    std::string datum = "iii";
    std::optional<double> datum_value;
    std::optional<std::string> datum_file;
    int datum_level = 0;
    std::optional<double> datum_gamma;

    double T = 0.1;
    int ref_level = 6;
    double ref_dt = 1.0 / 40960.0;
    double first_step_ref_dt = 1.0 / 40960.0;
    std::vector<int> spatial_levels{2, 3, 4};
    std::vector<long> temporal_steps{32, 64, 128, 256};
    std::vector<double> first_step_dts{0.1 / 128, 0.1 / 256, 0.1 / 512, 0.1 / 1024};
    bool quick = false;
    NonlinearityMode nonlinearity = NonlinearityMode::field_noyes;
    /// Not part of the configuration identity.
    std::optional<fs::path> cache_dir;

    /// Coarser reference for CI runs; first_step_ref_dt is left alone.
    void apply_quick()
    {
        quick = true;
        ref_level = 5;
        ref_dt = 1.0 / 10240.0;
    }

    [[nodiscard]] InitialDatum make_datum() const
    {
        if (datum != "custom") {
            return InitialDatum::parse(datum);
        }
        if (datum_value && datum_file) {
            throw ConfigError("custom datum: give either datum_value or datum_file, not both");
        }
        if (datum_value) {
            return InitialDatum::constant(*datum_value, datum_gamma);
        }
        if (datum_file) {
            if (datum_level < 1) {
                throw ConfigError("custom datum file needs datum_level");
            }
            const Mesh mesh(dim, datum_level);
            return InitialDatum::nodal(dim, datum_level, read_f64_file(*datum_file, mesh.num_nodes()), datum_gamma);
        }
        throw ConfigError("custom datum needs datum_value or datum_file");
    }

    void validate() const
    {
        params.validate();
        if (dim != 1 && dim != 2) {
            throw ConfigError("dim must be 1 or 2");
        }
        const InitialDatum d = make_datum();
        if (d.requires_2d() && dim != 2) {
            throw ConfigError("datum " + d.name() + " is defined on the unit square only");
        }
        if (!(T > 0.0) || !std::isfinite(T)) {
            throw ConfigError("T must be positive");
        }
        if (ref_level < 1 || ref_level > kMaxMeshLevel) {
            throw ConfigError("ref_level must lie in [1, " + std::to_string(kMaxMeshLevel) + "]");
        }
        if (!integer_ratio(T, ref_dt)) {
            throw ConfigError("ref_dt must divide T");
        }
        for (int level : spatial_levels) {
            if (level < 1 || level >= ref_level) {
                throw ConfigError("spatial study levels must lie in [1, ref_level)");
            }
        }
        for (long n : temporal_steps) {
            if (n < 1 || !integer_ratio(T / static_cast<double>(n), ref_dt)) {
                throw ConfigError("temporal step count " + std::to_string(n) +
                                  " gives a step that is not a multiple of ref_dt");
            }
        }
        for (double dt : first_step_dts) {
            if (!(dt <= T) || !integer_ratio(dt, first_step_ref_dt)) {
                throw ConfigError("first-step dt " + std::to_string(dt) +
                                  " is not a multiple of first_step_ref_dt (or exceeds T)");
            }
        }
    }

    [[nodiscard]] json to_json() const
    {
        json j{{"dim", dim},
               {"params",
                {{"a", params.a},
                 {"lambda", params.lambda},
                 {"delta", params.delta},
                 {"rho", params.rho},
                 {"c", params.c}}},
               {"datum", datum},
               {"T", T},
               {"ref_level", ref_level},
               {"ref_dt", ref_dt},
               {"first_step_ref_dt", first_step_ref_dt},
               {"spatial_levels", spatial_levels},
               {"temporal_steps", temporal_steps},
               {"first_step_dts", first_step_dts},
               {"quick", quick},
               {"nonlinearity", to_string(nonlinearity)}};
        if (datum_value) j["datum_value"] = *datum_value;
        if (datum_file) j["datum_file"] = *datum_file;
        if (datum_level > 0) j["datum_level"] = datum_level;
        if (datum_gamma) j["datum_gamma"] = *datum_gamma;
        return j;
    }

    /// Missing keys keep their defaults; unknown keys are rejected. `quick` is
    /// recorded but not re-applied: the stored levels and steps already reflect it.
    static StudyConfig from_json(const json& j)
    {
        static const std::vector<std::string> known{"dim", "params", "datum", "datum_value", "datum_file",
                                                    "datum_level", "datum_gamma", "T", "ref_level", "ref_dt",
                                                    "first_step_ref_dt", "spatial_levels", "temporal_steps",
                                                    "first_step_dts", "quick", "nonlinearity", "cache_dir"};
        if (!j.is_object()) {
            throw ConfigError("study config must be a JSON object");
        }
        for (const auto& [key, _] : j.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end()) {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
        StudyConfig c;
        try {
            if (j.contains("dim")) c.dim = j.at("dim").get<int>();
            if (j.contains("params")) {
                const json& p = j.at("params");
                for (const auto& [key, _] : p.items()) {
                    if (key != "a" && key != "lambda" && key != "delta" && key != "rho" && key != "c") {
                        throw ConfigError("unknown model parameter '" + key + "'");
                    }
                }
                if (p.contains("a")) c.params.a = p.at("a").get<std::array<double, 3>>();
                if (p.contains("lambda")) c.params.lambda = p.at("lambda").get<double>();
                if (p.contains("delta")) c.params.delta = p.at("delta").get<double>();
                if (p.contains("rho")) c.params.rho = p.at("rho").get<double>();
                if (p.contains("c")) c.params.c = p.at("c").get<double>();
            }
            if (j.contains("datum")) c.datum = j.at("datum").get<std::string>();
            if (j.contains("datum_value")) c.datum_value = j.at("datum_value").get<double>();
            if (j.contains("datum_file")) c.datum_file = j.at("datum_file").get<std::string>();
            if (j.contains("datum_level")) c.datum_level = j.at("datum_level").get<int>();
            if (j.contains("datum_gamma")) c.datum_gamma = j.at("datum_gamma").get<double>();
            if (j.contains("T")) c.T = j.at("T").get<double>();
            if (j.contains("ref_level")) c.ref_level = j.at("ref_level").get<int>();
            if (j.contains("ref_dt")) c.ref_dt = j.at("ref_dt").get<double>();
            if (j.contains("first_step_ref_dt")) c.first_step_ref_dt = j.at("first_step_ref_dt").get<double>();
            if (j.contains("spatial_levels")) c.spatial_levels = j.at("spatial_levels").get<std::vector<int>>();
            if (j.contains("temporal_steps")) c.temporal_steps = j.at("temporal_steps").get<std::vector<long>>();
            if (j.contains("first_step_dts")) c.first_step_dts = j.at("first_step_dts").get<std::vector<double>>();
            if (j.contains("quick")) c.quick = j.at("quick").get<bool>();
            if (j.contains("nonlinearity")) c.nonlinearity = parse_nonlinearity(j.at("nonlinearity").get<std::string>());
            if (j.contains("cache_dir")) c.cache_dir = j.at("cache_dir").get<std::string>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("malformed study config: ") + e.what());
        }
        return c;
    }

    /// Identity of the initial value problem (everything except resolutions).
    [[nodiscard]] json problem_json() const
    {
        json j{{"format", kReferenceFormat},
               {"dim", dim},
               {"params", to_json().at("params")},
               {"datum", datum},
               {"nonlinearity", to_string(nonlinearity)}};
        if (datum_value) j["datum_value"] = *datum_value;
        if (datum_file) {
            const auto values = read_f64_file(*datum_file);
            j["datum_file_hash"] = ContentHash().values(std::span<const double>(values)).hex();
            j["datum_level"] = datum_level;
        }
        return j;
    }
};

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

struct ConvergenceRow {
    std::string label;
    /// h, dt, or step count depending on the protocol.
    double resolution = 0.0;
    std::optional<double> error_l2;
    std::optional<double> order_l2;
    std::optional<double> error_h1;
    std::optional<double> order_h1;
    bool failed = false;
    std::string failure;
};

struct ConvergenceTable {
    /// "spatial", "temporal" or "first-step".
    std::string protocol;
    std::string datum;
    std::string config_hash;
    std::vector<ConvergenceRow> rows;
    /// False when some error fails to decrease down the table.
    bool monotone = true;
    json config;
    std::optional<RateRecord> theory;
};

/// log2(e_coarse / e_fine); nullopt unless both errors are positive and finite.
inline std::optional<double> observed_order(double e_coarse, double e_fine)
{
    if (!(e_coarse > 0.0) || !(e_fine > 0.0) || !std::isfinite(e_coarse) || !std::isfinite(e_fine)) {
        return std::nullopt;
    }
    return std::log2(e_coarse / e_fine);
}

/// Fills order columns and the monotonicity flag from the error columns.
inline void finalize_orders(ConvergenceTable& table)
{
    table.monotone = true;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        auto& row = table.rows[r];
        row.order_l2.reset();
        row.order_h1.reset();
        if (r == 0) {
            continue;
        }
        const auto& prev = table.rows[r - 1];
        if (prev.error_l2 && row.error_l2) {
            row.order_l2 = observed_order(*prev.error_l2, *row.error_l2);
            if (!(*row.error_l2 < *prev.error_l2)) table.monotone = false;
        }
        if (prev.error_h1 && row.error_h1) {
            row.order_h1 = observed_order(*prev.error_h1, *row.error_h1);
            if (!(*row.error_h1 < *prev.error_h1)) table.monotone = false;
        }
    }
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

using LogSink = std::function<void(const std::string&)>;

inline void log_to_stderr(const std::string& msg) { std::cerr << msg << '\n'; }

/// Three-species L2 (order 0) or H1 (order 1) norm of a - b on disc's mesh.
inline double compute_error(const Discretization& disc, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            int order)
{
    if (a.rows() != disc.mesh().num_nodes() || b.rows() != a.rows() || a.cols() != b.cols()) {
        throw MeshMismatchError("compute_error: states do not live on the level " +
                                std::to_string(disc.mesh().level()) + " mesh");
    }
    return sobolev_norm(disc.mass(), disc.stiffness(), order, a - b);
}

class StudyRunner {
public:
    explicit StudyRunner(StudyConfig config, LogSink log = log_to_stderr)
        : config_(std::move(config)), log_(std::move(log)), datum_(config_.make_datum())
    {
        config_.validate();
    }

    [[nodiscard]] const StudyConfig& config() const noexcept { return config_; }
    [[nodiscard]] const InitialDatum& datum() const noexcept { return datum_; }

    /// Shared per-level discretization (spectra go through the disk cache when configured).
    DiscretizationPtr discretization(int level)
    {
        auto it = discs_.find(level);
        if (it != discs_.end()) {
            return it->second;
        }
        auto disc = Discretization::create(config_.dim, level, config_.cache_dir);
        if (!disc->spectrum_from_cache() && disc->mesh().num_nodes() > 1000) {
            log("computed spectrum for level " + std::to_string(level));
        }
        discs_.emplace(level, disc);
        return disc;
    }

    [[nodiscard]] FemSystem system(int level) { return FemSystem(discretization(level), config_.params, config_.nonlinearity); }

    /// Cache key of the reference state at `t_end` computed with step `dt` on the reference mesh.
    [[nodiscard]] std::string reference_hash(long steps, double dt) const
    {
        json key = config_.problem_json();
        key["level"] = config_.ref_level;
        key["dt"] = dt;
        key["steps"] = steps;
        return ContentHash().text(key.dump()).hex();
    }

    /// Reference states on the reference mesh at each requested time, all with
    /// step `dt`. Missing entries are computed in one integration with snapshots.
    std::vector<State> compute_references(const std::vector<double>& t_ends, double dt)
    {
        std::vector<long> steps;
        for (double t : t_ends) {
            const auto n = integer_ratio(t, dt);
            if (!n) {
                throw ConfigError("reference time " + std::to_string(t) + " is not a multiple of " + std::to_string(dt));
            }
            steps.push_back(*n);
        }
        std::vector<std::optional<State>> out(t_ends.size());
        std::vector<long> missing;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            out[i] = load_reference(steps[i], dt);
            if (!out[i] && std::find(missing.begin(), missing.end(), steps[i]) == missing.end()) {
                missing.push_back(steps[i]);
            }
        }
        if (!missing.empty()) {
            const FemSystem sys = system(config_.ref_level);
            const State s0 = sys.initial_state(datum_);
            const long last = *std::max_element(missing.begin(), missing.end());
            log("integrating reference: level " + std::to_string(config_.ref_level) + ", " + std::to_string(last) +
                " steps of " + std::to_string(dt));
            std::map<long, State> snaps;
            IntegrateOptions opts;
            opts.snapshot_steps = missing;
            opts.hook = [&](long k, const State& s) {
                snaps.emplace(k, s);
                store_reference(k, dt, s);
            };
            (void)integrate(sys, s0, dt, last, opts);
            for (std::size_t i = 0; i < steps.size(); ++i) {
                if (!out[i]) {
                    out[i] = snaps.at(steps[i]);
                }
            }
        }
        std::vector<State> result;
        for (auto& s : out) {
            result.push_back(std::move(*s));
        }
        return result;
    }

    State compute_reference(double t_end, double dt) { return compute_references({t_end}, dt).front(); }

    /// Each study level integrated with the reference step, compared on the reference mesh.
    ConvergenceTable run_spatial_study()
    {
        ConvergenceTable table = make_table("spatial");
        const State ref = compute_reference(config_.T, config_.ref_dt);
        const DiscretizationPtr fine = discretization(config_.ref_level);
        const long n = *integer_ratio(config_.T, config_.ref_dt);
        for (int level : config_.spatial_levels) {
            ConvergenceRow row;
            row.label = "1/" + std::to_string(1L << level);
            row.resolution = std::ldexp(1.0, -level);
            run_row(row, [&] {
                const FemSystem sys = system(level);
                const State s = integrate(sys, sys.initial_state(datum_), config_.ref_dt, n);
                const Eigen::MatrixXd up = prolong(sys.discretization().mesh(), fine->mesh(), s.u);
                return std::pair{compute_error(*fine, ref.u, up, 0), compute_error(*fine, ref.u, up, 1)};
            });
            table.rows.push_back(std::move(row));
        }
        finalize_orders(table);
        return table;
    }

    /// N steps of T/N on the reference mesh.
    ConvergenceTable run_temporal_study()
    {
        ConvergenceTable table = make_table("temporal");
        const State ref = compute_reference(config_.T, config_.ref_dt);
        const DiscretizationPtr fine = discretization(config_.ref_level);
        const FemSystem sys = system(config_.ref_level);
        const State s0 = sys.initial_state(datum_);
        for (long n : config_.temporal_steps) {
            ConvergenceRow row;
            row.label = std::to_string(n);
            row.resolution = static_cast<double>(n);
            run_row(row, [&] {
                const State s = integrate(sys, s0, config_.T / static_cast<double>(n), n);
                return std::pair{compute_error(*fine, ref.u, s.u, 0), compute_error(*fine, ref.u, s.u, 1)};
            });
            table.rows.push_back(std::move(row));
        }
        finalize_orders(table);
        return table;
    }

    /// One step of size dt against a reference at t = dt.
    ConvergenceTable run_first_step_study()
    {
        ConvergenceTable table = make_table("first-step");
        const std::vector<State> refs = compute_references(config_.first_step_dts, config_.first_step_ref_dt);
        const DiscretizationPtr fine = discretization(config_.ref_level);
        const FemSystem sys = system(config_.ref_level);
        const State s0 = sys.initial_state(datum_);
        for (std::size_t i = 0; i < config_.first_step_dts.size(); ++i) {
            const double dt = config_.first_step_dts[i];
            ConvergenceRow row;
            row.label = format_step_label(dt);
            row.resolution = dt;
            run_row(row, [&] {
                const State s = erk2_step(sys, s0, dt);
                return std::pair{compute_error(*fine, refs[i].u, s.u, 0), compute_error(*fine, refs[i].u, s.u, 1)};
            });
            table.rows.push_back(std::move(row));
        }
        finalize_orders(table);
        return table;
    }

private:
    void log(const std::string& msg) const
    {
        if (log_) {
            log_(msg);
        }
    }

    [[nodiscard]] std::string format_step_label(double dt) const
    {
        // T/2^k when exact, else the plain value.
        const double r = config_.T / dt;
        const long n = std::lround(r);
        if (n > 0 && (n & (n - 1)) == 0 && std::abs(r - static_cast<double>(n)) < 1e-9 * r) {
            int k = 0;
            while ((1L << k) < n) ++k;
            std::ostringstream os;
            os << config_.T << "/2^" << k;
            return os.str();
        }
        std::ostringstream os;
        os << dt;
        return os.str();
    }

    [[nodiscard]] ConvergenceTable make_table(const std::string& protocol) const
    {
        ConvergenceTable t;
        t.protocol = protocol;
        t.datum = datum_.name();
        t.config = config_.to_json();
        t.config_hash = ContentHash().text(t.config.dump()).hex();
        if (datum_.gamma()) {
            t.theory = rates_for_gamma(*datum_.gamma());
        }
        return t;
    }

    template <class Fn>
    void run_row(ConvergenceRow& row, Fn&& fn)
    {
        try {
            const auto [l2, h1] = fn();
            row.error_l2 = l2;
            row.error_h1 = h1;
        } catch (const NumericalError& e) {
            row.failed = true;
            row.failure = e.what();
            log("row " + row.label + " failed: " + e.what());
        }
    }

    [[nodiscard]] std::optional<fs::path> reference_dir(long steps, double dt) const
    {
        if (!config_.cache_dir) {
            return std::nullopt;
        }
        return *config_.cache_dir / reference_hash(steps, dt);
    }

    std::optional<State> load_reference(long steps, double dt)
    {
        const auto key = std::pair{steps, dt};
        if (auto it = memo_.find(key); it != memo_.end()) {
            return it->second;
        }
        const auto dir = reference_dir(steps, dt);
        if (!dir || !fs::exists(*dir / "meta.json")) {
            return std::nullopt;
        }
        try {
            const json meta = read_json_file(*dir / "meta.json");
            const auto n = meta.at("n").get<Eigen::Index>();
            auto values = read_f64_file(*dir / "state.bin", n * kNumSpecies);
            State s{meta.at("t").get<double>(), Eigen::Map<Eigen::MatrixXd>(values.data(), n, kNumSpecies)};
            if (hash_matrix_bytes(s.u) != meta.at("state_hash").get<std::string>() ||
                meta.at("config_hash").get<std::string>() != reference_hash(steps, dt)) {
                log("warning: reference cache entry " + dir->string() + " failed verification; recomputing");
                return std::nullopt;
            }
            memo_.emplace(key, s);
            return s;
        } catch (const std::exception& e) {
            log("warning: unreadable reference cache entry " + dir->string() + " (" + e.what() + "); recomputing");
            return std::nullopt;
        }
    }

    void store_reference(long steps, double dt, const State& s)
    {
        memo_[{steps, dt}] = s;
        const auto dir = reference_dir(steps, dt);
        if (!dir) {
            return;
        }
        write_f64_file(*dir / "state.bin", {s.u.data(), static_cast<std::size_t>(s.u.size())});
        json meta = config_.problem_json();
        meta["level"] = config_.ref_level;
        meta["dt"] = dt;
        meta["steps"] = steps;
        meta["t"] = s.t;
        meta["n"] = s.u.rows();
        meta["state_hash"] = hash_matrix_bytes(s.u);
        meta["config_hash"] = reference_hash(steps, dt);
        meta["build"] = kBuildDescribe;
        write_json_file(*dir / "meta.json", meta);
    }

    StudyConfig config_;
    LogSink log_;
    InitialDatum datum_;
    std::map<int, DiscretizationPtr> discs_;
    std::map<std::pair<long, double>, State> memo_;
};

// ---------------------------------------------------------------------------
// Regularity estimate
// ---------------------------------------------------------------------------

struct GammaEstimate {
    double gamma = 0.0;
    double slope = 0.0;
    std::vector<int> levels;
    std::vector<double> norms;
};

/// ||(-A_h)^{s/2} v|| with the unit operator (a = b = 1). Integer s use the
/// sparse matrices directly; other s need the pencil spectrum.
inline double unit_operator_norm(const SymSparseMatrix& m, const SymSparseMatrix& k, const MassSolver& solver,
                                 const std::function<const PencilSpectrum&()>& spectrum, double s,
                                 const Eigen::VectorXd& v)
{
    if (s == 0.0) {
        return std::sqrt(m.bilinear(v, v));
    }
    if (s == 1.0) {
        return std::sqrt(k.bilinear(v, v) + m.bilinear(v, v));
    }
    if (s == 2.0) {
        const Eigen::VectorXd w = solver.solve(k * v + m * v);
        return std::sqrt(m.bilinear(w, w));
    }
    return fractional_norm(spectrum(), m, SpeciesOperator{0, 1.0, 1.0}, s, v);
}

/// Least-squares slope of log ||(-A_h)^{s/2} P_h u0|| against log h over the
/// given levels; gamma = s + slope.
inline GammaEstimate estimate_gamma(const InitialDatum& datum, const std::vector<int>& levels, double s, int dim = 2,
                                    const std::optional<fs::path>& cache_dir = std::nullopt)
{
    if (levels.size() < 3) {
        throw ConfigError("estimate_gamma needs at least 3 levels, got " + std::to_string(levels.size()));
    }
    if (!(s >= 0.0 && s <= 2.0)) {
        throw ConfigError("estimate_gamma: s must lie in [0, 2]");
    }
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (levels[i] <= levels[i - 1]) {
            throw ConfigError("estimate_gamma: levels must be strictly ascending");
        }
    }
    GammaEstimate est;
    est.levels = levels;
    std::vector<double> x;
    std::vector<double> y;
    for (int level : levels) {
        const Mesh mesh(dim, level);
        const SymSparseMatrix m = assemble_mass(mesh);
        const SymSparseMatrix k = assemble_stiffness(mesh);
        const MassSolver solver(m);
        DiscretizationPtr disc;
        auto spectrum = [&]() -> const PencilSpectrum& {
            if (!disc) {
                disc = Discretization::create(dim, level, cache_dir);
            }
            return disc->spectrum();
        };
        const Eigen::VectorXd v = project_datum(mesh, solver, datum);
        const double n = unit_operator_norm(m, k, solver, spectrum, s, v);
        est.norms.push_back(n);
        x.push_back(std::log(mesh.h()));
        y.push_back(std::log(n));
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    est.slope = sxy / sxx;
    est.gamma = s + est.slope;
    return est;
}

}  // namespace fnrd
