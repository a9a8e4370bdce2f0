#pragma once

/**
 * @file spectral.hpp
 * @brief Generalized eigendecomposition of the P1 pencil (K, M) and the
 *        operator functions built on it.
 *
 * With K Phi = M Phi diag(theta) and Phi^T M Phi = I, the discrete species
 * operator A_h = -(a K + b M) / M has modal eigenvalues -mu_j with
 * mu_j = a theta_j + b. Every function g of A_h then acts as
 *
 *   g(A_h) v = Phi diag(g(-mu)) Phi^T M v.
 *
 * One decomposition serves all species.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <lapacke.h>

#include "fnrd/assembly.hpp"
#include "fnrd/detail/dense_kernels.hpp"
#include "fnrd/errors.hpp"
#include "fnrd/io.hpp"
#include "fnrd/model.hpp"

namespace fnrd {

inline constexpr Eigen::Index kMaxDenseSpectrumSize = 20000;

// ---------------------------------------------------------------------------
// phi functions
// ---------------------------------------------------------------------------

/// phi_k(z) for k in {0, 1, 2}:
///   phi_0 = e^z,  phi_1 = (e^z - 1)/z,  phi_2 = (e^z - 1 - z)/z^2.
/// For |z| <= 0.1 phi_1 and phi_2 use a 12-term Taylor series.
inline double phi_scalar(int k, double z)
{
    if (k < 0 || k > 2) {
        throw ConfigError("phi_k is provided for k in {0,1,2}, got " + std::to_string(k));
    }
    if (k == 0) {
        return std::exp(z);
    }
    if (std::abs(z) <= 0.1) {
        // phi_k(z) = sum_j z^j / (j + k)!
        constexpr int terms = 12;
        double inv_fact[terms + 2];
        inv_fact[0] = 1.0;
        for (int i = 1; i < terms + 2; ++i) {
            inv_fact[i] = inv_fact[i - 1] / i;
        }
        double sum = inv_fact[terms - 1 + k];
        for (int j = terms - 2; j >= 0; --j) {
            sum = sum * z + inv_fact[j + k];
        }
        return sum;
    }
    const double em1 = std::expm1(z);
    if (k == 1) {
        return em1 / z;
    }
    return (em1 - z) / (z * z);
}

// ---------------------------------------------------------------------------
// Pencil spectrum
// ---------------------------------------------------------------------------

class PencilSpectrum {
public:
    PencilSpectrum(Eigen::VectorXd theta, Eigen::MatrixXd phi) : theta_(std::move(theta)), phi_(std::move(phi))
    {
        if (phi_.rows() != theta_.size() || phi_.cols() != theta_.size()) {
            throw MeshMismatchError("spectrum: eigenvector matrix does not match eigenvalue count");
        }
    }

    [[nodiscard]] Eigen::Index size() const noexcept { return theta_.size(); }
    /// Eigenvalues of K Phi = M Phi diag(theta), ascending, theta_0 = 0.
    [[nodiscard]] const Eigen::VectorXd& theta() const noexcept { return theta_; }
    /// M-orthonormal eigenvectors, one per column.
    [[nodiscard]] const Eigen::MatrixXd& phi() const noexcept { return phi_; }

private:
    Eigen::VectorXd theta_;
    Eigen::MatrixXd phi_;
};

/// Dense generalized symmetric eigensolve of (K, M).
inline PencilSpectrum decompose(const SymSparseMatrix& stiffness, const SymSparseMatrix& mass)
{
    const Eigen::Index n = stiffness.rows();
    if (mass.rows() != n) {
        throw MeshMismatchError("decompose: stiffness is " + std::to_string(n) + "x" + std::to_string(n) +
                                " but mass is " + std::to_string(mass.rows()) + "x" + std::to_string(mass.rows()));
    }
    if (n > kMaxDenseSpectrumSize) {
        throw ConfigError("decompose: dimension " + std::to_string(n) + " exceeds the dense backend limit of " +
                          std::to_string(kMaxDenseSpectrumSize));
    }
    Eigen::MatrixXd a = stiffness.dense();
    Eigen::MatrixXd b = mass.dense();
    Eigen::VectorXd w(n);
    const lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'U', static_cast<lapack_int>(n), a.data(),
                                           static_cast<lapack_int>(n), b.data(), static_cast<lapack_int>(n), w.data());
    if (info != 0) {
        throw DecompositionError("generalized eigensolver failed (dsygvd info = " + std::to_string(info) + ")");
    }
    if (!w.allFinite() || !a.allFinite()) {
        throw DecompositionError("generalized eigensolver returned non-finite values");
    }
    // The Neumann kernel must map to mu = b exactly.
    const double cutoff = 1e-10 * std::max(w[n - 1], 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (w[j] < cutoff) {
            w[j] = 0.0;
        }
    }
    // Sign convention: first non-negligible entry of each eigenvector positive.
    for (Eigen::Index j = 0; j < n; ++j) {
        auto col = a.col(j);
        const double tol = 1e-8 * col.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(col[i]) > tol) {
                if (col[i] < 0.0) {
                    col = -col;
                }
                break;
            }
        }
    }
    return PencilSpectrum(std::move(w), std::move(a));
}

// ---------------------------------------------------------------------------
// Species operators and operator functions
// ---------------------------------------------------------------------------

/// Discrete a * Laplacian - b under Neumann conditions, for one species.
struct SpeciesOperator {
    int species = 0;
    double a = 1.0;
    double b = 1.0;

    static SpeciesOperator for_species(const ModelParams& params, int species)
    {
        return SpeciesOperator{species, params.a[static_cast<std::size_t>(species)], params.b(species)};
    }

    /// mu_j = a theta_j + b (the spectrum of -A_h).
    [[nodiscard]] Eigen::VectorXd rates(const PencilSpectrum& spec) const
    {
        return (a * spec.theta().array() + b).matrix();
    }
};

class OperatorFunction {
public:
    enum class Kind { exp, phi1, phi2, frac_power };

    static OperatorFunction exp() { return OperatorFunction(Kind::exp, 0.0); }
    static OperatorFunction phi1() { return OperatorFunction(Kind::phi1, 0.0); }
    static OperatorFunction phi2() { return OperatorFunction(Kind::phi2, 0.0); }
    /// mu^s, i.e. (-A_h)^s; s in [-2, 2].
    static OperatorFunction frac_power(double s)
    {
        if (!(s >= -2.0 && s <= 2.0)) {
            throw ConfigError("fractional power exponent must lie in [-2, 2], got " + std::to_string(s));
        }
        return OperatorFunction(Kind::frac_power, s);
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double exponent() const noexcept { return s_; }

    /// Modal multiplier for eigenvalue -mu of A_h at time t.
    [[nodiscard]] double operator()(double mu, double t) const
    {
        switch (kind_) {
        case Kind::exp: return std::exp(-t * mu);
        case Kind::phi1: return phi_scalar(1, -t * mu);
        case Kind::phi2: return phi_scalar(2, -t * mu);
        case Kind::frac_power: return std::pow(mu, s_);
        }
        return 0.0;
    }

private:
    OperatorFunction(Kind kind, double s) : kind_(kind), s_(s) {}

    Kind kind_;
    double s_;
};

// ---------------------------------------------------------------------------
// Modal transforms and norms
// ---------------------------------------------------------------------------

enum class ModalDirection { to_modal, from_modal };

namespace detail {

inline void check_rows(const PencilSpectrum& spec, Eigen::Index rows, const char* what)
{
    if (rows != spec.size()) {
        throw MeshMismatchError(std::string(what) + ": vector length " + std::to_string(rows) +
                                " does not match spectrum size " + std::to_string(spec.size()));
    }
}

}  // namespace detail

/// to_modal: c = Phi^T M v.  from_modal: v = Phi c.  Columns are transformed independently.
inline Eigen::MatrixXd modal_transform(const PencilSpectrum& spec, const SymSparseMatrix& mass,
                                       const Eigen::Ref<const Eigen::MatrixXd>& v, ModalDirection direction)
{
    detail::check_rows(spec, v.rows(), "modal_transform");
    if (direction == ModalDirection::to_modal) {
        if (mass.rows() != spec.size()) {
            throw MeshMismatchError("modal_transform: mass matrix does not match spectrum");
        }
        const Eigen::MatrixXd mv = mass * v;
        return detail::transpose_times(spec.phi(), mv);
    }
    return detail::times(spec.phi(), v);
}

/// fn(A_h) v for one species operator.
inline Eigen::MatrixXd apply_operator_function(const PencilSpectrum& spec, const SymSparseMatrix& mass,
                                               const SpeciesOperator& op, const OperatorFunction& fn, double t,
                                               const Eigen::Ref<const Eigen::MatrixXd>& v)
{
    if (fn.kind() != OperatorFunction::Kind::frac_power && !(t >= 0.0)) {
        throw ConfigError("operator function time must be non-negative, got " + std::to_string(t));
    }
    Eigen::MatrixXd c = modal_transform(spec, mass, v, ModalDirection::to_modal);
    const Eigen::VectorXd mu = op.rates(spec);
    for (Eigen::Index j = 0; j < mu.size(); ++j) {
        c.row(j) *= fn(mu[j], t);
    }
    return modal_transform(spec, mass, c, ModalDirection::from_modal);
}

/// ||(-A_h)^{s/2} v|| = sqrt(sum_j mu_j^s c_j^2).
inline double fractional_norm(const PencilSpectrum& spec, const SymSparseMatrix& mass, const SpeciesOperator& op,
                              double s, const Eigen::Ref<const Eigen::VectorXd>& v)
{
    if (!(s >= -2.0 && s <= 2.0)) {
        throw ConfigError("fractional norm exponent must lie in [-2, 2], got " + std::to_string(s));
    }
    const Eigen::VectorXd c = modal_transform(spec, mass, v, ModalDirection::to_modal);
    const Eigen::VectorXd mu = op.rates(spec);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < c.size(); ++j) {
        sum += std::pow(mu[j], s) * c[j] * c[j];
    }
    return std::sqrt(sum);
}

/// L2 (order 0) or H1 (order 1) norm of a P1 function; several columns
/// (species) combine in the Euclidean sense.
inline double sobolev_norm(const SymSparseMatrix& mass, const SymSparseMatrix& stiffness, int order,
                           const Eigen::Ref<const Eigen::MatrixXd>& v)
{
    if (order != 0 && order != 1) {
        throw ConfigError("Sobolev norm order must be 0 or 1");
    }
    const Eigen::MatrixXd mv = mass * v;
    double sum = (v.array() * mv.array()).sum();
    if (order == 1) {
        const Eigen::MatrixXd kv = stiffness * v;
        sum += (v.array() * kv.array()).sum();
    }
    return std::sqrt(std::max(sum, 0.0));
}

// ---------------------------------------------------------------------------
// On-disk spectrum cache: theta.bin, phi.bin (flat little-endian float64,
// Phi column-major) and spectrum.json.
// ---------------------------------------------------------------------------

inline std::string pencil_hash(const SymSparseMatrix& stiffness, const SymSparseMatrix& mass)
{
    ContentHash h;
    for (const SymSparseMatrix* m : {&stiffness, &mass}) {
        const SparseMatrix& u = m->upper();
        h.value(static_cast<std::int64_t>(u.rows())).value(static_cast<std::int64_t>(u.nonZeros()));
        h.values(std::span<const int>(u.outerIndexPtr(), static_cast<std::size_t>(u.outerSize() + 1)));
        h.values(std::span<const int>(u.innerIndexPtr(), static_cast<std::size_t>(u.nonZeros())));
        h.values(std::span<const double>(u.valuePtr(), static_cast<std::size_t>(u.nonZeros())));
    }
    return h.hex();
}

struct SpectrumKey {
    int dim = 2;
    int level = 1;
    std::string pencil_hash;
};

inline void save_spectrum(const fs::path& dir, const PencilSpectrum& spec, const SpectrumKey& key)
{
    fs::create_directories(dir);
    write_f64_file(dir / "theta.bin", {spec.theta().data(), static_cast<std::size_t>(spec.size())});
    write_f64_file(dir / "phi.bin", {spec.phi().data(), static_cast<std::size_t>(spec.phi().size())});
    write_json_file(dir / "spectrum.json", json{{"dim", key.dim},
                                                {"level", key.level},
                                                {"n", spec.size()},
                                                {"pencil_hash", key.pencil_hash},
                                                {"theta_hash", hash_matrix_bytes(spec.theta())}});
}

/// Loads a cached spectrum; nullopt when missing or when the sidecar does not
/// match `key`.
inline std::optional<PencilSpectrum> load_spectrum(const fs::path& dir, const SpectrumKey& key)
{
    const fs::path meta_path = dir / "spectrum.json";
    if (!fs::exists(meta_path) || !fs::exists(dir / "theta.bin") || !fs::exists(dir / "phi.bin")) {
        return std::nullopt;
    }
    try {
        const json meta = read_json_file(meta_path);
        if (meta.at("dim").get<int>() != key.dim || meta.at("level").get<int>() != key.level ||
            meta.at("pencil_hash").get<std::string>() != key.pencil_hash) {
            return std::nullopt;
        }
        const auto n = meta.at("n").get<Eigen::Index>();
        auto theta = read_f64_file(dir / "theta.bin", n);
        auto phi = read_f64_file(dir / "phi.bin", n * n);
        Eigen::VectorXd t = Eigen::Map<Eigen::VectorXd>(theta.data(), n);
        if (hash_matrix_bytes(t) != meta.at("theta_hash").get<std::string>()) {
            return std::nullopt;
        }
        return PencilSpectrum(std::move(t), Eigen::Map<Eigen::MatrixXd>(phi.data(), n, n));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace fnrd
