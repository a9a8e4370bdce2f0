#pragma once

/**
 * @file discretization.hpp
 * @brief Mesh, P1 matrices, mass factorization and pencil spectrum for one
 *        (dim, level), built once and shared read-only.
 */

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "fnrd/assembly.hpp"
#include "fnrd/mesh.hpp"
#include "fnrd/spectral.hpp"

namespace fnrd {

class Discretization {
public:
    /// Builds everything for (dim, level). With a cache directory, the
    /// spectrum is loaded from / stored to `<cache>/spectra/d<dim>-l<level>-<hash>/`.
    static std::shared_ptr<const Discretization> create(int dim, int level,
                                                        const std::optional<fs::path>& cache_dir = std::nullopt)
    {
        return std::shared_ptr<const Discretization>(new Discretization(dim, level, cache_dir));
    }

    Discretization(const Discretization&) = delete;
    Discretization& operator=(const Discretization&) = delete;

    [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] const SymSparseMatrix& mass() const noexcept { return mass_; }
    [[nodiscard]] const SymSparseMatrix& stiffness() const noexcept { return stiffness_; }
    [[nodiscard]] const MassSolver& mass_solver() const noexcept { return solver_; }
    [[nodiscard]] const PencilSpectrum& spectrum() const noexcept { return *spectrum_; }
    [[nodiscard]] const std::string& pencil_hash() const noexcept { return hash_; }
    [[nodiscard]] bool spectrum_from_cache() const noexcept { return from_cache_; }

private:
    Discretization(int dim, int level, const std::optional<fs::path>& cache_dir)
        : mesh_(dim, level),
          mass_(assemble_mass(mesh_)),
          stiffness_(assemble_stiffness(mesh_)),
          solver_(mass_),
          hash_(fnrd::pencil_hash(stiffness_, mass_))
    {
        const SpectrumKey key{dim, level, hash_};
        std::optional<fs::path> dir;
        if (cache_dir) {
            dir = *cache_dir / "spectra" / ("d" + std::to_string(dim) + "-l" + std::to_string(level) + "-" + hash_);
            if (auto cached = load_spectrum(*dir, key)) {
                spectrum_ = std::move(*cached);
                from_cache_ = true;
                return;
            }
        }
        spectrum_ = decompose(stiffness_, mass_);
        if (dir) {
            save_spectrum(*dir, *spectrum_, key);
        }
    }

    Mesh mesh_;
    SymSparseMatrix mass_;
    SymSparseMatrix stiffness_;
    MassSolver solver_;
    std::string hash_;
    std::optional<PencilSpectrum> spectrum_;
    bool from_cache_ = false;
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;

}  // namespace fnrd
