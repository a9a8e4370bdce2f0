#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fnrd/assembly.hpp"
#include "oracles.hpp"

using namespace fnrd;

TEST(Mass, OneDimensionalLevelOne)
{
    const Eigen::MatrixXd m = assemble_mass(build_mesh(1, 1)).dense();
    Eigen::Matrix3d expected;
    expected << 2, 1, 0, 1, 4, 1, 0, 1, 2;
    expected /= 12.0;
    EXPECT_LE((m - expected).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Stiffness, OneDimensionalLevelOne)
{
    const Eigen::MatrixXd k = assemble_stiffness(build_mesh(1, 1)).dense();
    Eigen::Matrix3d expected;
    expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    expected /= 0.5;
    EXPECT_LE((k - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Stiffness, RightTriangleElementMatrix)
{
    for (double h : {1.0, 0.25, 1.0 / 64}) {
        const Eigen::Matrix3d k = element_stiffness(2, {Point{0, 0}, Point{h, 0}, Point{0, h}});
        Eigen::Matrix3d expected;
        expected << 2, -1, -1, -1, 1, 0, -1, 0, 1;
        expected *= 0.5;
        EXPECT_LE((k - expected).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Mass, TotalMeasureAndPatchAreas)
{
    for (int dim : {1, 2}) {
        for (int level = 1; level <= 5; ++level) {
            const Mesh mesh = build_mesh(dim, level);
            const SymSparseMatrix m = assemble_mass(mesh);
            const Eigen::VectorXd one = Eigen::VectorXd::Ones(mesh.num_nodes());
            EXPECT_NEAR(m.bilinear(one, one), 1.0, 1e-14);
        }
    }
    const Mesh mesh = build_mesh(2, 2);
    Eigen::VectorXd patch = Eigen::VectorXd::Zero(mesh.num_nodes());
    for (std::ptrdiff_t e = 0; e < mesh.num_elements(); ++e) {
        for (auto v : mesh.element(e)) {
            patch[v] += mesh.element_measure(e);
        }
    }
    const Eigen::VectorXd row_sums = assemble_mass(mesh) * Eigen::VectorXd::Ones(mesh.num_nodes());
    EXPECT_LE((row_sums - patch / 3.0).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Stiffness, ConstantsAreInTheKernel)
{
    for (int dim : {1, 2}) {
        for (int level = 1; level <= 7; ++level) {
            const Mesh mesh = build_mesh(dim, level);
            const Eigen::VectorXd k1 = assemble_stiffness(mesh) * Eigen::VectorXd::Ones(mesh.num_nodes());
            EXPECT_LE(k1.cwiseAbs().maxCoeff(), 1e-13) << dim << " " << level;
        }
    }
}

TEST(SymSparse, StorageIsUpperTriangularAndSymmetric)
{
    const SymSparseMatrix m = assemble_mass(build_mesh(2, 3));
    const SparseMatrix& u = m.upper();
    for (int k = 0; k < u.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(u, k); it; ++it) {
            EXPECT_LE(it.row(), it.col());
        }
    }
    const Eigen::MatrixXd d = m.dense();
    EXPECT_EQ((d - d.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(m.coeff(3, 4), m.coeff(4, 3));
}

TEST(SymSparse, SizeMismatchThrows)
{
    const SymSparseMatrix m = assemble_mass(build_mesh(1, 2));
    EXPECT_THROW((void)(m * Eigen::VectorXd::Ones(3)), MeshMismatchError);
}

namespace {

// Brute-force (v, w) and (grad v, grad w) by per-element quadrature.
std::pair<double, double> brute_forms(const Mesh& mesh, const Eigen::VectorXd& v, const Eigen::VectorXd& w)
{
    const auto [gx, gw] = oracle::gauss01(6);
    double mass = 0.0;
    double stiff = 0.0;
    for (std::ptrdiff_t e = 0; e < mesh.num_elements(); ++e) {
        const auto idx = mesh.element(e);
        if (mesh.dim() == 1) {
            const double x0 = mesh.node(idx[0])[0];
            const double x1 = mesh.node(idx[1])[0];
            const double len = x1 - x0;
            for (std::size_t q = 0; q < gx.size(); ++q) {
                const double t = gx[q];
                const double vq = (1 - t) * v[idx[0]] + t * v[idx[1]];
                const double wq = (1 - t) * w[idx[0]] + t * w[idx[1]];
                mass += gw[q] * len * vq * wq;
            }
            stiff += (v[idx[1]] - v[idx[0]]) * (w[idx[1]] - w[idx[0]]) / len;
            continue;
        }
        const oracle::P2 a = mesh.node(idx[0]);
        const oracle::P2 b = mesh.node(idx[1]);
        const oracle::P2 c = mesh.node(idx[2]);
        auto interp = [&](const Eigen::VectorXd& f, const oracle::P2& q) {
            const auto l = oracle::barycentric(a, b, c, q);
            return l[0] * f[idx[0]] + l[1] * f[idx[1]] + l[2] * f[idx[2]];
        };
        mass += oracle::triangle_integral(a, b, c, [&](const oracle::P2& q) { return interp(v, q) * interp(w, q); }, 10);
        // gradients of the planes through the vertex values
        Eigen::Matrix3d sys;
        sys << 1, a[0], a[1], 1, b[0], b[1], 1, c[0], c[1];
        const Eigen::Vector3d cv = sys.lu().solve(Eigen::Vector3d(v[idx[0]], v[idx[1]], v[idx[2]]));
        const Eigen::Vector3d cw = sys.lu().solve(Eigen::Vector3d(w[idx[0]], w[idx[1]], w[idx[2]]));
        stiff += (cv[1] * cw[1] + cv[2] * cw[2]) * mesh.element_measure(e);
    }
    return {mass, stiff};
}

}  // namespace

TEST(Galerkin, FormsMatchBruteForceQuadrature)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int dim : {1, 2}) {
        for (int level = 1; level <= 4; ++level) {
            const Mesh mesh = build_mesh(dim, level);
            const SymSparseMatrix m = assemble_mass(mesh);
            const SymSparseMatrix k = assemble_stiffness(mesh);
            Eigen::VectorXd v(mesh.num_nodes());
            Eigen::VectorXd w(mesh.num_nodes());
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                v[i] = dist(rng);
                w[i] = dist(rng);
            }
            const auto [mass, stiff] = brute_forms(mesh, v, w);
            EXPECT_NEAR(m.bilinear(v, w), mass, 1e-12 * std::max(1.0, std::abs(mass)));
            EXPECT_NEAR(k.bilinear(v, w), stiff, 1e-12 * std::max(1.0, std::abs(stiff)));
        }
    }
}

TEST(Mass, PositiveDefiniteOnSmallLevels)
{
    for (int dim : {1, 2}) {
        for (int level = 1; level <= 4; ++level) {
            const Eigen::MatrixXd m = assemble_mass(build_mesh(dim, level)).dense();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
            EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
            EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(m).info(), Eigen::Success);
        }
    }
}

TEST(MassSolver, SolvesSeveralColumns)
{
    const Mesh mesh = build_mesh(2, 4);
    const SymSparseMatrix m = assemble_mass(mesh);
    const MassSolver solver(m);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(mesh.num_nodes(), 3);
    const Eigen::MatrixXd b = m * x;
    EXPECT_LE((solver.solve(b) - x).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW((void)solver.solve(Eigen::MatrixXd::Ones(4, 1)), MeshMismatchError);
}

TEST(Nonlinearity, ZeroStateGivesZero)
{
    const Mesh mesh = build_mesh(2, 3);
    const SymSparseMatrix m = assemble_mass(mesh);
    const MassSolver solver(m);
    const Eigen::MatrixXd f = project_nonlinearity(mesh, solver, ModelParams{}, Eigen::MatrixXd::Zero(mesh.num_nodes(), 3));
    EXPECT_EQ(f.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Nonlinearity, UnitStateGivesConstantVectors)
{
    const Mesh mesh = build_mesh(2, 3);
    const SymSparseMatrix m = assemble_mass(mesh);
    const MassSolver solver(m);
    const Eigen::MatrixXd f = project_nonlinearity(mesh, solver, ModelParams{}, Eigen::MatrixXd::Ones(mesh.num_nodes(), 3));
    // (rho - 1 + 2 - 1)/lambda = 2.5, u1 = 1, (-1 + c)/delta = 0
    EXPECT_LE((f.col(0).array() - 2.5).abs().maxCoeff(), 1e-12);
    EXPECT_LE((f.col(1).array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_LE(f.col(2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Nonlinearity, SecondComponentReproducesFirstSpecies)
{
    const Mesh mesh = build_mesh(2, 3);
    const SymSparseMatrix m = assemble_mass(mesh);
    const MassSolver solver(m);
    const Eigen::MatrixXd u = Eigen::MatrixXd::Random(mesh.num_nodes(), 3);
    const Eigen::MatrixXd f = project_nonlinearity(mesh, solver, ModelParams{}, u);
    EXPECT_LE((f.col(1) - u.col(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Nonlinearity, HigherDegreeQuadratureDoesNotChangeTheResult)
{
    for (int dim : {1, 2}) {
        const Mesh mesh = build_mesh(dim, 3);
        const SymSparseMatrix m = assemble_mass(mesh);
        const MassSolver solver(m);
        const Eigen::MatrixXd u = Eigen::MatrixXd::Random(mesh.num_nodes(), 3);
        const Eigen::MatrixXd f4 = project_nonlinearity(mesh, solver, ModelParams{}, u, 4);
        for (int degree : {3, 6, 10}) {
            const Eigen::MatrixXd fd = project_nonlinearity(mesh, solver, ModelParams{}, u, degree);
            EXPECT_LE((fd - f4).norm(), 1e-13 * f4.norm()) << "degree " << degree;
        }
    }
}

TEST(Nonlinearity, NonFiniteStateIsABlowUp)
{
    const Mesh mesh = build_mesh(1, 2);
    Eigen::MatrixXd u = Eigen::MatrixXd::Ones(mesh.num_nodes(), 3);
    u(2, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW((void)nonlinearity_load(mesh, ModelParams{}, u), BlowUpError);
    EXPECT_THROW((void)nonlinearity_load(mesh, ModelParams{}, Eigen::MatrixXd::Ones(4, 3)), MeshMismatchError);
}

TEST(ProjectDatum, BuiltinDataNeedTheSquare)
{
    const Mesh mesh = build_mesh(1, 3);
    const SymSparseMatrix m = assemble_mass(mesh);
    const MassSolver solver(m);
    EXPECT_THROW((void)project_datum(mesh, solver, InitialDatum::parse("iv")), ConfigError);
    const Eigen::VectorXd c = project_datum(mesh, solver, InitialDatum::constant(0.3));
    EXPECT_LE((c.array() - 0.3).abs().maxCoeff(), 1e-13);
}

TEST(ProjectDatum, StepDatumIsExactOnMeshLines)
{
    // The jump sits on the mesh line x2 = 1/2.
    const Mesh mesh = build_mesh(2, 3);
    const SymSparseMatrix m = assemble_mass(mesh);
    const MassSolver solver(m);
    const Eigen::VectorXd x = project_datum(mesh, solver, InitialDatum::parse("i"));
    // Mass conservation: integral of the projection equals the integral of the datum, 1/2.
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(mesh.num_nodes());
    EXPECT_NEAR(m.bilinear(one, x), 0.5, 1e-14);
    // Far from the jump the projection is close to the datum.
    EXPECT_NEAR(x[0], 0.0, 0.1);
    EXPECT_NEAR(x[mesh.num_nodes() - 1], 1.0, 0.1);
}
