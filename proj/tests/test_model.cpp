#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fnrd/model.hpp"

using namespace fnrd;

TEST(Nonlinearity, ZeroAndUnitStates)
{
    const ModelParams p;
    const auto z = eval_f(p, 0, 0, 0);
    EXPECT_EQ(z[0], 0.0);
    EXPECT_EQ(z[1], 0.0);
    EXPECT_EQ(z[2], 0.0);
    const auto one = eval_f(p, 1, 1, 1);
    EXPECT_DOUBLE_EQ(one[0], 2.5);
    EXPECT_DOUBLE_EQ(one[1], 1.0);
    EXPECT_DOUBLE_EQ(one[2], 0.0);
}

TEST(Nonlinearity, SplitReproducesTheOriginalReactionTerms)
{
    // Reaction terms of the unsplit system, written out independently.
    ModelParams p;
    p.lambda = 0.3;
    p.delta = 0.07;
    p.rho = 0.4;
    p.c = 1.7;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int k = 0; k < 10; ++k) {
        const double u1 = dist(rng);
        const double u2 = dist(rng);
        const double u3 = dist(rng);
        const auto f = eval_f(p, u1, u2, u3);
        const double r1 = (p.rho * u3 - u1 * u3 + u1 - u1 * u1) / p.lambda;
        const double r2 = u1 - u2;
        const double r3 = (-p.rho * u3 - u1 * u3 + p.c * u2) / p.delta;
        EXPECT_NEAR(f[0] - p.b(0) * u1, r1, 1e-12);
        EXPECT_NEAR(f[1] - p.b(1) * u2, r2, 1e-12);
        EXPECT_NEAR(f[2] - p.b(2) * u3, r3, 1e-12);
    }
}

TEST(Nonlinearity, IsQuadraticInTheState)
{
    const ModelParams p;
    const std::array<double, 3> u{0.3, -0.7, 1.1};
    auto g = [&](double alpha) {
        const auto fa = eval_f(p, alpha * u[0], alpha * u[1], alpha * u[2]);
        const auto f1 = eval_f(p, u[0], u[1], u[2]);
        return std::array<double, 3>{fa[0] - alpha * f1[0], fa[1] - alpha * f1[1], fa[2] - alpha * f1[2]};
    };
    // g(alpha) = q (alpha^2 - alpha) for a fixed q: fit from alpha = 2, check alpha = 3 and 0.
    const auto g2 = g(2.0);
    const auto g3 = g(3.0);
    const auto g0 = g(0.0);
    for (std::size_t s = 0; s < 3; ++s) {
        const double q = g2[s] / 2.0;
        EXPECT_NEAR(g3[s], 6.0 * q, 1e-12);
        EXPECT_EQ(g0[s], 0.0);
    }
}

TEST(Nonlinearity, NonFiniteInputIsABlowUp)
{
    EXPECT_THROW((void)eval_f(ModelParams{}, std::nan(""), 0, 0), BlowUpError);
    EXPECT_THROW((void)eval_f(ModelParams{}, 0, INFINITY, 0), BlowUpError);
}

TEST(Params, DefaultsAndShifts)
{
    const ModelParams p;
    EXPECT_EQ(p.a[0], 1.0);
    EXPECT_EQ(p.lambda, 0.1);
    EXPECT_EQ(p.delta, 0.1);
    EXPECT_EQ(p.rho, 0.25);
    EXPECT_EQ(p.c, 1.0);
    EXPECT_DOUBLE_EQ(p.b(0), 10.0);
    EXPECT_DOUBLE_EQ(p.b(1), 1.0);
    EXPECT_DOUBLE_EQ(p.b(2), 2.5);
    EXPECT_NO_THROW(p.validate());
    ModelParams bad;
    bad.delta = 0.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = ModelParams{};
    bad.a[2] = -1.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    EXPECT_THROW((void)p.b(3), ConfigError);
}

TEST(Datum, PointValues)
{
    const auto d1 = InitialDatum::parse("i");
    EXPECT_EQ(d1({0.3, 0.75}), 1.0);
    EXPECT_EQ(d1({0.3, 0.25}), 0.0);
    EXPECT_EQ(d1({0.3, 0.5}), 0.5);
    const auto d2 = InitialDatum::parse("ii");
    EXPECT_NEAR(d2({1.0, 1.0}), 0.117004, 1e-6);
    EXPECT_NEAR(d2({1.0, 1.0}), std::pow(2.0, -0.125) - 0.8, 1e-15);
    EXPECT_THROW((void)d2({0.0, 0.0}), SingularEvaluationError);
    const auto d3 = InitialDatum::parse("iii");
    EXPECT_DOUBLE_EQ(d3({0.25, 0.5}), 0.25);
    const auto d4 = InitialDatum::parse("iv");
    EXPECT_DOUBLE_EQ(d4({0.2, 0.9}), 0.7);
    EXPECT_DOUBLE_EQ(d4({0.9, 0.2}), 0.7);
}

TEST(Datum, ParseAndNames)
{
    for (const char* name : {"i", "ii", "iii", "iv"}) {
        EXPECT_EQ(InitialDatum::parse(name).name(), name);
        EXPECT_TRUE(InitialDatum::parse(name).requires_2d());
    }
    EXPECT_THROW(InitialDatum::parse("v"), ConfigError);
    EXPECT_THROW(InitialDatum::parse(""), ConfigError);
    EXPECT_THROW(InitialDatum::builtin(DatumId::custom), ConfigError);
}

TEST(Datum, NominalRegularity)
{
    EXPECT_EQ(*InitialDatum::parse("i").gamma(), 0.5);
    EXPECT_EQ(*InitialDatum::parse("ii").gamma(), 0.75);
    EXPECT_EQ(*InitialDatum::parse("iii").gamma(), 1.0);
    EXPECT_EQ(*InitialDatum::parse("iv").gamma(), 1.5);
    EXPECT_FALSE(InitialDatum::constant(1.0).gamma());
    EXPECT_EQ(*InitialDatum::constant(1.0, 2.0).gamma(), 2.0);
}

TEST(Datum, CustomData)
{
    const auto c = InitialDatum::constant(0.4);
    EXPECT_EQ(c.name(), "custom");
    EXPECT_FALSE(c.requires_2d());
    EXPECT_EQ(c({0.1, 0.9}), 0.4);

    std::vector<double> values;
    const Mesh mesh(2, 2);
    for (const Point& p : mesh.nodes()) {
        values.push_back(p[0] + 3.0 * p[1]);
    }
    const auto n = InitialDatum::nodal(2, 2, values, 1.0);
    EXPECT_TRUE(n.is_nodal());
    EXPECT_EQ(n.nodal_level(), 2);
    EXPECT_NEAR(n({0.3, 0.6}), 0.3 + 1.8, 1e-14);
    EXPECT_THROW(InitialDatum::nodal(2, 3, values), ConfigError);
}

TEST(ExpectedOrders, FromRegularity)
{
    const RateRecord r1 = expected_orders(InitialDatum::parse("i"));
    EXPECT_EQ(r1.spatial_l2, 2.0);
    EXPECT_EQ(r1.spatial_h1, 1.0);
    EXPECT_DOUBLE_EQ(r1.temporal, 1.5);
    EXPECT_DOUBLE_EQ(r1.first_step_l2, 1.0);
    EXPECT_DOUBLE_EQ(r1.first_step_h1, 0.5);

    const RateRecord r2 = expected_orders(InitialDatum::parse("ii"));
    EXPECT_DOUBLE_EQ(r2.temporal, 1.75);
    EXPECT_DOUBLE_EQ(r2.first_step_l2, 1.25);
    EXPECT_DOUBLE_EQ(r2.first_step_h1, 0.75);

    const RateRecord r3 = expected_orders(InitialDatum::parse("iii"));
    EXPECT_DOUBLE_EQ(r3.temporal, 2.0);
    EXPECT_DOUBLE_EQ(r3.first_step_l2, 1.5);
    EXPECT_DOUBLE_EQ(r3.first_step_h1, 1.0);

    const RateRecord r4 = expected_orders(InitialDatum::parse("iv"));
    EXPECT_DOUBLE_EQ(r4.temporal, 2.0);
    EXPECT_DOUBLE_EQ(r4.first_step_l2, 1.75);
    EXPECT_DOUBLE_EQ(r4.first_step_h1, 1.25);

    EXPECT_THROW((void)expected_orders(InitialDatum::constant(1.0)), ConfigError);
    EXPECT_DOUBLE_EQ(expected_orders(InitialDatum::constant(1.0, 0.25)).first_step_l2, 0.75);
}
