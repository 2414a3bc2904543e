#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fgm/dataset.hpp"
#include "fgm/grid.hpp"
#include "fgm/rng.hpp"

using namespace fgm;

TEST_CASE("uniform grid sits at cell midpoints") {
    const Grid g = Grid::uniform(0.0, 1.0, 4);
    REQUIRE(g.size() == 4);
    REQUIRE(g.dt() == Catch::Approx(0.25));
    REQUIRE(g.points[0] == Catch::Approx(0.125));
    REQUIRE(g.points[3] == Catch::Approx(0.875));
    g.validate();

    const Grid shifted = Grid::uniform(-2.0, 3.0, 10);
    REQUIRE(shifted.dt() == Catch::Approx(0.5));
    REQUIRE(shifted.points[0] == Catch::Approx(-1.75));
    shifted.validate();
}

TEST_CASE("grid construction rejects bad arguments") {
    REQUIRE_THROWS_AS(Grid::uniform(1.0, 1.0, 5), ValidationError);
    REQUIRE_THROWS_AS(Grid::uniform(2.0, 1.0, 5), ValidationError);
    REQUIRE_THROWS_AS(Grid::uniform(0.0, 1.0, 0), ValidationError);

    Grid g = Grid::uniform(0.0, 1.0, 5);
    g.points[2] = g.points[1]; // not strictly increasing
    REQUIRE_THROWS_AS(g.validate(), ValidationError);
    g = Grid::uniform(0.0, 1.0, 5);
    g.points[4] = 2.0; // outside [a, b]
    REQUIRE_THROWS_AS(g.validate(), ValidationError);
}

TEST_CASE("inner product of the constant one with itself is the interval length") {
    const Grid g = Grid::uniform(0.0, 1.0, 100);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(100);
    REQUIRE(inner_product(ones, ones, g) == Catch::Approx(1.0).margin(1e-15));

    const Grid wide = Grid::uniform(-1.0, 3.0, 64);
    const Eigen::VectorXd ones64 = Eigen::VectorXd::Ones(64);
    REQUIRE(inner_product(ones64, ones64, wide) == Catch::Approx(4.0).margin(1e-13));
}

TEST_CASE("inner product of sin and cos at the same frequency vanishes") {
    const Grid g = Grid::uniform(0.0, 1.0, 200);
    Eigen::VectorXd s(200), c(200);
    for (Eigen::Index k = 0; k < 200; ++k) {
        s[k] = std::sin(2.0 * M_PI * g.points[k]);
        c[k] = std::cos(2.0 * M_PI * g.points[k]);
    }
    REQUIRE(std::abs(inner_product(s, c, g)) < 1e-10);
    // <sin, sin> = 1/2 on the midpoint grid, exactly up to rounding.
    REQUIRE(inner_product(s, s, g) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("inner product is bilinear and positive definite on random functions") {
    Rng rng(7);
    const Grid g = Grid::uniform(0.0, 2.0, 37);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd f(37), h(37), w(37);
        for (Eigen::Index k = 0; k < 37; ++k) {
            f[k] = rng.normal();
            h[k] = rng.normal();
            w[k] = rng.normal();
        }
        const double alpha = rng.uniform(-2.0, 2.0);
        const double lhs = inner_product(alpha * f + h, w, g);
        const double rhs = alpha * inner_product(f, w, g) + inner_product(h, w, g);
        REQUIRE(lhs == Catch::Approx(rhs).margin(1e-10));
        REQUIRE(inner_product(f, h, g) == Catch::Approx(inner_product(h, f, g)).margin(1e-12));
        if (f.norm() > 0) REQUIRE(inner_product(f, f, g) > 0.0);
    }
}

TEST_CASE("inner product rejects mismatched lengths") {
    const Grid g = Grid::uniform(0.0, 1.0, 10);
    REQUIRE_THROWS_AS(inner_product(Eigen::VectorXd::Ones(9), Eigen::VectorXd::Ones(10), g), DimensionError);
}

TEST_CASE("centering removes the mean curve and is idempotent") {
    Rng rng(11);
    const Grid g = Grid::uniform(0.0, 1.0, 20);
    FunctionalDataset ds = FunctionalDataset::zeros(6, 3, g);
    for (auto& node : ds.values)
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index k = 0; k < 20; ++k) node(i, k) = rng.normal() + 5.0;

    const FunctionalDataset c1 = center_dataset(ds);
    for (const auto& node : c1.values) REQUIRE(node.colwise().mean().cwiseAbs().maxCoeff() < 1e-13);

    // pairwise differences survive centering exactly
    for (std::size_t j = 0; j < 3; ++j) {
        const Eigen::MatrixXd diff_before = ds.values[j].row(0) - ds.values[j].row(3);
        const Eigen::MatrixXd diff_after = c1.values[j].row(0) - c1.values[j].row(3);
        REQUIRE((diff_before - diff_after).cwiseAbs().maxCoeff() < 1e-12);
    }

    const FunctionalDataset c2 = center_dataset(c1);
    for (std::size_t j = 0; j < 3; ++j)
        REQUIRE((c2.values[j] - c1.values[j]).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("centering a two-sample pair gives opposite halves of the difference") {
    const Grid g = Grid::uniform(0.0, 1.0, 5);
    FunctionalDataset ds = FunctionalDataset::zeros(2, 1, g);
    ds.values[0].row(0) << 1.0, 2.0, 3.0, 4.0, 5.0;
    ds.values[0].row(1) << 3.0, 2.0, 1.0, 0.0, -1.0;
    const FunctionalDataset c = center_dataset(ds);
    REQUIRE((c.values[0].row(0) + c.values[0].row(1)).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(c.values[0](0, 0) == Catch::Approx(-1.0));
    REQUIRE(c.values[0](0, 4) == Catch::Approx(3.0));
}

TEST_CASE("centering requires at least two samples") {
    const Grid g = Grid::uniform(0.0, 1.0, 5);
    const FunctionalDataset ds = FunctionalDataset::zeros(1, 2, g);
    REQUIRE_THROWS_AS(center_dataset(ds), ValidationError);
}

TEST_CASE("dataset validation catches shape and finiteness problems") {
    const Grid g = Grid::uniform(0.0, 1.0, 8);
    FunctionalDataset ds = FunctionalDataset::zeros(4, 2, g);
    ds.validate();

    ds.values[1].resize(3, 8);
    ds.values[1].setZero();
    REQUIRE_THROWS_AS(ds.validate(), DimensionError);

    ds = FunctionalDataset::zeros(4, 2, g);
    ds.values[0](2, 5) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(ds.validate(), NumericalError);

    ds = FunctionalDataset::zeros(4, 2, g);
    ds.node_labels = {"only-one"};
    REQUIRE_THROWS_AS(ds.validate(), DimensionError);
}
