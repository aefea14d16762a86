#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "clab/errors.hpp"
#include "clab/funcalc.hpp"
#include "clab/manifold.hpp"

using namespace clab;
constexpr double pi = std::numbers::pi;

namespace {
Point pt(double a, double b = 0.0, double c = 0.0) {
    Point p;
    p.x = {a, b, c};
    return p;
}

double gram_defect(const SpectralBasis& b, const QuadratureGrid& g) {
    const Eigen::MatrixXd E = b.evaluate_matrix(g.nodes);
    Eigen::VectorXd w(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) w[static_cast<Eigen::Index>(i)] = g.weights[i];
    const Eigen::MatrixXd G = E.transpose() * w.asDiagonal() * E;
    return (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}
}  // namespace

TEST_CASE("circle eigenvalues up to cutoff 4") {
    const auto b = build_basis(ManifoldModel::circle(1.0), BasisRequest::by_cutoff(4.0));
    REQUIRE(b.size() == 5);
    const std::vector<double> want{0, 1, 1, 4, 4};
    for (std::size_t j = 0; j < 5; ++j) CHECK(b.mode_eigenvalues()[j] == doctest::Approx(want[j]).epsilon(1e-14));
    REQUIRE(b.eigenspaces().size() == 3);
    CHECK(b.eigenspaces()[1].multiplicity == 2);
}

TEST_CASE("square torus first nonzero eigenvalue") {
    const auto b = build_basis(ManifoldModel::flat_torus(2, {1, 0, 0, 1}), BasisRequest::by_cutoff(50.0));
    REQUIRE(b.eigenspaces().size() >= 2);
    CHECK(b.eigenspaces()[0].eigenvalue == 0.0);
    CHECK(b.eigenspaces()[1].eigenvalue == doctest::Approx(4 * pi * pi).epsilon(1e-14));
    CHECK(b.eigenspaces()[1].multiplicity == 4);
}

TEST_CASE("sphere eigenvalues up to cutoff 6") {
    const auto b = build_basis(ManifoldModel::sphere(1.0), BasisRequest::by_cutoff(6.0));
    REQUIRE(b.eigenspaces().size() == 3);
    const double lam[3] = {0, 2, 6};
    const std::size_t mult[3] = {1, 3, 5};
    for (int k = 0; k < 3; ++k) {
        CHECK(b.eigenspaces()[k].eigenvalue == doctest::Approx(lam[k]));
        CHECK(b.eigenspaces()[k].multiplicity == mult[k]);
    }
}

TEST_CASE("max_modes keeps complete eigenspaces") {
    const auto b = build_basis(ManifoldModel::flat_torus(2, {1, 0, 0, 1}), BasisRequest::by_modes(10));
    CHECK(b.size() <= 10);
    CHECK(b.size() == 9);  // 1 + 4 + 4
    CHECK(b.cutoff() == doctest::Approx(8 * pi * pi));
}

TEST_CASE("eigenvalues sorted from zero") {
    for (const auto& m : {ManifoldModel::circle(2.0), ManifoldModel::flat_torus(3, {1, 0.2, 0, 0.2, 1.5, 0, 0, 0, 0.7}),
                          ManifoldModel::sphere(1.3)}) {
        const auto b = build_basis(m, BasisRequest::by_cutoff(300.0));
        CHECK(b.mode_eigenvalues().front() == 0.0);
        CHECK(b.eigenspaces().front().multiplicity == 1);
        for (std::size_t j = 1; j < b.size(); ++j) CHECK(b.mode_eigenvalues()[j] >= b.mode_eigenvalues()[j - 1]);
    }
}

TEST_CASE("invalid models") {
    CHECK_THROWS_AS(build_basis(ManifoldModel::flat_torus(2, {1, 2, 2, 1}), BasisRequest::by_cutoff(10)),
                    ValidationError);
    CHECK_THROWS_AS(build_basis(ManifoldModel::flat_torus(2, {1, 0.1, 0, 1}), BasisRequest::by_cutoff(10)),
                    ValidationError);
    CHECK_THROWS_AS(build_basis(ManifoldModel::circle(-1.0), BasisRequest::by_cutoff(10)), ValidationError);
}

TEST_CASE("hard limit raises a resource error") {
    BasisRequest r = BasisRequest::by_cutoff(1e7);
    r.hard_limit = 1000;
    CHECK_THROWS_AS(build_basis(ManifoldModel::flat_torus(2, {1, 0, 0, 1}), r), ResourceError);
}

TEST_CASE("geodesic distances") {
    CHECK(geodesic_distance(ManifoldModel::circle(1.0), pt(0.0), pt(pi)) == doctest::Approx(pi));
    CHECK(geodesic_distance(ManifoldModel::flat_torus(1, {1.0}), pt(0.1), pt(0.9)) == doctest::Approx(0.2));
    CHECK(geodesic_distance(ManifoldModel::sphere(1.0), pt(0.0, 0.0), pt(pi / 2, 1.0)) == doctest::Approx(pi / 2));
}

TEST_CASE("distance axioms on random triples") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<ManifoldModel> models{ManifoldModel::circle(1.5),
                                            ManifoldModel::flat_torus(2, {1, 0.3, 0.3, 1.2}),
                                            ManifoldModel::sphere(2.0)};
    for (const auto& m : models) {
        auto draw = [&] {
            if (m.kind_name() == "circle") return pt(2 * pi * u(rng));
            if (m.kind_name() == "sphere") return pt(std::acos(1 - 2 * u(rng)), 2 * pi * u(rng));
            return pt(u(rng), u(rng));
        };
        for (int i = 0; i < 200; ++i) {
            const Point a = draw(), b = draw(), c = draw();
            const double ab = geodesic_distance(m, a, b), ba = geodesic_distance(m, b, a);
            CHECK(ab == doctest::Approx(ba).epsilon(1e-14));
            CHECK(geodesic_distance(m, a, a) == doctest::Approx(0.0));
            CHECK(geodesic_distance(m, a, c) <= ab + geodesic_distance(m, b, c) + 1e-12);
            CHECK(ab <= m.diameter() + 1e-12);
        }
    }
}

TEST_CASE("grid weights sum to the volume") {
    CHECK(build_grid(ManifoldModel::circle(1.0), 64).total_weight() == doctest::Approx(2 * pi).epsilon(1e-12));
    CHECK(build_grid(ManifoldModel::flat_torus(2, {1, 0, 0, 1.21}), 16).total_weight() ==
          doctest::Approx(1.1).epsilon(1e-12));
    CHECK(build_grid(ManifoldModel::sphere(1.0), 32).total_weight() == doctest::Approx(4 * pi).epsilon(1e-10));
    for (double w : build_grid(ManifoldModel::sphere(1.0), 8).weights) CHECK(w > 0.0);
}

TEST_CASE("Nyquist violation names the required resolution") {
    const auto m = ManifoldModel::circle(1.0);
    const auto b = build_basis(m, BasisRequest::by_cutoff(100.0));
    CHECK(b.min_resolution() == 21);
    CHECK_THROWS_WITH_AS(build_grid(m, 16, b), doctest::Contains("21"), ValidationError);
    CHECK_NOTHROW(build_grid(m, 21, b));
}

TEST_CASE("orthonormality under the quadrature grid") {
    {
        const auto m = ManifoldModel::circle(1.3);
        const auto b = build_basis(m, BasisRequest::by_cutoff(400.0));
        CHECK(gram_defect(b, build_grid(m, b.min_resolution())) <= 1e-10);
    }
    {
        const auto m = ManifoldModel::flat_torus(2, {1, 0.25, 0.25, 0.8});
        const auto b = build_basis(m, BasisRequest::by_modes(300));
        CHECK(gram_defect(b, build_grid(m, b.min_resolution())) <= 1e-8);
    }
    {
        const auto m = ManifoldModel::sphere(1.0);
        const auto b = build_basis(m, BasisRequest::by_cutoff(15 * 16));
        CHECK(gram_defect(b, build_grid(m, b.min_resolution())) <= 1e-6);
    }
}

TEST_CASE("inner product identities") {
    const auto m = ManifoldModel::flat_torus(2, {1, 0, 0, 1.21});
    const auto b = make_basis(m, BasisRequest::by_modes(200));
    const auto g = build_grid(m, b->min_resolution());
    std::vector<double> c(g.size(), 1.0 / std::sqrt(m.volume()));
    CHECK(inner_product(c, c, g) == doctest::Approx(1.0).epsilon(1e-12));
    const Field u = Field::random(b, 11);
    const auto v = synthesize(u, g);
    CHECK(inner_product(v, v, g) == doctest::Approx(u.coeffs.squaredNorm()).epsilon(1e-10));
    std::vector<double> bad(g.size() - 1, 0.0);
    CHECK_THROWS_AS(inner_product(bad, v, g), ValidationError);
}

TEST_CASE("Weyl law within a factor of four") {
    for (const auto& m : {ManifoldModel::circle(1.0), ManifoldModel::flat_torus(2, {1, 0, 0, 1.21}),
                          ManifoldModel::flat_torus(3, {1, 0, 0, 0, 1, 0, 0, 0, 1}), ManifoldModel::sphere(1.0)}) {
        for (double cut : {100.0, 1000.0, 4000.0}) {
            const auto b = build_basis(m, BasisRequest::by_cutoff(cut));
            const double ratio = static_cast<double>(b.size()) / weyl_count(m, cut);
            CHECK(ratio > 0.25);
            CHECK(ratio < 4.0);
        }
    }
}

TEST_CASE("remixing is orthogonal inside eigenspaces") {
    const auto m = ManifoldModel::sphere(1.0);
    const auto b = build_basis(m, BasisRequest::by_cutoff(42.0));
    const auto r = b.remixed(5);
    CHECK(r.is_mixed());
    CHECK(gram_defect(r, build_grid(m, r.min_resolution())) <= 1e-10);
    const Point p = pt(0.7, 2.1);
    const auto a = b.evaluate(p), c = r.evaluate(p);
    for (const auto& sp : b.eigenspaces()) {
        double sa = 0, sc = 0;
        for (std::size_t j = sp.offset; j < sp.offset + sp.multiplicity; ++j) {
            sa += a[j] * a[j];
            sc += c[j] * c[j];
        }
        CHECK(sc == doctest::Approx(sa).epsilon(1e-12));
    }
}
