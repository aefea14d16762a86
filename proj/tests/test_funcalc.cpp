#include <doctest.h>

#include <cmath>
#include <numbers>

#include "clab/errors.hpp"
#include "clab/funcalc.hpp"

using namespace clab;

namespace {
BasisPtr circle_basis(double cutoff = 100.0) { return make_basis(ManifoldModel::circle(1.0), BasisRequest::by_cutoff(cutoff)); }

std::size_t first_mode_with(const SpectralBasis& b, double lambda) {
    for (std::size_t j = 0; j < b.size(); ++j)
        if (std::abs(b.mode_eigenvalues()[j] - lambda) < 1e-12) return j;
    return b.size();
}
}  // namespace

TEST_CASE("projection of a constant and of a basis function") {
    const auto b = circle_basis();
    const auto g = build_grid(b->model(), b->min_resolution(), *b);
    const Field c = project([](const Point&) { return 3.0; }, b, g);
    CHECK(c.coeffs[0] == doctest::Approx(3.0 * std::sqrt(2 * std::numbers::pi)).epsilon(1e-13));
    CHECK(c.coeffs.tail(c.coeffs.size() - 1).cwiseAbs().maxCoeff() < 1e-12);
    const Field e = Field::mode(b, 1);
    const Field back = project(synthesize(e, g), b, g);
    CHECK((back.coeffs - e.coeffs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection below Nyquist is rejected") {
    const auto b = circle_basis();
    const auto g = build_grid(b->model(), 8);
    std::vector<double> s(g.size(), 1.0);
    CHECK_THROWS_AS(project(s, b, g), ValidationError);
}

TEST_CASE("bump projection converges under refinement") {
    const auto m = ManifoldModel::flat_torus(2, {1, 0, 0, 1});
    auto bump = [&](const Point& p) {
        Point c;
        c.x = {0.5, 0.5, 0};
        const double d = geodesic_distance(m, p, c) / 0.2;
        return d < 1 ? std::exp(-1 / (1 - d * d)) : 0.0;
    };
    double prev = 1e300;
    for (std::size_t modes : {200, 800, 3200}) {
        const auto b = make_basis(m, BasisRequest::by_modes(modes));
        const auto fine = build_grid(m, 2 * b->min_resolution() + 32);
        const Field f = project(bump, b, fine);
        const auto vals = synthesize(f, fine);
        double err = 0.0;
        for (std::size_t i = 0; i < fine.size(); ++i) err += fine.weights[i] * std::pow(vals[i] - bump(fine.nodes[i]), 2);
        err = std::sqrt(err);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("L_half scales the k = 1 circle mode by sqrt 2") {
    const auto b = circle_basis();
    const std::size_t j = first_mode_with(*b, 1.0);
    const Field u = Field::mode(b, j);
    const Field v = apply_multiplier(u, SpectralMultiplier::named("L_half", {.m = 1.0}));
    CHECK(v.coeffs[static_cast<Eigen::Index>(j)] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("L_neg_half inverts L_half") {
    const auto b = make_basis(ManifoldModel::flat_torus(2, {1, 0, 0, 1.21}), BasisRequest::by_modes(500));
    const Field u = Field::random(b, 4);
    const MultiplierParams p{.m = 0.7};
    const Field w = apply_multiplier(apply_multiplier(u, SpectralMultiplier::named("L_half", p)),
                                     SpectralMultiplier::named("L_neg_half", p));
    CHECK((w - u).norm() <= 1e-12 * u.norm());
}

TEST_CASE("fractional Laplacian on the sphere") {
    const auto b = make_basis(ManifoldModel::sphere(1.0), BasisRequest::by_cutoff(6.0));
    const std::size_t j = first_mode_with(*b, 6.0);
    const Field v = apply_multiplier(Field::mode(b, j), SpectralMultiplier::named("frac_lap", {.alpha = 0.5}));
    CHECK(v.coeffs[static_cast<Eigen::Index>(j)] == doctest::Approx(std::sqrt(6.0)));
}

TEST_CASE("multipliers act blockwise and compose as products") {
    const auto b = make_basis(ManifoldModel::sphere(1.0), BasisRequest::by_cutoff(30.0));
    const auto a = SpectralMultiplier::named("heat", {.t = 0.1});
    const auto c = SpectralMultiplier::named("L_half", {.m = 2.0});
    for (std::size_t j = 0; j < b->size(); ++j) {
        const Field v = apply_multiplier(Field::mode(b, j), a);
        for (std::size_t i = 0; i < b->size(); ++i)
            if (i != j) CHECK(v.coeffs[static_cast<Eigen::Index>(i)] == 0.0);
    }
    const Field u = Field::random(b, 9);
    const Field two = apply_multiplier(apply_multiplier(u, a), c);
    const Field one = apply_multiplier(u, SpectralMultiplier::product(a, c));
    CHECK((two - one).norm() <= 1e-12 * one.norm());
}

TEST_CASE("unknown multiplier and domain errors") {
    CHECK_THROWS_AS(SpectralMultiplier::named("nope"), ValidationError);
    const auto b = circle_basis(4.0);
    const SpectralMultiplier bad("inverse", SpectralMultiplier::RealRule([](double l) { return 1.0 / l; }));
    CHECK_THROWS_WITH_AS(apply_multiplier(Field::mode(b, 0), bad), doctest::Contains("0"), DomainError);
}

TEST_CASE("order-two growth and positivity of L_half") {
    const double m = 1.5;
    const auto L = SpectralMultiplier::named("L_half", {.m = m});
    for (double l : {1.5, 10.0, 100.0, 1e4}) {
        CHECK(std::abs(L(l) - l) <= m * m / (2 * l) + 1e-12);
    }
    CHECK(L(1e8) / 1e8 == doctest::Approx(1.0).epsilon(1e-15));
    const auto b = make_basis(ManifoldModel::flat_torus(2, {1, 0, 0, 1}), BasisRequest::by_modes(200));
    const Field u = Field::random(b, 2);
    CHECK(inner_product(apply_multiplier(u, L), u) >= m * u.coeffs.squaredNorm() - 1e-10);
}

TEST_CASE("self-adjointness of real multipliers") {
    const auto b = make_basis(ManifoldModel::sphere(1.0), BasisRequest::by_cutoff(60.0));
    const Field u = Field::random(b, 1), v = Field::random(b, 2);
    for (const char* name : {"L_half", "L_neg_half", "heat", "biheat", "cos_wave", "sinc_wave"}) {
        const auto M = SpectralMultiplier::named(name, {.m = 1.0, .t = 0.01, .sigma = 0.3});
        CHECK(inner_product(apply_multiplier(u, M), v) ==
              doctest::Approx(inner_product(u, apply_multiplier(v, M))).epsilon(1e-12));
    }
}

TEST_CASE("inner products need a shared basis") {
    const auto a = circle_basis(4.0), b = circle_basis(4.0);
    CHECK_THROWS_AS(inner_product(Field::mode(a, 0), Field::mode(b, 0)), ValidationError);
}

TEST_CASE("solve_source") {
    const auto b = make_basis(ManifoldModel::flat_torus(2, {1, 0, 0, 1}), BasisRequest::by_modes(500));
    CHECK(solve_source(Field::zero(b), 1.0).norm() == 0.0);
    const Field c = solve_source(Field::mode(b, 0), 2.0);
    CHECK(c.coeffs[0] == doctest::Approx(0.5));
    const Field f = Field::random(b, 3);
    const Field u = solve_source(f, 1.0);
    const Field back = apply_multiplier(u, SpectralMultiplier::named("L_half", {.m = 1.0}));
    CHECK((back - f).norm() <= 1e-10 * f.norm());
    CHECK(u.norm() <= f.norm() + 1e-14);
    CHECK_THROWS_AS(solve_source(f, 0.0), ValidationError);
}

TEST_CASE("solve_Ag on mean-zero sources") {
    const auto b = circle_basis();
    const std::size_t j = first_mode_with(*b, 1.0);
    const Field u = solve_Ag(Field::mode(b, j), 1.0);
    CHECK(u.coeffs[static_cast<Eigen::Index>(j)] == doctest::Approx(1.0 / (std::sqrt(2.0) - 1.0)).epsilon(1e-14));
    CHECK(solve_Ag(Field::zero(b), 1.0).norm() == 0.0);
    Field f = Field::random(b, 8);
    CHECK_THROWS_AS(solve_Ag(f, 1.0), ValidationError);
    f.coeffs[0] = 0.0;
    const Field v = solve_Ag(f, 1.0);
    CHECK(v.coeffs[0] == 0.0);
    CHECK((apply_Ag(v, 1.0) - f).norm() <= 1e-10 * f.norm());
    CHECK_THROWS_AS(solve_Ag(f, -1.0), ValidationError);
}

TEST_CASE("principal symbol") {
    const auto m = ManifoldModel::flat_torus(2, {1, 0, 0, 1});
    Point x;
    const std::vector<double> xi{1.0, 0.0};
    CHECK(evaluate_symbol(m, x, xi, 1.0) == doctest::Approx(std::sqrt(2.0)));
    const double q = 1.0;
    for (double s : {10.0, 30.0, 100.0}) {
        const std::vector<double> sx{s, 0.0};
        const double dev = evaluate_symbol(m, x, sx, 1.0) / (s * s) - q;
        CHECK(dev == doctest::Approx(1.0 / (2 * std::pow(s, 4) * q)).epsilon(1e-3));
    }
    const std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS_AS(evaluate_symbol(m, x, zero, 1.0), ValidationError);
    const auto sph = ManifoldModel::sphere(2.0);
    Point eq;
    eq.x = {std::numbers::pi / 2, 0.3, 0};
    const std::vector<double> xt{2.0, 0.0};
    CHECK(evaluate_symbol(sph, eq, xt, 1.0) == doctest::Approx(std::sqrt(2.0)));
}
