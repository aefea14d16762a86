#include <doctest.h>

#include <cmath>

#include "clab/errors.hpp"
#include "clab/quadrature.hpp"
#include "clab/subordinate.hpp"

using namespace clab;

TEST_CASE("scalar values") {
    const auto s = build_scheme(0.5, 1.0, 100.0);
    CHECK(scalar_subordinate(1.0, 0.5, s) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(scalar_subordinate(4.0, 0.5, s) == doctest::Approx(0.5).epsilon(1e-10));
    const auto nine = build_scheme(0.5, 9.0, 9.0, 1e-9);
    CHECK(std::abs(scalar_subordinate(9.0, 0.5, nine) - 1.0 / 3.0) <= 1e-8);
    CHECK(nine.size() <= 200);
    CHECK_THROWS_AS(scalar_subordinate(0.0, 0.5, s), ValidationError);
    CHECK_THROWS_AS(scalar_subordinate(-1.0, 0.5, s), ValidationError);
}

TEST_CASE("oracle equivalence across alpha") {
    for (double alpha : {0.25, 0.5, 0.75}) {
        const auto s = build_scheme(alpha, 1.0, 1e4, 1e-10);
        for (double mu : logspace(1.0, 1e4, 37))
            CHECK(std::abs(scalar_subordinate(mu, alpha, s) / std::pow(mu, -alpha) - 1.0) <= 1e-10);
    }
}

TEST_CASE("node count grows slowly with the tolerance") {
    std::size_t prev = 0;
    for (double tol : {1e-6, 1e-8, 1e-10, 1e-12}) {
        const auto s = build_scheme(0.5, 1.0, 1e6, tol);
        if (prev) CHECK(s.size() <= 2 * prev);
        prev = s.size();
    }
}

TEST_CASE("invalid scheme requests") {
    CHECK_THROWS_AS(build_scheme(1.0, 1.0, 10.0), ValidationError);
    CHECK_THROWS_AS(build_scheme(0.5, 0.0, 10.0), ValidationError);
    CHECK_THROWS_AS(build_scheme(0.5, 1.0, 10.0, -1.0), ValidationError);
}

TEST_CASE("field subordination matches the spectral multiplier") {
    const auto b = make_basis(ManifoldModel::flat_torus(2, {1, 0, 0, 1}), BasisRequest::by_modes(500));
    const double m = 1.0;
    for (double alpha : {0.25, 0.5, 0.75}) {
        const auto s = scheme_for_basis(alpha, m, *b);
        const SpectralMultiplier exact("power", SpectralMultiplier::RealRule(
                                                    [&](double l) { return std::pow(l * l + m * m, -alpha); }));
        for (std::uint64_t seed : {1, 2, 3}) {
            const Field v = Field::random(b, seed);
            CHECK((field_subordinate(v, alpha, m, s) - apply_multiplier(v, exact)).norm() <= 1e-8 * v.norm());
        }
    }
}

TEST_CASE("constant mode and zero") {
    const auto b = make_basis(ManifoldModel::circle(1.0), BasisRequest::by_cutoff(100.0));
    const auto s = scheme_for_basis(0.5, 2.0, *b);
    const Field c = field_subordinate(Field::mode(b, 0), 0.5, 2.0, s);
    CHECK(c.coeffs[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(field_subordinate(Field::zero(b), 0.5, 2.0, s).norm() == 0.0);
}

TEST_CASE("scheme too narrow for the spectrum") {
    const auto b = make_basis(ManifoldModel::circle(1.0), BasisRequest::by_cutoff(400.0));
    const auto narrow = build_scheme(0.5, 1.0, 2.0);
    CHECK_THROWS_WITH_AS(field_subordinate(Field::mode(b, 0), 0.5, 1.0, narrow), doctest::Contains("worst mu"),
                         ConfigError);
}

TEST_CASE("positive powers by composition") {
    const auto b = make_basis(ManifoldModel::circle(1.0), BasisRequest::by_cutoff(100.0));
    const double m = 1.0;
    const auto s = scheme_for_basis(0.5, m, *b);
    std::size_t j = 0;
    while (b->mode_eigenvalues()[j] != 1.0) ++j;
    const Field one = pos_power_compose(Field::mode(b, j), 0.5, m, s);
    CHECK(one.coeffs[static_cast<Eigen::Index>(j)] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-7));

    const Field u = Field::random(b, 5);
    const Field a = pos_power_compose(u, 0.5, m, s);
    const Field r = pos_power_compose_reversed(u, 0.5, m, s);
    CHECK((a - r).norm() <= 1e-12 * a.norm());
    const Field lhalf = apply_multiplier(u, SpectralMultiplier::named("L_half", {.m = m}));
    CHECK((a - lhalf).norm() <= 1e-7 * lhalf.norm());

    const auto s25 = scheme_for_basis(0.25, m, *b);
    const auto s75 = scheme_for_basis(0.75, m, *b);
    const Field p = pos_power_compose(u, 0.25, m, s75);  // L^{1/4} from a 3/4 scheme
    const Field back = field_subordinate(p, 0.25, m, s25);
    CHECK((back - u).norm() <= 1e-7 * u.norm());
}

TEST_CASE("norm bound with beta = m^2") {
    const auto b = make_basis(ManifoldModel::flat_torus(2, {1, 0, 0, 1.21}), BasisRequest::by_modes(300));
    const double m = 1.5;
    const auto s = scheme_for_basis(0.5, m, *b);
    std::vector<Field> trials{Field::mode(b, 0), Field::mode(b, b->size() - 1)};
    for (int i = 0; i < 100; ++i) trials.push_back(Field::random(b, 1000 + i));
    const auto rep = norm_bound_check(0.5, m, trials, s);
    CHECK(rep.holds);
    CHECK(rep.ratios[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rep.ratios[1] < 0.1);
    CHECK(rep.max_ratio <= 1.0 + 1e-10);
    CHECK_THROWS_AS(norm_bound_check(0.5, m, std::vector<Field>{}, s), ValidationError);
}
