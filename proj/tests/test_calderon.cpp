#include <doctest.h>

#include <cmath>
#include <numbers>

#include "clab/calderon.hpp"
#include "clab/errors.hpp"
#include "clab/quadrature.hpp"

using namespace clab;
constexpr double pi = std::numbers::pi;

namespace {
Point pt(double a, double b = 0.0) {
    Point p;
    p.x = {a, b, 0.0};
    return p;
}

const ManifoldModel square = ManifoldModel::flat_torus(2, {1, 0, 0, 1}, "square");
const ManifoldModel stretched = ManifoldModel::flat_torus(2, {1, 0, 0, 1.21}, "stretched");

double bump_phi(double s) {
    const double q = (s - 1.5) / 0.5;
    return std::abs(q) < 1 ? std::exp(-1 / (1 - q * q)) : 0.0;
}

ExperimentSpec small_spec() {
    ExperimentSpec s = default_experiment();
    s.a.request = s.b.request = BasisRequest::by_modes(600);
    s.a.resolution = s.b.resolution = 40;
    return s;
}
}  // namespace

TEST_CASE("metric-matched identification is an isometry") {
    const auto id = Identification::metric_matched(square, stretched, pt(0.5, 0.5), pt(0.5, 0.5));
    const Eigen::MatrixXd ga = square.torus_metric(), gb = stretched.torus_metric();
    CHECK((id.M.transpose() * gb * id.M - ga).cwiseAbs().maxCoeff() < 1e-15);
    const Point x = pt(0.53, 0.47), y = pt(0.45, 0.58);
    CHECK(geodesic_distance(stretched, id.apply(square, stretched, x), id.apply(square, stretched, y)) ==
          doctest::Approx(geodesic_distance(square, x, y)).epsilon(1e-14));
}

TEST_CASE("observation set validation") {
    const auto g = build_grid(square, 32);
    const auto id = Identification::metric_matched(square, stretched, pt(0.5, 0.5), pt(0.5, 0.5));
    const Ball O{pt(0.5, 0.5), 0.1}, w1{pt(0.45, 0.5), 0.04}, w2{pt(0.56, 0.5), 0.03};
    const auto obs = make_observation_set(square, stretched, g, O, w1, w2, id);
    CHECK(obs.isometry_defect <= 1e-10);
    CHECK(obs.separation == doctest::Approx(0.04));
    CHECK(!obs.nodes.empty());
    CHECK_THROWS_AS(make_observation_set(square, stretched, g, O, {pt(0.45, 0.5), 0.08}, w2, id), ConfigError);
    CHECK_THROWS_AS(make_observation_set(square, stretched, g, O, w1, {pt(0.5, 0.5), 0.03}, id), ConfigError);
    CHECK_THROWS_AS(make_observation_set(square, stretched, g, {pt(0.5, 0.5), 0.6}, w1, w2, id), ConfigError);
    Identification wrong = id;
    wrong.M = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_WITH_AS(make_observation_set(square, stretched, g, O, w1, w2, wrong), doctest::Contains("isometry"),
                         ConfigError);
    const auto sphere = ManifoldModel::sphere(1.0);
    CHECK_THROWS_AS(make_observation_set(sphere, sphere, build_grid(sphere, 8), O, w1, w2, id), ValidationError);
}

TEST_CASE("bump sources") {
    const auto b = make_basis(square, BasisRequest::by_modes(2000));
    const auto g = build_grid(square, 64);
    const Ball w1{pt(0.45, 0.5), 0.04};
    const auto src = bump_source(square, {pt(0.45, 0.5), 0.03}, b, g, w1);
    CHECK(src.nonnegative);
    CHECK(src.integral > 0.0);
    CHECK(src.leakage_relative > 0.0);
    CHECK(src.leakage_relative < 1.0);
    CHECK_THROWS_AS(bump_source(square, {pt(0.45, 0.5), 0.05}, b, g, w1), ValidationError);
    // smaller bumps leak more at a fixed truncation
    const auto small = bump_source(square, {pt(0.45, 0.5), 0.015}, b, g, w1);
    CHECK(small.leakage_relative > src.leakage_relative);
}

TEST_CASE("Cauchy pair basics") {
    const auto b = make_basis(square, BasisRequest::by_modes(300));
    const std::vector<Point> pts{pt(0.5, 0.5), pt(0.52, 0.49)};
    const auto z = cauchy_pair(Field::zero(b), 1.0, pts);
    CHECK(z.u[0] == 0.0);
    CHECK(z.f[1] == 0.0);
    const Field f = Field::random(b, 3);
    const auto p1 = cauchy_pair(f, 1.0, pts), p2 = cauchy_pair(f, 1.0, pts);
    CHECK(p1.u == p2.u);
}

TEST_CASE("remixed eigenbases give the same solution") {
    const auto b = make_basis(square, BasisRequest::by_modes(600));
    const auto r = std::make_shared<const SpectralBasis>(b->remixed(99));
    const auto g = build_grid(square, 40);
    const Ball w1{pt(0.45, 0.5), 0.04};
    const auto fa = bump_source(square, {pt(0.45, 0.5), 0.03}, b, g, w1);
    const auto fb = bump_source(square, {pt(0.45, 0.5), 0.03}, r, g, w1);
    const std::vector<Point> pts{pt(0.5, 0.5), pt(0.55, 0.52), pt(0.45, 0.45)};
    const auto ua = cauchy_pair(fa.field, 1.0, pts).u, ub = cauchy_pair(fb.field, 1.0, pts).u;
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(ua[i] - ub[i]) <= 1e-10 * std::abs(ua[i]));
}

TEST_CASE("phi for identical and distinct models") {
    const auto a = make_basis(square, BasisRequest::by_modes(600));
    const auto b = make_basis(stretched, BasisRequest::by_modes(600));
    const auto ga = build_grid(square, 40), gb = build_grid(stretched, 40);
    const Ball w1{pt(0.45, 0.5), 0.04};
    const auto fa = bump_source(square, {pt(0.45, 0.5), 0.03}, a, ga, w1);
    const auto id = Identification::metric_matched(square, stretched, pt(0.5, 0.5), pt(0.5, 0.5));
    const Point x = pt(0.56, 0.5);
    const Ball w1b{id.apply(square, stretched, w1.center), 0.04};
    const auto fb = bump_source(stretched, {id.apply(square, stretched, pt(0.45, 0.5)), 0.03}, b, gb, w1b);
    const double smax = phi_s_max(*a, *b, 1.0);
    const auto s = logspace(1e-2, smax, 40);
    const std::vector<Point> xa{x}, xb{id.apply(square, stretched, x)};
    const auto same = phi_eval(fa.field, fa.field, 1.0, xa, xa, s);
    CHECK(same.values.cwiseAbs().maxCoeff() < 1e-12);
    const auto diff = phi_eval(fa.field, fb.field, 1.0, xa, xb, s);
    CHECK(diff.values.cwiseAbs().maxCoeff() > 1e-8);
    const Field twice = fa.field * 2.0;
    const auto dbl = phi_eval(twice, fb.field * 2.0, 1.0, xa, xb, s);
    CHECK((dbl.values - 2.0 * diff.values).cwiseAbs().maxCoeff() <= 1e-14 * diff.values.cwiseAbs().maxCoeff());
    const std::vector<double> too_far{2 * smax};
    CHECK_THROWS_AS(phi_eval(fa.field, fb.field, 1.0, xa, xb, too_far), ValidationError);
}

TEST_CASE("phi magnitude against a high-cutoff rerun") {
    // 64000 modes on a 384^2 grid: max |phi| on [1e-2, 1e2] is 1.63682e-5 at s ~ 2
    const double oracle = 1.63682395748e-05;
    auto peak = [&](std::size_t modes, int res) {
        const auto a = make_basis(square, BasisRequest::by_modes(modes));
        const auto b = make_basis(stretched, BasisRequest::by_modes(modes));
        const auto ga = build_grid(square, res), gb = build_grid(stretched, res);
        const auto id = Identification::metric_matched(square, stretched, pt(0.5, 0.5), pt(0.5, 0.5));
        const Ball w1{pt(0.45, 0.5), 0.04};
        const Ball w1b{id.apply(square, stretched, w1.center), 0.04};
        const auto fa = bump_source(square, {pt(0.45, 0.5), 0.03}, a, ga, w1);
        const auto fb = bump_source(stretched, {id.apply(square, stretched, pt(0.45, 0.5)), 0.03}, b, gb, w1b);
        const std::vector<Point> xa{pt(0.56, 0.5)}, xb{id.apply(square, stretched, pt(0.56, 0.5))};
        return phi_eval(fa.field, fb.field, 1.0, xa, xb, logspace(1e-2, 1e2, 81)).values.cwiseAbs().maxCoeff();
    };
    CHECK(peak(32000, 256) == doctest::Approx(oracle).epsilon(0.005));
    CHECK(peak(2000, 64) == doctest::Approx(oracle).epsilon(0.06));
}

TEST_CASE("moments of sqrt(s) e^{-s}") {
    PhiSamples p;
    p.s = logspace(1e-12, 150.0, 801);
    p.values.resize(1, static_cast<Eigen::Index>(p.s.size()));
    for (std::size_t j = 0; j < p.s.size(); ++j) p.values(0, static_cast<Eigen::Index>(j)) = std::sqrt(p.s[j]) * std::exp(-p.s[j]);
    const auto mt = moments(p, 10);
    for (int k = 0; k <= 10; ++k) CHECK(std::abs(mt.values(0, k) - std::tgamma(k + 1.5)) <= 1e-8);
    PhiSamples q = p;
    q.values *= 2.0;
    const auto m2 = moments(q, 10);
    for (int k = 0; k <= 10; ++k) CHECK(m2.values(0, k) == doctest::Approx(2.0 * mt.values(0, k)).epsilon(1e-15));
}

TEST_CASE("moments refuse orders beyond the decay") {
    PhiSamples p;
    p.s = logspace(1e-2, 1e3, 200);
    p.values.resize(1, static_cast<Eigen::Index>(p.s.size()));
    for (std::size_t j = 0; j < p.s.size(); ++j) p.values(0, static_cast<Eigen::Index>(j)) = 1.0 / (1.0 + p.s[j] * p.s[j]);
    CHECK_THROWS_WITH_AS(moments(p, 10), doctest::Contains("max admissible K"), ValidationError);
    CHECK_NOTHROW(moments_unchecked(p, 10));
}

TEST_CASE("moments of a zero phi") {
    PhiSamples p;
    p.s = logspace(1e-2, 1e3, 50);
    p.values = Eigen::MatrixXd::Zero(3, 50);
    const auto mt = moments(p, 10);
    CHECK(mt.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Hardy transform of e^{-s}") {
    const auto ws = WeightedSamples::from_function([](double s) { return std::exp(-s); }, linspace(0.0, 60.0, 241), 20);
    for (auto z : {std::complex<double>(0.0, 0.1), std::complex<double>(1.0, 0.5), std::complex<double>(-2.0, 0.05)}) {
        const auto exact = 1.0 / (1.0 - 2.0 * pi * std::complex<double>(0, 1) * z);
        CHECK(std::abs(hardy_value(ws, z) - exact) <= 1e-8);
    }
    const std::vector<std::complex<double>> bad{{0.0, 0.0}};
    CHECK_THROWS_AS(hardy_transform(ws, bad), ValidationError);
    const std::vector<std::complex<double>> ok{{0.0, 1.0}};
    const std::vector<double> ys{0.0};
    CHECK_THROWS_AS(hardy_transform(ws, ok, {}, ys), ValidationError);
}

TEST_CASE("zero phi has zero transform") {
    WeightedSamples ws;
    ws.s = {1.0, 2.0};
    ws.w = {0.5, 0.5};
    ws.phi = {0.0, 0.0};
    CHECK(std::abs(hardy_value(ws, {0.3, 0.2})) == 0.0);
}

TEST_CASE("Paley-Wiener identity and Morera for a compact bump") {
    const auto ws = WeightedSamples::from_function(bump_phi, linspace(1.0, 2.0, 33), 16);
    const std::vector<std::complex<double>> zs{{0.0, 0.5}, {1.0, 0.1}};
    const std::vector<Triangle> tri{{{-0.5, 0.01}, {0.5, 0.01}, {0.0, 1.0}}, {{0.3, 0.2}, {2.0, 0.2}, {1.0, 2.0}}};
    const std::vector<double> ys{1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
    const auto d = hardy_transform(ws, zs, tri, ys);
    const auto pw = paley_wiener_check(d);
    CHECK(pw.relative_gap <= 0.01);
    CHECK(pw.monotone);
    CHECK(pw.y_range_ok);
    CHECK(d.morera_max <= 1e-6);
    const std::vector<double> narrow{1e-2, 5e-3};
    CHECK_FALSE(paley_wiener_check(hardy_transform(ws, zs, {}, narrow)).y_range_ok);
}

TEST_CASE("Taylor data from moments match Cauchy integrals") {
    // L_{11}(s) e^{-s}: moments against s^k vanish for k <= 10
    auto lag = [](double s) {
        double a = 1.0, b = 1.0 - s;
        for (int n = 1; n < 11; ++n) {
            const double c = ((2 * n + 1 - s) * b - n * a) / (n + 1);
            a = b;
            b = c;
        }
        return b * std::exp(-s);
    };
    const auto ws = WeightedSamples::from_function(lag, linspace(0.0, 80.0, 161), 24);
    for (int k = 0; k <= 10; ++k) {
        double m = 0.0;
        for (std::size_t i = 0; i < ws.s.size(); ++i) m += ws.w[i] * ws.phi[i] * std::pow(ws.s[i], k);
        CHECK(std::abs(m) <= 1e-8 * std::tgamma(k + 1.0));
    }
    const auto tc = taylor_consistency(ws, 10);
    CHECK(tc.max_relative <= 1e-8);
}

TEST_CASE("verdict rules") {
    const std::vector<double> zero{0.0, 1e-12}, big{1e-3, 2e-3}, mixed{1e-12, 1e-3};
    CHECK(verdict_for(zero, 1e-10) == "indistinguishable");
    CHECK(verdict_for(big, 1e-10) == "distinguishable");
    CHECK(verdict_for(mixed, 1e-10) == "inconclusive");
}

TEST_CASE("small distinguishability runs") {
    ExperimentSpec s = small_spec();
    const auto rep = distinguish(s, false);
    CHECK(rep.verdict == "distinguishable");
    CHECK(rep.max_discrepancy > 100 * rep.null_threshold);

    ExperimentSpec same = small_spec();
    same.b = same.a;
    same.b.remix_seed = 21;
    const auto iso = distinguish(same, false);
    CHECK(iso.verdict == "indistinguishable");
    CHECK(iso.max_discrepancy <= 1e-10);

    ExperimentSpec swap = small_spec();
    swap.b = swap.a;
    Eigen::MatrixXd M(2, 2);
    M << 0, 1, 1, 0;
    swap.map = M;
    const auto sw = distinguish(swap, false);
    CHECK(sw.verdict == "indistinguishable");
    CHECK(sw.max_discrepancy <= 1e-10);
}

TEST_CASE("identical models null out phi and moments") {
    ExperimentSpec s = small_spec();
    s.b = s.a;
    s.hardy_ys = {1.0, 0.3, 0.1};
    const auto rep = distinguish(s, true);
    CHECK(rep.phi.values.cwiseAbs().maxCoeff() <= 1e-12);
    for (double v : rep.moments.max_abs) CHECK(v <= 1e-10);
    for (const auto& f : rep.hardy.f) CHECK(std::abs(f) <= 1e-10);
}
