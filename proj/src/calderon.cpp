#include "clab/calderon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "clab/errors.hpp"
#include "clab/heat.hpp"
#include "clab/quadrature.hpp"

namespace clab {

namespace {

constexpr double kPi = std::numbers::pi;
const std::complex<double> kI(0.0, 1.0);

void require_flat(const ManifoldModel& m) {
    if (std::holds_alternative<Sphere2>(m.kind()))
        throw ValidationError("observation patches need a flat model (circle or torus), got " + m.label());
}

double bump(double d, double r) {
    if (d >= r) return 0.0;
    const double q = d / r;
    return std::exp(-1.0 / (1.0 - q * q));
}

// Half the shortest closed geodesic: balls below this radius are embedded flat discs.
double injectivity_radius(const ManifoldModel& model) {
    if (std::holds_alternative<Circle>(model.kind())) return kPi * std::get<Circle>(model.kind()).radius;
    const Eigen::MatrixXd g = model.torus_metric();
    const int n = model.dimension();
    double best = std::numeric_limits<double>::infinity();
    std::array<int, 3> k{0, 0, 0};
    const int r2 = n > 1 ? 2 : 0, r3 = n > 2 ? 2 : 0;
    for (k[0] = -2; k[0] <= 2; ++k[0])
        for (k[1] = -r2; k[1] <= r2; ++k[1])
            for (k[2] = -r3; k[2] <= r3; ++k[2]) {
                if (k[0] == 0 && k[1] == 0 && k[2] == 0) continue;
                double q = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) q += k[i] * g(i, j) * k[j];
                best = std::min(best, std::sqrt(q));
            }
    return 0.5 * best;
}

bool inside(const ManifoldModel& model, const Ball& outer, const Ball& inner, double slack = 1e-12) {
    return geodesic_distance(model, outer.center, inner.center) + inner.radius <= outer.radius + slack;
}

// ln Gamma(n, x) for integer n >= 1.
double log_upper_gamma(int n, double x) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(n);
    for (int j = 0; j < n; ++j) {
        terms[j] = (x > 0.0 ? j * std::log(x) : (j == 0 ? 0.0 : -std::numeric_limits<double>::infinity())) -
                   std::lgamma(j + 1.0);
        best = std::max(best, terms[j]);
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - best);
    return std::lgamma(static_cast<double>(n)) - x + best + std::log(s);
}

// Per-eigenspace sums a_k(x) = sum_j c_j phi_j(x) for the given points.
Eigen::MatrixXd eigenspace_sums(const Field& f, std::span<const Point> xs) {
    const auto& spaces = f.basis->eigenspaces();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(spaces.size()));
    parallel_for(xs.size(), default_threads(), [&](std::size_t i) {
        const auto phi = f.basis->evaluate(xs[i]);
        for (std::size_t k = 0; k < spaces.size(); ++k) {
            double s = 0.0;
            for (std::size_t j = spaces[k].offset; j < spaces[k].offset + spaces[k].multiplicity; ++j)
                s += f.coeffs[static_cast<Eigen::Index>(j)] * phi[j];
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = s;
        }
    });
    return out;
}

double trapezoid_sum(const std::vector<double>& u, const std::vector<double>& g, std::size_t stride) {
    double s = 0.0;
    std::size_t prev = 0;
    for (std::size_t j = stride; j < u.size(); j += stride) {
        s += 0.5 * (u[j] - u[prev]) * (g[j] + g[prev]);
        prev = j;
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------- geometry

Eigen::VectorXd chart_displacement(const ManifoldModel& model, const Point& x, const Point& c) {
    require_flat(model);
    const int n = model.dimension();
    Eigen::VectorXd d(n);
    if (std::holds_alternative<Circle>(model.kind())) {
        double a = std::remainder(x.x[0] - c.x[0], 2.0 * kPi);
        d[0] = a;
        return d;
    }
    for (int i = 0; i < n; ++i) {
        const double v = x.x[i] - c.x[i];
        d[i] = v - std::round(v);
    }
    return d;
}

Point Identification::apply(const ManifoldModel& a, const ManifoldModel& b, const Point& x) const {
    const Eigen::VectorXd d = chart_displacement(a, x, center_a);
    if (M.rows() != d.size() || M.cols() != d.size())
        throw ValidationError("identification matrix has the wrong shape");
    const Eigen::VectorXd y = M * d;
    Point p = center_b;
    for (int i = 0; i < y.size(); ++i) p.x[i] += y[i];
    return reduce(b, p);
}

Identification Identification::metric_matched(const ManifoldModel& a, const ManifoldModel& b, const Point& center_a,
                                              const Point& center_b) {
    require_flat(a);
    require_flat(b);
    if (a.dimension() != b.dimension()) throw ValidationError("identification between models of different dimension");
    const Eigen::MatrixXd la = Eigen::LLT<Eigen::MatrixXd>(a.torus_metric()).matrixL();
    const Eigen::MatrixXd lb = Eigen::LLT<Eigen::MatrixXd>(b.torus_metric()).matrixL();
    Identification id;
    id.center_a = center_a;
    id.center_b = center_b;
    id.M = lb.transpose().triangularView<Eigen::Upper>().solve(la.transpose());
    return id;
}

ObservationSet make_observation_set(const ManifoldModel& a, const ManifoldModel& b, const QuadratureGrid& grid_a,
                                    const Ball& O, const Ball& omega1, const Ball& omega2, const Identification& iota) {
    require_flat(a);
    require_flat(b);
    if (a.dimension() != b.dimension()) throw ConfigError("models have different dimensions");
    for (const Ball* ball : {&O, &omega1, &omega2})
        if (!(ball->radius > 0.0)) throw ConfigError("ball radii must be positive");
    const double inj = std::min(injectivity_radius(a), injectivity_radius(b));
    if (O.radius >= inj) {
        std::ostringstream os;
        os << "observation radius " << O.radius << " is not below the injectivity radius " << inj;
        throw ConfigError(os.str());
    }
    if (!inside(a, O, omega1) || !inside(a, O, omega2)) throw ConfigError("omega1 and omega2 must lie inside O");
    ObservationSet obs;
    obs.O = O;
    obs.omega1 = omega1;
    obs.omega2 = omega2;
    obs.iota = iota;
    obs.separation = geodesic_distance(a, omega1.center, omega2.center) - omega1.radius - omega2.radius;
    if (!(obs.separation > 0.0)) throw ConfigError("omega1 and omega2 must have disjoint closures");
    for (std::size_t i = 0; i < grid_a.size(); ++i) {
        const Point& x = grid_a.nodes[i];
        if (geodesic_distance(a, x, O.center) < O.radius) {
            obs.nodes.push_back(i);
            obs.points_a.push_back(x);
            obs.points_b.push_back(iota.apply(a, b, x));
            obs.weights.push_back(grid_a.weights[i]);
        }
        if (geodesic_distance(a, x, omega1.center) < omega1.radius) obs.omega1_nodes.push_back(i);
        if (geodesic_distance(a, x, omega2.center) < omega2.radius) {
            obs.omega2_a.push_back(x);
            obs.omega2_b.push_back(iota.apply(a, b, x));
        }
    }
    if (obs.points_a.empty()) throw ConfigError("observation ball contains no grid nodes");
    if (obs.omega2_a.empty()) throw ConfigError("omega2 contains no grid nodes");
    // pairwise distances on a deterministic subsample of O plus the centers
    std::vector<Point> pa{O.center}, pb{iota.apply(a, b, O.center)};
    const std::size_t stride = std::max<std::size_t>(1, obs.points_a.size() / 150);
    for (std::size_t i = 0; i < obs.points_a.size(); i += stride) {
        pa.push_back(obs.points_a[i]);
        pb.push_back(obs.points_b[i]);
    }
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = i + 1; j < pa.size(); ++j)
            obs.isometry_defect = std::max(
                obs.isometry_defect, std::abs(geodesic_distance(a, pa[i], pa[j]) - geodesic_distance(b, pb[i], pb[j])));
    if (obs.isometry_defect > 1e-10) {
        std::ostringstream os;
        os << "identification map is not an isometry of the observation patch (distance defect "
           << obs.isometry_defect << ")";
        throw ConfigError(os.str());
    }
    return obs;
}

// ---------------------------------------------------------------- sources and data

BumpSource bump_source(const ManifoldModel& model, const Ball& ball, BasisPtr basis, const QuadratureGrid& grid,
                       const Ball& omega1) {
    if (!(ball.radius > 0.0)) throw ValidationError("bump_source: radius must be positive");
    if (!inside(model, omega1, ball)) throw ValidationError("bump_source: ball is not contained in omega1");
    BumpSource src;
    src.ball = ball;
    std::vector<double> samples(grid.size());
    std::vector<Point> inner;
    std::vector<double> inner_w;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point& x = grid.nodes[i];
        samples[i] = bump(geodesic_distance(model, x, ball.center), ball.radius);
        src.integral += grid.weights[i] * samples[i];
        if (samples[i] < 0.0) src.nonnegative = false;
        if (geodesic_distance(model, x, omega1.center) < omega1.radius) {
            inner.push_back(x);
            inner_w.push_back(grid.weights[i]);
        }
    }
    src.field = project(samples, basis, grid);
    // Parseval total minus the quadrature mass inside omega1
    const double total = src.field.coeffs.squaredNorm();
    const auto vals = synthesize(src.field, inner);
    double in = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) in += inner_w[i] * vals[i] * vals[i];
    src.leakage = std::sqrt(std::max(total - in, 0.0));
    src.leakage_relative = total > 0.0 ? src.leakage / std::sqrt(total) : 0.0;
    return src;
}

CauchyPair cauchy_pair(const Field& f, double m, std::span<const Point> points) {
    const Field u = solve_source(f, m);
    return {synthesize(u, points), synthesize(f, points)};
}

Discrepancy data_discrepancy(std::span<const double> ua, std::span<const double> ub, std::span<const double> w) {
    if (ua.size() != ub.size() || ua.size() != w.size()) throw ValidationError("data_discrepancy: size mismatch");
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < ua.size(); ++i) {
        diff += w[i] * (ua[i] - ub[i]) * (ua[i] - ub[i]);
        ref += w[i] * ua[i] * ua[i];
    }
    Discrepancy d;
    d.absolute = std::sqrt(diff);
    d.relative = ref > 0.0 ? d.absolute / std::sqrt(ref) : d.absolute;
    return d;
}

// ---------------------------------------------------------------- phi

double phi_s_max(const SpectralBasis& a, const SpectralBasis& b, double m) {
    const Generator g = Generator::perturbed(m);
    return 1.0 / std::max(minimum_time(a, g), minimum_time(b, g));
}

PhiSamples phi_eval(const Field& fa, const Field& fb, double m, std::span<const Point> xs_a,
                    std::span<const Point> xs_b, std::span<const double> s_grid) {
    if (xs_a.size() != xs_b.size()) throw ValidationError("phi_eval: point lists differ in length");
    const double smax = phi_s_max(*fa.basis, *fb.basis, m);
    for (double s : s_grid) {
        if (!(s > 0.0)) throw ValidationError("phi_eval: s must be positive");
        if (s > smax) {
            std::ostringstream os;
            os << "phi_eval: s = " << s << " exceeds " << smax << ", where t = 1/s falls below the truncation threshold";
            throw ValidationError(os.str());
        }
    }
    const Eigen::MatrixXd sa = eigenspace_sums(fa, xs_a);
    const Eigen::MatrixXd sb = eigenspace_sums(fb, xs_b);
    const auto& spa = fa.basis->eigenspaces();
    const auto& spb = fb.basis->eigenspaces();
    PhiSamples out;
    out.s.assign(s_grid.begin(), s_grid.end());
    out.values.resize(static_cast<Eigen::Index>(xs_a.size()), static_cast<Eigen::Index>(s_grid.size()));
    parallel_for(s_grid.size(), default_threads(), [&](std::size_t j) {
        const double t = 1.0 / s_grid[j];
        Eigen::VectorXd da(static_cast<Eigen::Index>(spa.size())), db(static_cast<Eigen::Index>(spb.size()));
        for (std::size_t k = 0; k < spa.size(); ++k)
            da[k] = std::exp(-t * (spa[k].eigenvalue * spa[k].eigenvalue + m * m));
        for (std::size_t k = 0; k < spb.size(); ++k)
            db[k] = std::exp(-t * (spb[k].eigenvalue * spb[k].eigenvalue + m * m));
        out.values.col(static_cast<Eigen::Index>(j)) = (sa * da - sb * db) / std::sqrt(s_grid[j]);
    });
    return out;
}

// ---------------------------------------------------------------- moments

MomentTable moments_unchecked(const PhiSamples& phi, int K, int dim) {
    if (K < 0) throw ValidationError("moments: K must be nonnegative");
    const std::size_t ns = phi.s.size();
    if (ns < 3) throw ValidationError("moments: need at least three s samples");
    for (std::size_t j = 1; j < ns; ++j)
        if (!(phi.s[j] > phi.s[j - 1])) throw ValidationError("moments: s grid must be increasing");
    const int cap = std::max(K, 40);
    const Eigen::Index rows = phi.values.rows();
    MomentTable mt;
    mt.K = K;
    mt.values = Eigen::MatrixXd::Zero(rows, K + 1);
    mt.errors = Eigen::MatrixXd::Zero(rows, K + 1);
    mt.max_abs.assign(K + 1, 0.0);
    mt.max_admissible = cap;
    std::vector<double> u(ns);
    for (std::size_t j = 0; j < ns; ++j) u[j] = std::log(phi.s[j]);
    const double s0 = phi.s.front(), s1 = phi.s.back();
    for (Eigen::Index i = 0; i < rows; ++i) {
        // large-s decay fit ln|phi| = A - c1 s^{1/3} on the last samples
        std::vector<double> fx, fy;
        const std::size_t take = std::max<std::size_t>(4, ns / 8);
        for (std::size_t j = ns - take; j < ns; ++j) {
            const double v = std::abs(phi.values(i, static_cast<Eigen::Index>(j)));
            if (v > 0.0) {
                fx.push_back(std::cbrt(phi.s[j]));
                fy.push_back(std::log(v));
            }
        }
        const bool zero_tail = phi.values(i, static_cast<Eigen::Index>(ns - 1)) == 0.0 && fx.size() < 2;
        double c1 = 0.0, A = 0.0;
        if (fx.size() >= 2) {
            const auto line = fit_line(fx, fy);
            c1 = -line.slope;
            A = line.intercept;
        }
        if (i == 0 || c1 < mt.c1) mt.c1 = c1;
        const double phi0 = std::abs(phi.values(i, 0));
        for (int k = 0; k <= cap; ++k) {
            std::vector<double> g(ns), ga(ns);
            for (std::size_t j = 0; j < ns; ++j) {
                const double sk1 = std::pow(phi.s[j], k + 1.0);
                g[j] = sk1 * phi.values(i, static_cast<Eigen::Index>(j));
                ga[j] = std::abs(g[j]);
            }
            const double full = trapezoid_sum(u, g, 1);
            const double coarse = trapezoid_sum(u, g, 2);
            const double scale = trapezoid_sum(u, ga, 1);
            const double low = phi0 * std::pow(s0, k + 1.0) / (k + 1.0 + 0.5 * dim);
            double high;
            if (zero_tail)
                high = 0.0;
            else if (c1 > 0.0)
                high = std::exp(A + std::log(3.0) + log_upper_gamma(3 * k + 3, c1 * std::cbrt(s1)) -
                                (3.0 * k + 3.0) * std::log(c1));
            else
                high = std::numeric_limits<double>::infinity();
            const double quad = (ns % 2 == 1) ? std::abs(full - coarse) / 3.0 : 0.0;
            const bool ok = high <= 1e-3 * scale || high == 0.0;
            if (!ok && k - 1 < mt.max_admissible) mt.max_admissible = std::min(mt.max_admissible, k - 1);
            if (k <= K) {
                mt.values(i, k) = full;
                mt.errors(i, k) = low + high + quad;
                mt.max_abs[k] = std::max(mt.max_abs[k], std::abs(full));
            }
        }
    }
    return mt;
}

MomentTable moments(const PhiSamples& phi, int K, int dim) {
    MomentTable mt = moments_unchecked(phi, K, dim);
    if (K > mt.max_admissible) {
        std::ostringstream os;
        os << "moments: K = " << K << " exceeds the decay of phi; max admissible K = " << mt.max_admissible;
        throw ValidationError(os.str());
    }
    return mt;
}

// ---------------------------------------------------------------- Hardy transform

WeightedSamples WeightedSamples::from_phi(const PhiSamples& p, std::size_t row) {
    WeightedSamples w;
    const std::size_t n = p.s.size();
    w.s = p.s;
    w.w.assign(n, 0.0);
    w.phi.resize(n);
    for (std::size_t j = 0; j < n; ++j) w.phi[j] = p.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double h = std::log(p.s[j + 1]) - std::log(p.s[j]);
        w.w[j] += 0.5 * h * p.s[j];
        w.w[j + 1] += 0.5 * h * p.s[j + 1];
    }
    return w;
}

WeightedSamples WeightedSamples::from_function(const std::function<double(double)>& phi,
                                               const std::vector<double>& breaks, int nodes_per_panel) {
    const auto rule = composite_gauss_legendre(breaks, nodes_per_panel);
    WeightedSamples w;
    w.s = rule.nodes;
    w.w = rule.weights;
    for (double s : w.s) w.phi.push_back(phi(s));
    return w;
}

double WeightedSamples::l2_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += w[i] * phi[i] * phi[i];
    return std::sqrt(s);
}

std::complex<double> hardy_value(const WeightedSamples& phi, std::complex<double> z) {
    std::complex<double> sum = 0.0;
    const double decay = -2.0 * kPi * z.imag(), turn = 2.0 * kPi * z.real();
    for (std::size_t i = 0; i < phi.s.size(); ++i) {
        if (phi.phi[i] == 0.0) continue;
        const double e = decay * phi.s[i];
        if (e < -45.0) continue;
        sum += std::polar(phi.w[i] * phi.phi[i] * std::exp(e), turn * phi.s[i]);
    }
    return sum;
}

double line_norm(const WeightedSamples& phi, double y, double x_range, double dx) {
    if (!(y > 0.0)) throw ValidationError("line_norm: y must be positive");
    const int n = static_cast<int>(std::llround(x_range / dx));
    const std::size_t nx = 2 * static_cast<std::size_t>(n) + 1;
    std::vector<double> amp, ss;
    std::vector<std::complex<double>> r;
    for (std::size_t i = 0; i < phi.s.size(); ++i) {
        if (phi.phi[i] == 0.0 || -2.0 * kPi * y * phi.s[i] < -45.0) continue;
        ss.push_back(phi.s[i]);
        amp.push_back(phi.w[i] * phi.phi[i] * std::exp(-2.0 * kPi * y * phi.s[i]));
        r.push_back(std::polar(1.0, 2.0 * kPi * dx * phi.s[i]));
    }
    // x advances by dx: each term picks up e^{2 pi i dx s}, re-anchored every 64 steps
    constexpr std::size_t kBlock = 64;
    const std::size_t blocks = (nx + kBlock - 1) / kBlock;
    std::vector<double> sq(nx);
    parallel_for(blocks, default_threads(), [&](std::size_t b) {
        const std::size_t j0 = b * kBlock, j1 = std::min(nx, j0 + kBlock);
        const double x0 = (static_cast<double>(j0) - n) * dx;
        std::vector<std::complex<double>> cur(amp.size());
        for (std::size_t i = 0; i < amp.size(); ++i) cur[i] = std::polar(amp[i], 2.0 * kPi * x0 * ss[i]);
        for (std::size_t j = j0; j < j1; ++j) {
            std::complex<double> f = 0.0;
            for (std::size_t i = 0; i < cur.size(); ++i) {
                f += cur[i];
                cur[i] *= r[i];
            }
            sq[j] = std::norm(f);
        }
    });
    double s = 0.0;
    for (std::size_t j = 0; j < nx; ++j) s += (j == 0 || j + 1 == nx ? 0.5 : 1.0) * sq[j];
    return std::sqrt(s * dx);
}

double morera_residual(const WeightedSamples& phi, const Triangle& tri, int nodes_per_edge) {
    const std::complex<double> v[3] = {tri.a, tri.b, tri.c};
    const double ylow = std::min({tri.a.imag(), tri.b.imag(), tri.c.imag()});
    double smax = 0.0;
    for (std::size_t i = 0; i < phi.s.size(); ++i)
        if (phi.phi[i] != 0.0) smax = std::max(smax, phi.s[i]);
    smax = std::min(smax, -std::log(1e-16) / (2.0 * kPi * ylow));
    std::complex<double> integral = 0.0;
    double fmax = 0.0, perimeter = 0.0;
    for (int e = 0; e < 3; ++e) {
        const std::complex<double> p = v[e], q = v[(e + 1) % 3];
        perimeter += std::abs(q - p);
        const int n = nodes_per_edge + static_cast<int>(std::ceil(2.0 * kPi * smax * std::abs(q - p)));
        const auto gl = gauss_legendre(n, 0.0, 1.0);
        for (std::size_t i = 0; i < gl.size(); ++i) {
            const std::complex<double> f = hardy_value(phi, p + (q - p) * gl.nodes[i]);
            fmax = std::max(fmax, std::abs(f));
            integral += gl.weights[i] * (q - p) * f;
        }
    }
    if (fmax == 0.0) return 0.0;
    return std::abs(integral) / (perimeter * fmax);
}

HardyDiagnostics hardy_transform(const WeightedSamples& phi, std::span<const std::complex<double>> z_grid,
                                 std::span<const Triangle> triangles, std::span<const double> ys, double x_range,
                                 double dx) {
    for (const auto& z : z_grid)
        if (!(z.imag() > 0.0)) throw ValidationError("hardy_transform: every z must lie in the upper half-plane");
    for (const auto& t : triangles)
        for (const auto& z : {t.a, t.b, t.c})
            if (!(z.imag() > 0.0)) throw ValidationError("hardy_transform: triangles must lie in the upper half-plane");
    for (double y : ys)
        if (!(y > 0.0)) throw ValidationError("hardy_transform: y_min must be positive");
    HardyDiagnostics d;
    d.z.assign(z_grid.begin(), z_grid.end());
    d.f.resize(d.z.size());
    parallel_for(d.z.size(), default_threads(), [&](std::size_t i) { d.f[i] = hardy_value(phi, d.z[i]); });
    for (const auto& t : triangles) {
        d.morera.push_back(morera_residual(phi, t));
        d.morera_max = std::max(d.morera_max, d.morera.back());
    }
    d.ys.assign(ys.begin(), ys.end());
    std::sort(d.ys.begin(), d.ys.end());
    for (double y : d.ys) d.line_norms.push_back(line_norm(phi, y, x_range, dx));
    for (std::size_t i = 1; i < d.line_norms.size(); ++i)
        if (d.line_norms[i] > d.line_norms[i - 1] * (1.0 + 1e-12)) d.line_norms_monotone = false;
    d.phi_norm = phi.l2_norm();
    return d;
}

PaleyWienerReport paley_wiener_check(const HardyDiagnostics& diag) {
    PaleyWienerReport r;
    r.phi_norm = diag.phi_norm;
    for (double v : diag.line_norms) r.sup_line_norm = std::max(r.sup_line_norm, v);
    r.relative_gap = r.phi_norm > 0.0 ? std::abs(r.sup_line_norm - r.phi_norm) / r.phi_norm : r.sup_line_norm;
    r.monotone = diag.line_norms_monotone;
    if (diag.ys.size() < 2 || diag.ys.back() / diag.ys.front() < 100.0) {
        r.y_range_ok = false;
        r.warning = "line norms span fewer than two decades in y";
    }
    return r;
}

TaylorCheck taylor_consistency(const WeightedSamples& phi, int K, double radius, int contour_nodes) {
    if (!(radius > 0.0 && radius < 1.0)) throw ValidationError("taylor_consistency: radius must lie in (0, 1)");
    TaylorCheck tc;
    const std::complex<double> z0 = kI;
    std::vector<std::complex<double>> fz(contour_nodes);
    for (int j = 0; j < contour_nodes; ++j)
        fz[j] = hardy_value(phi, z0 + radius * std::polar(1.0, 2.0 * kPi * j / contour_nodes));
    for (int k = 0; k <= K; ++k) {
        std::complex<double> m = 0.0;
        for (std::size_t i = 0; i < phi.s.size(); ++i)
            m += phi.w[i] * phi.phi[i] * std::pow(phi.s[i], k) * std::exp(-2.0 * kPi * phi.s[i]);
        tc.from_moments.push_back(std::pow(2.0 * kPi * kI, k) * m);
        std::complex<double> c = 0.0;
        for (int j = 0; j < contour_nodes; ++j) c += fz[j] * std::polar(1.0, -2.0 * kPi * k * j / contour_nodes);
        c *= std::exp(std::lgamma(k + 1.0)) / (contour_nodes * std::pow(radius, k));
        tc.from_cauchy.push_back(c);
        const double ref = std::max(std::abs(tc.from_moments.back()), 1e-300);
        tc.max_relative = std::max(tc.max_relative, std::abs(tc.from_moments.back() - c) / ref);
    }
    return tc;
}

// ---------------------------------------------------------------- experiments

ExperimentSpec default_experiment() {
    ExperimentSpec s;
    s.a.model = ManifoldModel::flat_torus(2, {1.0, 0.0, 0.0, 1.0}, "square");
    s.b.model = ManifoldModel::flat_torus(2, {1.0, 0.0, 0.0, 1.21}, "stretched");
    s.a.request = s.b.request = BasisRequest::by_modes(2000);
    s.a.resolution = s.b.resolution = 64;
    s.m = 1.0;
    Point c;
    c.x = {0.5, 0.5, 0.0};
    s.O = {c, 0.1};
    Point c1, c2;
    c1.x = {0.45, 0.5, 0.0};
    c2.x = {0.56, 0.5, 0.0};
    s.omega1 = {c1, 0.04};
    s.omega2 = {c2, 0.03};
    const double off[5][3] = {{0.0, 0.0, 0.03}, {0.008, 0.0, 0.025}, {-0.008, 0.0, 0.025},
                              {0.0, 0.008, 0.025}, {0.0, -0.008, 0.025}};
    for (const auto& o : off) {
        Point p = c1;
        p.x[0] += o[0];
        p.x[1] += o[1];
        s.sources.push_back({p, o[2]});
    }
    return s;
}

std::string verdict_for(std::span<const double> discrepancies, double threshold) {
    if (discrepancies.empty()) return "inconclusive";
    const double hi = *std::max_element(discrepancies.begin(), discrepancies.end());
    const double lo = *std::min_element(discrepancies.begin(), discrepancies.end());
    if (hi <= threshold) return "indistinguishable";
    if (lo > 100.0 * threshold) return "distinguishable";
    return "inconclusive";
}

namespace {

struct Built {
    ManifoldModel model;
    BasisPtr basis;
    GridPtr grid;
};

Built build(const ModelSetup& setup) {
    auto basis = build_basis(setup.model, setup.request);
    if (setup.remix_seed) basis = basis.remixed(*setup.remix_seed);
    auto grid = make_grid(setup.model, setup.resolution > 0 ? setup.resolution : basis.min_resolution());
    check_nyquist(*grid, basis);
    return {setup.model, std::make_shared<const SpectralBasis>(std::move(basis)), grid};
}

struct PairOutcome {
    ObservationSet obs;
    std::vector<SourceResult> sources;
    std::vector<Field> fa, fb;
};

PairOutcome run_pair(const Built& A, const Built& B, const ExperimentSpec& spec, const Identification& iota) {
    PairOutcome out;
    out.obs = make_observation_set(A.model, B.model, *A.grid, spec.O, spec.omega1, spec.omega2, iota);
    const Ball omega1_b{iota.apply(A.model, B.model, spec.omega1.center), spec.omega1.radius};
    for (const auto& ball : spec.sources) {
        const Ball ball_b{iota.apply(A.model, B.model, ball.center), ball.radius};
        const auto sa = bump_source(A.model, ball, A.basis, *A.grid, spec.omega1);
        const auto sb = bump_source(B.model, ball_b, B.basis, *B.grid, omega1_b);
        for (const auto* s : {&sa, &sb})
            if (s->leakage_relative > spec.leakage_bound) {
                std::ostringstream os;
                os << "source leakage " << s->leakage_relative << " exceeds the configured bound " << spec.leakage_bound;
                throw ValidationError(os.str());
            }
        const auto pa = cauchy_pair(sa.field, spec.m, out.obs.points_a);
        const auto pb = cauchy_pair(sb.field, spec.m, out.obs.points_b);
        SourceResult r;
        r.ball = ball;
        r.discrepancy = data_discrepancy(pa.u, pb.u, out.obs.weights);
        r.leakage_a = sa.leakage_relative;
        r.leakage_b = sb.leakage_relative;
        out.sources.push_back(r);
        out.fa.push_back(sa.field);
        out.fb.push_back(sb.field);
    }
    return out;
}

}  // namespace

ExperimentReport distinguish(const ExperimentSpec& spec, bool with_diagnostics) {
    if (spec.sources.empty()) throw ConfigError("experiment needs at least one source");
    if (spec.m == 0.0) throw ConfigError("experiment mass m must be nonzero");
    const Built A = build(spec.a);
    const Built B = build(spec.b);
    const Point cb = spec.center_b.value_or(spec.O.center);
    Identification iota = Identification::metric_matched(A.model, B.model, spec.O.center, cb);
    if (spec.map) iota.M = *spec.map;

    ExperimentReport rep;
    rep.model_a = A.model.label();
    rep.model_b = B.model.label();
    rep.modes_a = A.basis->size();
    rep.modes_b = B.basis->size();
    rep.cutoff_a = A.basis->cutoff();
    rep.cutoff_b = B.basis->cutoff();

    // null calibration against an independently built copy of model A
    {
        ModelSetup copy = spec.a;
        copy.remix_seed.reset();
        const Built A2 = build(copy);
        Built A1 = A;
        if (spec.a.remix_seed) A1 = build(copy);
        Identification same = Identification::metric_matched(A1.model, A2.model, spec.O.center, spec.O.center);
        const auto null_run = run_pair(A1, A2, spec, same);
        for (const auto& s : null_run.sources) rep.null_residual = std::max(rep.null_residual, s.discrepancy.relative);
    }
    rep.null_threshold = std::max(spec.null_floor, 10.0 * rep.null_residual);

    const auto run = run_pair(A, B, spec, iota);
    rep.observation_nodes = run.obs.nodes.size();
    rep.isometry_defect = run.obs.isometry_defect;
    rep.separation = run.obs.separation;
    rep.sources = run.sources;
    std::vector<double> rel;
    for (const auto& s : rep.sources) {
        rel.push_back(s.discrepancy.relative);
        rep.max_discrepancy = std::max(rep.max_discrepancy, s.discrepancy.relative);
    }
    rep.verdict = verdict_for(rel, rep.null_threshold);

    if (with_diagnostics) {
        rep.s_max = phi_s_max(*A.basis, *B.basis, spec.m);
        if (!(spec.s_min < rep.s_max)) throw ConfigError("s_min must lie below the truncation limit of s");
        const auto s_grid = logspace(spec.s_min, rep.s_max, spec.s_points);
        rep.phi = phi_eval(run.fa.front(), run.fb.front(), spec.m, run.obs.omega2_a, run.obs.omega2_b, s_grid);
        rep.moments = moments_unchecked(rep.phi, spec.K, A.model.dimension());

        // Hardy diagnostics on a Gauss-Legendre s-rule fine enough for |x| <= 100
        const double ymin = *std::min_element(spec.hardy_ys.begin(), spec.hardy_ys.end());
        const double s_top = std::min(rep.s_max, -std::log(1e-16) / (4.0 * kPi * ymin));
        const int panels = static_cast<int>(std::ceil(s_top / 0.02));
        std::vector<double> breaks = linspace(0.0, s_top, panels + 1);
        const auto rule = composite_gauss_legendre(breaks, 16);
        const std::vector<Point> xa{run.obs.omega2_a.front()}, xb{run.obs.omega2_b.front()};
        const auto pv = phi_eval(run.fa.front(), run.fb.front(), spec.m, xa, xb, rule.nodes);
        WeightedSamples ws;
        ws.s = rule.nodes;
        ws.w = rule.weights;
        ws.phi.assign(pv.values.data(), pv.values.data() + pv.values.size());
        std::vector<std::complex<double>> zs;
        for (double x : {-1.0, -0.25, 0.0, 0.25, 1.0})
            for (double y : {0.05, 0.2, 1.0}) zs.emplace_back(x, y);
        const std::vector<Triangle> tris{{{-0.5, 0.1}, {0.5, 0.1}, {0.0, 0.8}}, {{0.2, 0.3}, {1.2, 0.3}, {0.7, 1.5}}};
        rep.hardy = hardy_transform(ws, zs, tris, spec.hardy_ys);
        rep.paley_wiener = paley_wiener_check(rep.hardy);
    }
    return rep;
}

}  // namespace clab
