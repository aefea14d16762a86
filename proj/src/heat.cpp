#include "clab/heat.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "clab/errors.hpp"
#include "clab/quadrature.hpp"

namespace clab {

Generator Generator::perturbed(double m) {
    if (m == 0.0 || !std::isfinite(m)) throw ValidationError("perturbed bi-Laplacian needs a nonzero mass m");
    return {Kind::PerturbedBiLaplace, m};
}

Generator Generator::parse(const std::string& name, double m) {
    if (name == "laplace") return laplace();
    if (name == "bilaplace") return bilaplace();
    if (name == "L") return perturbed(m);
    throw ValidationError("unknown generator '" + name + "'; expected laplace, bilaplace or L");
}

double Generator::exponent(double lambda) const {
    switch (kind) {
        case Kind::Laplace: return lambda;
        case Kind::BiLaplace: return lambda * lambda;
        case Kind::PerturbedBiLaplace: return lambda * lambda + m * m;
    }
    return lambda;
}

std::string Generator::name() const {
    switch (kind) {
        case Kind::Laplace: return "laplace";
        case Kind::BiLaplace: return "bilaplace";
        case Kind::PerturbedBiLaplace: return "L";
    }
    return "laplace";
}

Field semigroup_apply(const Field& u, double t, const Generator& gen) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("semigroup_apply: t must be nonnegative");
    if (t == 0.0) return u;
    Field out = u;
    for (const auto& sp : u.basis->eigenspaces()) {
        const double v = std::exp(-t * gen.exponent(sp.eigenvalue));
        out.coeffs.segment(static_cast<Eigen::Index>(sp.offset), static_cast<Eigen::Index>(sp.multiplicity)) *= v;
    }
    return out;
}

double minimum_time(const SpectralBasis& basis, const Generator& gen, double tail) {
    const double e = gen.exponent(basis.max_eigenvalue());
    if (e <= 0.0) return 0.0;
    return -std::log(tail) / e;
}

void check_time(const SpectralBasis& basis, const Generator& gen, double t) {
    const double tmin = minimum_time(basis, gen);
    if (t < tmin) {
        // cutoff needed so that the first omitted eigenvalue is damped below 1e-14
        const double e = -std::log(1e-14) / t;
        double need = gen.kind == Generator::Kind::Laplace ? e : std::sqrt(std::max(e - gen.m * gen.m, 0.0));
        std::ostringstream os;
        os << "t = " << t << " is below the truncation threshold " << tmin << " for the " << gen.name()
           << " kernel at cutoff " << basis.cutoff() << "; need cutoff >= " << need;
        throw ValidationError(os.str());
    }
}

KernelSlice kernel_slice(double t, const Generator& gen, std::span<const Point> xs, std::span<const Point> ys,
                         const SpectralBasis& basis) {
    if (!(t > 0.0)) throw ValidationError("kernel_slice: t must be positive");
    check_time(basis, gen, t);
    KernelSlice s;
    s.t = t;
    s.gen = gen;
    s.cutoff = basis.cutoff();
    s.xs.assign(xs.begin(), xs.end());
    s.ys.assign(ys.begin(), ys.end());
    const Eigen::MatrixXd ex = basis.evaluate_matrix(xs);
    const Eigen::MatrixXd ey = basis.evaluate_matrix(ys);
    Eigen::VectorXd mult(static_cast<Eigen::Index>(basis.size()));
    const auto& lam = basis.mode_eigenvalues();
    for (std::size_t j = 0; j < basis.size(); ++j) mult[j] = std::exp(-t * gen.exponent(lam[j]));
    s.values = (ex * mult.asDiagonal()) * ey.transpose();
    return s;
}

KernelSlice kernel_slice(double t, const Generator& gen, const QuadratureGrid& grid, const SpectralBasis& basis) {
    return kernel_slice(t, gen, grid.nodes, grid.nodes, basis);
}

std::vector<double> kernel_apply(const KernelSlice& slice, const QuadratureGrid& grid, std::span<const double> v) {
    if (static_cast<std::size_t>(slice.values.cols()) != grid.size() || v.size() != grid.size())
        throw ValidationError("kernel_apply: slice columns are not the grid nodes");
    Eigen::VectorXd wv(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) wv[j] = grid.weights[j] * v[j];
    const Eigen::VectorXd r = slice.values * wv;
    return {r.data(), r.data() + r.size()};
}

std::vector<double> kernel_mass(const KernelSlice& slice, const QuadratureGrid& grid) {
    std::vector<double> ones(grid.size(), 1.0);
    return kernel_apply(slice, grid, ones);
}

BoundFit fit_bound(const SpectralBasis& basis, std::span<const BoundSample> samples, double c, const Generator& gen) {
    if (samples.empty()) throw ValidationError("fit_bound: empty sample set");
    if (!(c > 0.0)) throw ValidationError("fit_bound: c must be positive");
    const ManifoldModel& model = basis.model();
    const int n = model.dimension();
    const auto& lam = basis.mode_eigenvalues();
    BoundFit fit;
    fit.c = c;
    fit.n = n;
    fit.sample_count = samples.size();
    fit.rows.resize(samples.size());
    std::vector<double> score(samples.size());
    parallel_for(samples.size(), default_threads(), [&](std::size_t i) {
        const auto& s = samples[i];
        check_time(basis, gen, s.t);
        const auto px = basis.evaluate(s.x);
        const auto py = basis.evaluate(s.y);
        double k = 0.0;
        for (std::size_t j = 0; j < px.size(); ++j) k += std::exp(-s.t * gen.exponent(lam[j])) * px[j] * py[j];
        const double d = geodesic_distance(model, s.x, s.y);
        auto& row = fit.rows[i];
        row.t = s.t;
        row.x = s.x;
        row.y = s.y;
        row.d = d;
        row.K = k;
        score[i] = (k == 0.0) ? -std::numeric_limits<double>::infinity()
                              : std::log(std::abs(k)) + 0.25 * n * std::log(s.t) +
                                    c * std::pow(d, 4.0 / 3.0) / std::cbrt(s.t);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (score[i] > score[best]) best = i;
    if (!std::isfinite(score[best])) throw NumericError("fit_bound: every sampled kernel value vanished");
    fit.sup_ratio_log = score[best];
    fit.C = std::exp(score[best]);
    fit.argmax = samples[best];
    fit.argmax_distance = fit.rows[best].d;
    for (auto& row : fit.rows) {
        row.bound = fit.C * std::pow(row.t, -0.25 * n) * std::exp(-c * std::pow(row.d, 4.0 / 3.0) / std::cbrt(row.t));
        row.ratio = std::abs(row.K) / row.bound;
    }
    return fit;
}

std::vector<BoundSample> bound_samples(const QuadratureGrid& grid, std::span<const double> ts) {
    std::vector<BoundSample> out;
    out.reserve(ts.size() * grid.size());
    for (double t : ts)
        for (const auto& y : grid.nodes) out.push_back({t, grid.nodes.front(), y});
    return out;
}

MonotonicityReport bound_sweep(const SpectralBasis& basis, std::span<const BoundSample> samples,
                               std::span<const double> cs, const Generator& gen) {
    MonotonicityReport r;
    for (double c : cs) {
        r.cs.push_back(c);
        r.Cs.push_back(fit_bound(basis, samples, c, gen).C);
        if (r.Cs.size() > 1 && r.Cs.back() < r.Cs[r.Cs.size() - 2]) r.nondecreasing = false;
    }
    return r;
}

double linf_operator_norm(const SpectralBasis& basis, std::span<const Point> points, const SpectralMultiplier& mult) {
    if (points.empty()) throw ValidationError("linf_operator_norm: no points");
    std::vector<double> m2(basis.size());
    for (std::size_t k = 0; k < basis.eigenspaces().size(); ++k) {
        const auto& sp = basis.eigenspaces()[k];
        const double v = mult(sp.eigenvalue);
        if (!std::isfinite(v)) throw DomainError("linf_operator_norm: multiplier undefined on the basis");
        for (std::size_t j = 0; j < sp.multiplicity; ++j) m2[sp.offset + j] = v * v;
    }
    std::vector<double> sq(points.size());
    parallel_for(points.size(), default_threads(), [&](std::size_t i) {
        const auto phi = basis.evaluate(points[i]);
        double s = 0.0;
        for (std::size_t j = 0; j < phi.size(); ++j) s += m2[j] * phi[j] * phi[j];
        sq[i] = s;
    });
    double best = 0.0;
    for (double s : sq) best = std::max(best, s);
    return std::sqrt(best);
}

}  // namespace clab
