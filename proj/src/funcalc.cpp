#include "clab/funcalc.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "clab/errors.hpp"
#include "clab/quadrature.hpp"

namespace clab {

namespace {

void require_same_basis(const Field& u, const Field& v, const char* what) {
    if (u.basis != v.basis)
        throw ValidationError(std::string(what) + ": fields live on different bases");
    if (u.size() != v.size()) throw ValidationError(std::string(what) + ": coefficient lengths differ");
}

void require_nonzero_mass(double m) {
    if (m == 0.0 || !std::isfinite(m)) throw ValidationError("mass m must be a nonzero finite number");
}

// Number of fixed reduction chunks; independent of the thread count.
constexpr std::size_t kChunks = 64;

}  // namespace

// ---------------------------------------------------------------- fields

Field Field::zero(BasisPtr basis) {
    Field f;
    f.coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size()));
    f.basis = std::move(basis);
    return f;
}

Field Field::mode(BasisPtr basis, std::size_t index) {
    Field f = zero(std::move(basis));
    if (index >= f.size()) throw ValidationError("Field::mode: index out of range");
    f.coeffs[static_cast<Eigen::Index>(index)] = 1.0;
    return f;
}

Field Field::random(BasisPtr basis, std::uint64_t seed, double max_lambda) {
    Field f = zero(std::move(basis));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto& lam = f.basis->mode_eigenvalues();
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double z = normal(rng);
        if (max_lambda < 0.0 || lam[j] <= max_lambda) f.coeffs[static_cast<Eigen::Index>(j)] = z;
    }
    return f;
}

Eigen::VectorXd Field::block(std::size_t k) const {
    const auto& sp = basis->eigenspaces().at(k);
    return coeffs.segment(static_cast<Eigen::Index>(sp.offset), static_cast<Eigen::Index>(sp.multiplicity));
}

Field Field::operator+(const Field& o) const {
    require_same_basis(*this, o, "Field::operator+");
    return {basis, coeffs + o.coeffs};
}

Field Field::operator-(const Field& o) const {
    require_same_basis(*this, o, "Field::operator-");
    return {basis, coeffs - o.coeffs};
}

Field Field::operator*(double s) const { return {basis, coeffs * s}; }

Field ComplexField::real() const { return {basis, coeffs.real()}; }
Field ComplexField::imag() const { return {basis, coeffs.imag()}; }

double inner_product(const Field& u, const Field& v) {
    require_same_basis(u, v, "inner_product");
    return u.coeffs.dot(v.coeffs);
}

// ---------------------------------------------------------------- multipliers

SpectralMultiplier::SpectralMultiplier(std::string name, RealRule rule)
    : name_(std::move(name)), complex_(false), real_(std::move(rule)) {}

SpectralMultiplier::SpectralMultiplier(std::string name, ComplexRule rule)
    : name_(std::move(name)), complex_(true), cplx_(std::move(rule)) {}

double SpectralMultiplier::operator()(double lambda) const {
    if (complex_) throw ValidationError("multiplier " + name_ + " is complex valued");
    return real_(lambda);
}

std::complex<double> SpectralMultiplier::complex_value(double lambda) const {
    return complex_ ? cplx_(lambda) : std::complex<double>(real_(lambda), 0.0);
}

std::vector<std::string> SpectralMultiplier::names() {
    return {"identity", "L_half",   "L_neg_half", "frac_lap",  "A_g",       "heat",
            "biheat",   "heat_L",   "sinc_wave",  "cos_wave",  "half_wave", "exp_wave"};
}

SpectralMultiplier SpectralMultiplier::named(const std::string& name, const MultiplierParams& p) {
    const double m = p.m, a = p.alpha, t = p.t, s = p.sigma;
    auto need_t = [&] {
        if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError(name + ": t must be nonnegative");
    };
    if (name == "identity") return {name, RealRule([](double) { return 1.0; })};
    if (name == "L_half") {
        require_nonzero_mass(m);
        return {name, RealRule([m](double l) { return std::hypot(l, m); })};
    }
    if (name == "L_neg_half") {
        require_nonzero_mass(m);
        return {name, RealRule([m](double l) { return 1.0 / std::hypot(l, m); })};
    }
    if (name == "frac_lap") {
        if (!(a > 0.0 && a <= 1.0)) throw ValidationError("frac_lap: alpha must lie in (0, 1]");
        return {name, RealRule([a](double l) { return std::pow(l, a); })};
    }
    if (name == "A_g") {
        if (!(m > 0.0)) throw ValidationError("A_g: m must be positive");
        // sqrt(l^2+m^2) - m without cancellation
        return {name, RealRule([m](double l) { return l * l / (std::hypot(l, m) + m); })};
    }
    if (name == "heat") {
        need_t();
        return {name, RealRule([t](double l) { return std::exp(-t * l); })};
    }
    if (name == "biheat") {
        need_t();
        return {name, RealRule([t](double l) { return std::exp(-t * l * l); })};
    }
    if (name == "heat_L") {
        need_t();
        require_nonzero_mass(m);
        return {name, RealRule([t, m](double l) { return std::exp(-t * (l * l + m * m)); })};
    }
    if (name == "sinc_wave")
        return {name, RealRule([s](double l) { return l == 0.0 ? s : std::sin(s * l) / l; })};
    if (name == "cos_wave") return {name, RealRule([s](double l) { return std::cos(s * l); })};
    if (name == "half_wave") {
        need_t();
        return {name, RealRule([t](double l) {
                    const double r = std::sqrt(l);
                    return r == 0.0 ? t : std::sin(t * r) / r;
                })};
    }
    if (name == "exp_wave")
        return {name, ComplexRule([s](double l) { return std::polar(1.0, -s * l); })};
    std::ostringstream os;
    os << "unknown multiplier '" << name << "'; expected one of";
    for (const auto& n : names()) os << ' ' << n;
    throw ValidationError(os.str());
}

SpectralMultiplier SpectralMultiplier::product(const SpectralMultiplier& a, const SpectralMultiplier& b) {
    const std::string name = a.name() + "*" + b.name();
    if (a.is_complex() || b.is_complex())
        return {name, ComplexRule([a, b](double l) { return a.complex_value(l) * b.complex_value(l); })};
    return {name, RealRule([a, b](double l) { return a(l) * b(l); })};
}

// ---------------------------------------------------------------- projection

Field project(std::span<const double> samples, BasisPtr basis, const QuadratureGrid& grid) {
    if (samples.size() != grid.size()) throw ValidationError("project: samples are not defined on this grid");
    check_nyquist(grid, *basis);
    const std::size_t n = grid.size();
    const std::size_t modes = basis->size();
    const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(n, 1));
    std::vector<Eigen::VectorXd> partial(chunks, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(modes)));
    parallel_for(chunks, default_threads(), [&](std::size_t c) {
        std::vector<double> row(modes);
        Eigen::Map<const Eigen::VectorXd> r(row.data(), static_cast<Eigen::Index>(modes));
        for (std::size_t i = c * n / chunks; i < (c + 1) * n / chunks; ++i) {
            const double w = grid.weights[i] * samples[i];
            if (w == 0.0) continue;
            basis->evaluate(grid.nodes[i], row);
            partial[c].noalias() += w * r;
        }
    });
    Field f = Field::zero(basis);
    for (const auto& p : partial) f.coeffs += p;
    return f;
}

Field project(const std::function<double(const Point&)>& fn, BasisPtr basis, const QuadratureGrid& grid) {
    std::vector<double> samples(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) samples[i] = fn(grid.nodes[i]);
    return project(samples, std::move(basis), grid);
}

std::vector<double> synthesize(const Field& u, std::span<const Point> points) {
    std::vector<double> out(points.size());
    parallel_for(points.size(), default_threads(), [&](std::size_t i) {
        std::vector<double> row(u.size());
        u.basis->evaluate(points[i], row);
        out[i] = Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())).dot(u.coeffs);
    });
    return out;
}

std::vector<double> synthesize(const Field& u, const QuadratureGrid& grid) { return synthesize(u, grid.nodes); }

double evaluate(const Field& u, const Point& p) {
    const auto row = u.basis->evaluate(p);
    return Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())).dot(u.coeffs);
}

// ---------------------------------------------------------------- operators

Field apply_multiplier(const Field& u, const SpectralMultiplier& mult) {
    if (mult.is_complex())
        throw ValidationError("apply_multiplier: " + mult.name() + " is complex; use apply_complex");
    Field out = u;
    for (const auto& sp : u.basis->eigenspaces()) {
        const double v = mult(sp.eigenvalue);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "multiplier " << mult.name() << " is undefined at eigenvalue " << sp.eigenvalue;
            throw DomainError(os.str());
        }
        out.coeffs.segment(static_cast<Eigen::Index>(sp.offset), static_cast<Eigen::Index>(sp.multiplicity)) *= v;
    }
    return out;
}

ComplexField apply_complex(const ComplexField& u, const SpectralMultiplier& mult) {
    ComplexField out = u;
    for (const auto& sp : u.basis->eigenspaces()) {
        const std::complex<double> v = mult.complex_value(sp.eigenvalue);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::ostringstream os;
            os << "multiplier " << mult.name() << " is undefined at eigenvalue " << sp.eigenvalue;
            throw DomainError(os.str());
        }
        out.coeffs.segment(static_cast<Eigen::Index>(sp.offset), static_cast<Eigen::Index>(sp.multiplicity)) *= v;
    }
    return out;
}

ComplexField apply_complex(const Field& u, const SpectralMultiplier& mult) {
    return apply_complex(ComplexField{u.basis, u.coeffs.cast<std::complex<double>>()}, mult);
}

Field solve_source(const Field& f, double m) {
    require_nonzero_mass(m);
    MultiplierParams p;
    p.m = m;
    return apply_multiplier(f, SpectralMultiplier::named("L_neg_half", p));
}

Field apply_Ag(const Field& u, double m) {
    MultiplierParams p;
    p.m = m;
    return apply_multiplier(u, SpectralMultiplier::named("A_g", p));
}

Field solve_Ag(const Field& f, double m) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("solve_Ag: m must be positive");
    const auto& spaces = f.basis->eigenspaces();
    const auto& zero = spaces.front();
    const double mean = f.coeffs.segment(static_cast<Eigen::Index>(zero.offset),
                                         static_cast<Eigen::Index>(zero.multiplicity))
                            .norm();
    if (mean > 1e-12 * std::max(f.norm(), 1e-300) && mean > 0.0) {
        std::ostringstream os;
        os << "solve_Ag: source has nonzero mean (constant-mode coefficient " << mean << ")";
        throw ValidationError(os.str());
    }
    Field u = f;
    for (const auto& sp : spaces) {
        auto seg = u.coeffs.segment(static_cast<Eigen::Index>(sp.offset), static_cast<Eigen::Index>(sp.multiplicity));
        if (sp.eigenvalue == 0.0) {
            seg.setZero();
        } else {
            const double l = sp.eigenvalue;
            seg *= (std::hypot(l, m) + m) / (l * l);
        }
    }
    return u;
}

double evaluate_symbol(const ManifoldModel& model, const Point& x, std::span<const double> xi, double m) {
    require_nonzero_mass(m);
    const int n = model.dimension();
    if (xi.size() != static_cast<std::size_t>(n))
        throw ValidationError("evaluate_symbol: covector has the wrong dimension");
    bool nonzero = false;
    for (double v : xi) nonzero = nonzero || v != 0.0;
    if (!nonzero) throw ValidationError("evaluate_symbol: covector must be nonzero");
    double q = 0.0;
    if (std::holds_alternative<Sphere2>(model.kind())) {
        const double r = std::get<Sphere2>(model.kind()).radius;
        const double st = std::sin(reduce(model, x).x[0]);
        if (st == 0.0) throw ValidationError("evaluate_symbol: chart is singular at the poles");
        q = xi[0] * xi[0] / (r * r) + xi[1] * xi[1] / (r * r * st * st);
    } else {
        const Eigen::MatrixXd gi = model.torus_metric().inverse();
        const Eigen::Map<const Eigen::VectorXd> v(xi.data(), n);
        q = v.dot(gi * v);
    }
    return std::sqrt(q * q + m * m);
}

}  // namespace clab
