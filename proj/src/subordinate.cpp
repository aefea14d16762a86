#include "clab/subordinate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clab/errors.hpp"
#include "clab/heat.hpp"
#include "clab/quadrature.hpp"

namespace clab {

namespace {

constexpr double kPanelWidth = 1.5;  // in ln t

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("subordination: alpha must lie in (0, 1)");
}

SubordinationScheme assemble(double alpha, double mu_min, double mu_max, double tol, double split, int n) {
    SubordinationScheme s;
    s.alpha = alpha;
    s.split = split;
    s.tol = tol;
    s.mu_min = mu_min;
    s.mu_max = mu_max;
    s.nodes_per_panel = n;
    const double inv_gamma = 1.0 / std::tgamma(alpha);
    const double t0 = 1e-3 / mu_max;
    const double tend = std::max(-std::log(1e-16) / mu_min, 2.0 * t0);

    const auto inner = gauss_legendre(n, 0.0, std::pow(t0, alpha));
    for (std::size_t i = 0; i < inner.size(); ++i) {
        s.nodes.push_back(std::pow(inner.nodes[i], 1.0 / alpha));
        s.weights.push_back(inner.weights[i] / alpha * inv_gamma);
    }
    s.inner_nodes = inner.size();

    std::vector<double> cuts{std::log(t0)};
    if (split > t0 && split < tend) cuts.push_back(std::log(split));
    cuts.push_back(std::log(tend));
    std::vector<double> breaks;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const int panels = std::max(1, static_cast<int>(std::ceil((cuts[c + 1] - cuts[c]) / kPanelWidth)));
        for (int p = 0; p < panels; ++p) breaks.push_back(cuts[c] + (cuts[c + 1] - cuts[c]) * p / panels);
    }
    breaks.push_back(cuts.back());
    const auto outer = composite_gauss_legendre(breaks, n);
    for (std::size_t i = 0; i < outer.size(); ++i) {
        const double t = std::exp(outer.nodes[i]);
        s.nodes.push_back(t);
        s.weights.push_back(outer.weights[i] * std::pow(t, alpha) * inv_gamma);
    }
    return s;
}

}  // namespace

double scalar_subordinate(double mu, double alpha, const SubordinationScheme& scheme) {
    if (!(mu > 0.0)) throw ValidationError("scalar_subordinate: mu must be positive");
    if (std::abs(alpha - scheme.alpha) > 1e-15) throw ValidationError("scalar_subordinate: scheme built for another alpha");
    double sum = 0.0;
    for (std::size_t i = 0; i < scheme.size(); ++i) sum += scheme.weights[i] * std::exp(-mu * scheme.nodes[i]);
    return sum;
}

SchemeCheck check_scheme(const SubordinationScheme& scheme, double mu_lo, double mu_hi, int points) {
    SchemeCheck c;
    const auto mus = mu_hi > mu_lo ? logspace(mu_lo, mu_hi, points) : std::vector<double>{mu_lo};
    for (double mu : mus) {
        const double exact = std::pow(mu, -scheme.alpha);
        const double err = std::abs(scalar_subordinate(mu, scheme.alpha, scheme) - exact) / exact;
        if (c.worst_mu == 0.0 || err > c.worst_error) {
            c.worst_error = err;
            c.worst_mu = mu;
        }
    }
    c.ok = c.worst_error <= scheme.tol;
    return c;
}

SubordinationScheme build_scheme(double alpha, double mu_min, double mu_max, double tol, double split) {
    check_alpha(alpha);
    if (!(mu_min > 0.0) || !(mu_max >= mu_min)) throw ValidationError("build_scheme: need 0 < mu_min <= mu_max");
    if (!(tol > 0.0)) throw ValidationError("build_scheme: tolerance must be positive");
    if (!(split > 0.0)) throw ValidationError("build_scheme: split point must be positive");
    for (int n = 4; n <= 64; ++n) {
        auto s = assemble(alpha, mu_min, mu_max, tol, split, n);
        s.tol = tol / 10.0;
        const auto c = check_scheme(s, mu_min, mu_max, 64);
        s.tol = tol;
        s.self_check_error = c.worst_error;
        if (c.worst_error <= tol / 10.0) return s;
    }
    std::ostringstream os;
    os << "build_scheme: no panel order up to 64 reaches tolerance " << tol << " on [" << mu_min << ", " << mu_max
       << "]";
    throw NumericError(os.str());
}

SubordinationScheme scheme_for_basis(double alpha, double m, const SpectralBasis& basis, double tol) {
    if (m == 0.0) throw ValidationError("scheme_for_basis: m must be nonzero");
    const double lmax = basis.max_eigenvalue();
    return build_scheme(alpha, m * m, lmax * lmax + m * m, tol);
}

Field field_subordinate(const Field& v, double alpha, double m, const SubordinationScheme& scheme) {
    check_alpha(alpha);
    const Generator gen = Generator::perturbed(m);
    if (std::abs(alpha - scheme.alpha) > 1e-15)
        throw ConfigError("field_subordinate: scheme was built for a different alpha");
    const double lmax = v.basis->max_eigenvalue();
    const auto c = check_scheme(scheme, m * m, lmax * lmax + m * m);
    if (!c.ok) {
        std::ostringstream os;
        os << "subordination scheme fails its self-check on the spectrum of L: worst mu = " << c.worst_mu
           << " with relative error " << c.worst_error << " > " << scheme.tol;
        throw ConfigError(os.str());
    }
    Field out = Field::zero(v.basis);
    for (std::size_t i = 0; i < scheme.size(); ++i)
        out.coeffs += scheme.weights[i] * semigroup_apply(v, scheme.nodes[i], gen).coeffs;
    return out;
}

namespace {
Field apply_L(const Field& u, double m) {
    Field out = u;
    for (const auto& sp : u.basis->eigenspaces())
        out.coeffs.segment(static_cast<Eigen::Index>(sp.offset), static_cast<Eigen::Index>(sp.multiplicity)) *=
            sp.eigenvalue * sp.eigenvalue + m * m;
    return out;
}
}  // namespace

Field pos_power_compose(const Field& u, double alpha, double m, const SubordinationScheme& scheme) {
    check_alpha(alpha);
    return apply_L(field_subordinate(u, 1.0 - alpha, m, scheme), m);
}

Field pos_power_compose_reversed(const Field& u, double alpha, double m, const SubordinationScheme& scheme) {
    check_alpha(alpha);
    return field_subordinate(apply_L(u, m), 1.0 - alpha, m, scheme);
}

NormBoundReport norm_bound_check(double alpha, double m, std::span<const Field> trials,
                                 const SubordinationScheme& scheme) {
    if (trials.empty()) throw ValidationError("norm_bound_check: no trial fields");
    NormBoundReport r;
    const double beta = m * m;
    for (const auto& v : trials) {
        const double nv = v.norm();
        if (nv == 0.0) {
            r.ratios.push_back(0.0);
            continue;
        }
        const double ratio = field_subordinate(v, alpha, m, scheme).norm() / (std::pow(beta, -alpha) * nv);
        r.ratios.push_back(ratio);
        r.max_ratio = std::max(r.max_ratio, ratio);
        if (ratio > 1.0 + 1e-10) r.holds = false;
    }
    return r;
}

}  // namespace clab
