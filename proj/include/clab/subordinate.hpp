#pragma once

// Negative fractional powers through the Gamma-integral
// mu^{-alpha} = Gamma(alpha)^{-1} int_0^inf t^{alpha-1} e^{-t mu} dt.

#include <span>
#include <vector>

#include "clab/funcalc.hpp"

namespace clab {

/// Nodes t_i and weights w_i (Gamma(alpha)^{-1} and the Jacobians folded in)
/// with sum_i w_i exp(-t_i mu) ~ mu^{-alpha} on [mu_min, mu_max].
///
/// [0, t0] with t0 = 1e-3 / mu_max uses t = u^{1/alpha}, which turns the
/// integrand into the smooth (1/alpha) exp(-mu u^{1/alpha}). [t0, T] is covered
/// by Gauss-Legendre panels in ln t with a break at split; T is where
/// exp(-mu_min T) drops below 1e-16.
struct SubordinationScheme {
    double alpha = 0.5;
    double split = 1.0;
    double tol = 1e-10;
    double mu_min = 1.0;
    double mu_max = 1.0;
    int nodes_per_panel = 0;
    std::size_t inner_nodes = 0;  // nodes from the substituted piece
    std::vector<double> nodes;
    std::vector<double> weights;
    double self_check_error = 0.0;

    std::size_t size() const { return nodes.size(); }
};

/// Grows the per-panel order until the rule reproduces mu^{-alpha} to tol/10 on
/// log-spaced check points of [mu_min, mu_max]. Throws NumericError if no order
/// up to 64 suffices.
SubordinationScheme build_scheme(double alpha, double mu_min, double mu_max, double tol = 1e-10,
                                 double split = 1.0);

/// Scheme covering the spectrum [m^2, lambda_max^2 + m^2] of L on the basis.
SubordinationScheme scheme_for_basis(double alpha, double m, const SpectralBasis& basis, double tol = 1e-10);

double scalar_subordinate(double mu, double alpha, const SubordinationScheme& scheme);

struct SchemeCheck {
    double worst_mu = 0.0;
    double worst_error = 0.0;
    bool ok = true;
};
/// Relative error of the scheme against mu^{-alpha} on [mu_lo, mu_hi].
SchemeCheck check_scheme(const SubordinationScheme& scheme, double mu_lo, double mu_hi, int points = 48);

/// sum_i w_i e^{-t_i L} v with L = Delta^2 + m^2. Throws ConfigError naming the
/// worst mu if the scheme fails on the spectrum of L.
Field field_subordinate(const Field& v, double alpha, double m, const SubordinationScheme& scheme);

/// L^alpha u as L o L^{-(1-alpha)} u; the scheme must be built for 1 - alpha.
Field pos_power_compose(const Field& u, double alpha, double m, const SubordinationScheme& scheme);
/// Same operator in the order L^{-(1-alpha)} o L.
Field pos_power_compose_reversed(const Field& u, double alpha, double m, const SubordinationScheme& scheme);

struct NormBoundReport {
    std::vector<double> ratios;  // ||L^{-alpha} v|| / ((m^2)^{-alpha} ||v||)
    double max_ratio = 0.0;
    bool holds = true;
};
NormBoundReport norm_bound_check(double alpha, double m, std::span<const Field> trials,
                                 const SubordinationScheme& scheme);

}  // namespace clab
