#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace clab {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    double apply(const std::function<double(double)>& f) const;
};

/// n-point Gauss-Legendre rule on [a, b]; nodes ascending.
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite Gauss-Legendre over the panels [breaks[i], breaks[i+1]].
QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, int n_per_panel);

/// Uniform trapezoid rule with n points on [a, b] (endpoints half weight).
QuadratureRule trapezoid(int n, double a, double b);

std::vector<double> linspace(double a, double b, int n);
std::vector<double> logspace(double a, double b, int n);  // a, b > 0, geometric spacing

/// Ordinary least-squares line y = intercept + slope * x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Runs body(i) for i in [0, n) split over `threads` workers. Each index is
/// processed by exactly one worker; callers keep reductions per index so the
/// result never depends on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Default worker count used by the library (set by the CLI --threads flag).
int default_threads();
void set_default_threads(int threads);

}  // namespace clab
