#pragma once

// Spectral functional calculus on a truncated eigenbasis. Fields carry their
// eigen-coefficients as primary data; operators act blockwise on them.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clab/manifold.hpp"

namespace clab {

struct Field {
    BasisPtr basis;
    Eigen::VectorXd coeffs;

    static Field zero(BasisPtr basis);
    static Field mode(BasisPtr basis, std::size_t index);
    /// Standard normal coefficients, optionally restricted to eigenvalues <= max_lambda.
    static Field random(BasisPtr basis, std::uint64_t seed, double max_lambda = -1.0);

    std::size_t size() const { return static_cast<std::size_t>(coeffs.size()); }
    /// L2 norm (Parseval).
    double norm() const { return coeffs.norm(); }
    /// Coefficient block of eigenspace k (the projection pi_k).
    Eigen::VectorXd block(std::size_t k) const;

    Field operator+(const Field& o) const;
    Field operator-(const Field& o) const;
    Field operator*(double s) const;
};

struct ComplexField {
    BasisPtr basis;
    Eigen::VectorXcd coeffs;

    double norm() const { return coeffs.norm(); }
    Field real() const;
    Field imag() const;
};

/// Coefficient-space inner product; both fields must share a basis.
double inner_product(const Field& u, const Field& v);

struct MultiplierParams {
    double m = 1.0;
    double alpha = 0.5;
    double t = 1.0;
    double sigma = 0.0;
};

/// Eigenvalue rule lambda -> value. Real unless the multiplier is exp_wave.
class SpectralMultiplier {
public:
    using RealRule = std::function<double(double)>;
    using ComplexRule = std::function<std::complex<double>(double)>;

    SpectralMultiplier(std::string name, RealRule rule);
    SpectralMultiplier(std::string name, ComplexRule rule);

    /// identity, L_half, L_neg_half, frac_lap, A_g, heat, biheat, heat_L,
    /// sinc_wave, cos_wave, half_wave, exp_wave. Throws ValidationError on an
    /// unknown name or invalid parameters.
    static SpectralMultiplier named(const std::string& name, const MultiplierParams& params = {});
    static std::vector<std::string> names();

    /// Pointwise product of two rules.
    static SpectralMultiplier product(const SpectralMultiplier& a, const SpectralMultiplier& b);

    const std::string& name() const { return name_; }
    bool is_complex() const { return complex_; }
    double operator()(double lambda) const;
    std::complex<double> complex_value(double lambda) const;

private:
    std::string name_;
    bool complex_ = false;
    RealRule real_;
    ComplexRule cplx_;
};

/// coeffs = sum_i w_i f(x_i) phi(x_i). Requires a Nyquist-adequate grid.
Field project(std::span<const double> samples, BasisPtr basis, const QuadratureGrid& grid);
Field project(const std::function<double(const Point&)>& f, BasisPtr basis, const QuadratureGrid& grid);

/// Nodal values of the field on each grid node.
std::vector<double> synthesize(const Field& u, const QuadratureGrid& grid);
std::vector<double> synthesize(const Field& u, std::span<const Point> points);
double evaluate(const Field& u, const Point& p);

/// Throws DomainError naming the eigenvalue where the rule is not finite.
Field apply_multiplier(const Field& u, const SpectralMultiplier& mult);
ComplexField apply_complex(const Field& u, const SpectralMultiplier& mult);
ComplexField apply_complex(const ComplexField& u, const SpectralMultiplier& mult);

/// u = L^{-1/2} f with L^{1/2} = (lambda^2 + m^2)^{1/2}. m must be nonzero.
Field solve_source(const Field& f, double m);

/// u with (L^{1/2} - m) u = f and <u, 1> = 0. Requires m > 0 and mean-zero f.
Field solve_Ag(const Field& f, double m);
Field apply_Ag(const Field& u, double m);

/// ((g^{jk}(x) xi_j xi_k)^2 + m^2)^{1/2}. Sphere covectors are (xi_theta, xi_phi).
double evaluate_symbol(const ManifoldModel& model, const Point& x, std::span<const double> xi, double m);

}  // namespace clab
