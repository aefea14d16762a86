#pragma once

// Heat semigroups of -Delta, Delta^2 and L = Delta^2 + m^2, their truncated
// eigen-sum kernels, and the off-diagonal bound fit.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clab/funcalc.hpp"
#include "clab/manifold.hpp"

namespace clab {

struct Generator {
    enum class Kind { Laplace, BiLaplace, PerturbedBiLaplace };
    Kind kind = Kind::Laplace;
    double m = 0.0;

    static Generator laplace() { return {Kind::Laplace, 0.0}; }
    static Generator bilaplace() { return {Kind::BiLaplace, 0.0}; }
    static Generator perturbed(double m);
    /// "laplace", "bilaplace" or "L".
    static Generator parse(const std::string& name, double m);

    /// Eigenvalue of the generator on the lambda-eigenspace of -Delta.
    double exponent(double lambda) const;
    /// 1 for Laplace, 2 otherwise.
    int power() const { return kind == Kind::Laplace ? 1 : 2; }
    std::string name() const;
};

/// Multiplier exp(-t * exponent(lambda)). t = 0 returns u unchanged.
Field semigroup_apply(const Field& u, double t, const Generator& gen);

/// Smallest t with exp(-t * exponent(lambda_max)) <= tail.
double minimum_time(const SpectralBasis& basis, const Generator& gen, double tail = 1e-14);
/// Throws ValidationError if t is below minimum_time.
void check_time(const SpectralBasis& basis, const Generator& gen, double t);

struct KernelSlice {
    double t = 0.0;
    Generator gen;
    double cutoff = 0.0;
    std::vector<Point> xs, ys;
    Eigen::MatrixXd values;  // values(i, j) = K(t, xs[i], ys[j])
};

KernelSlice kernel_slice(double t, const Generator& gen, std::span<const Point> xs, std::span<const Point> ys,
                         const SpectralBasis& basis);
/// Kernel over all pairs of grid nodes.
KernelSlice kernel_slice(double t, const Generator& gen, const QuadratureGrid& grid, const SpectralBasis& basis);

/// Row masses sum_j w_j K(t, x_i, y_j); the slice columns must be the grid nodes.
std::vector<double> kernel_mass(const KernelSlice& slice, const QuadratureGrid& grid);
/// sum_j w_j K(t, x_i, y_j) v(y_j).
std::vector<double> kernel_apply(const KernelSlice& slice, const QuadratureGrid& grid, std::span<const double> v);

struct BoundSample {
    double t = 0.0;
    Point x, y;
};

struct BoundRow {
    double t = 0.0;
    Point x, y;
    double d = 0.0, K = 0.0, bound = 0.0, ratio = 0.0;
};

struct BoundFit {
    double c = 0.0;
    double C = 0.0;
    int n = 0;
    double sup_ratio_log = 0.0;  // log C
    BoundSample argmax;
    double argmax_distance = 0.0;
    std::size_t sample_count = 0;
    std::vector<BoundRow> rows;  // filled with ratio |K| / bound for the fitted C
};

/// Smallest C with |K| <= C t^{-n/4} exp(-c d^{4/3} / t^{1/3}) on every sample.
BoundFit fit_bound(const SpectralBasis& basis, std::span<const BoundSample> samples, double c,
                   const Generator& gen = Generator::bilaplace());

/// Pairs (x0, y) for y over the grid nodes, for every t in ts.
std::vector<BoundSample> bound_samples(const QuadratureGrid& grid, std::span<const double> ts);

struct MonotonicityReport {
    std::vector<double> cs;
    std::vector<double> Cs;
    bool nondecreasing = true;
};
MonotonicityReport bound_sweep(const SpectralBasis& basis, std::span<const BoundSample> samples,
                               std::span<const double> cs, const Generator& gen = Generator::bilaplace());

/// Exact L2 -> Linf norm of the multiplier over the given points:
/// sup_x (sum_j mult(lambda_j)^2 phi_j(x)^2)^{1/2}.
double linf_operator_norm(const SpectralBasis& basis, std::span<const Point> points, const SpectralMultiplier& mult);

}  // namespace clab
