#pragma once

// Source-to-solution data on an observation ball, the moment functional phi(s),
// its Hardy transform, and distinguishability runs between two flat models.

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clab/funcalc.hpp"
#include "clab/manifold.hpp"

namespace clab {

struct Ball {
    Point center;
    double radius = 0.1;
};

/// x -> center_b + M (x - center_a), with x - center_a taken as the minimal
/// chart displacement. An isometry of flat patches when M^T G_b M = G_a.
struct Identification {
    Point center_a, center_b;
    Eigen::MatrixXd M;

    Point apply(const ManifoldModel& a, const ManifoldModel& b, const Point& x) const;
    /// M = L_b^{-T} L_a^T from the Cholesky factors G = L L^T.
    static Identification metric_matched(const ManifoldModel& a, const ManifoldModel& b, const Point& center_a,
                                         const Point& center_b);
};

/// Minimal chart displacement x - c (angle on the circle, cell coordinates on the torus).
Eigen::VectorXd chart_displacement(const ManifoldModel& model, const Point& x, const Point& c);

struct ObservationSet {
    Ball O, omega1, omega2;  // in the chart of model A
    Identification iota;
    std::vector<std::size_t> nodes;  // grid-A indices inside O
    std::vector<Point> points_a, points_b;
    std::vector<double> weights;
    std::vector<std::size_t> omega1_nodes;
    std::vector<Point> omega2_a, omega2_b;
    double separation = 0.0;       // d(closure omega1, closure omega2)
    double isometry_defect = 0.0;  // max |d_a(x,y) - d_b(iota x, iota y)| on O nodes
};

/// Validates omega_i inside O, disjoint closures, flat models, and the isometry
/// of iota on O (ConfigError if distances are not preserved to 1e-10).
ObservationSet make_observation_set(const ManifoldModel& a, const ManifoldModel& b, const QuadratureGrid& grid_a,
                                    const Ball& O, const Ball& omega1, const Ball& omega2, const Identification& iota);

struct BumpSource {
    Field field;
    Ball ball;
    double integral = 0.0;       // sum_i w_i f(x_i) before projection
    bool nonnegative = true;     // nodal values before projection
    double leakage = 0.0;        // L2 mass of the projected field outside omega1
    double leakage_relative = 0.0;
};

/// exp(-1/(1 - (d/r)^2)) on the geodesic ball, projected onto the basis.
BumpSource bump_source(const ManifoldModel& model, const Ball& ball, BasisPtr basis, const QuadratureGrid& grid,
                       const Ball& omega1);

struct CauchyPair {
    std::vector<double> u;  // solution on the observation points
    std::vector<double> f;  // source on the observation points
};
CauchyPair cauchy_pair(const Field& f, double m, std::span<const Point> points);

struct Discrepancy {
    double absolute = 0.0;
    double relative = 0.0;
};
/// Weighted L2 norm of ua - ub, and its ratio to the norm of ua.
Discrepancy data_discrepancy(std::span<const double> ua, std::span<const double> ub, std::span<const double> w);

// ---------------------------------------------------------------- phi and moments

struct PhiSamples {
    std::vector<double> s;
    Eigen::MatrixXd values;  // values(i, j) = phi(s_j) at observation point i
};

/// Largest s for which t = 1/s keeps both kernels above the truncation threshold.
double phi_s_max(const SpectralBasis& a, const SpectralBasis& b, double m);

/// phi(s) = (e^{-L_a/s} f_a - e^{-L_b/s} f_b)(x) / sqrt(s) at xs_a[i] ~ xs_b[i].
PhiSamples phi_eval(const Field& fa, const Field& fb, double m, std::span<const Point> xs_a,
                    std::span<const Point> xs_b, std::span<const double> s_grid);

struct MomentTable {
    int K = 0;
    Eigen::MatrixXd values;  // values(i, k) = M_k at point i
    Eigen::MatrixXd errors;  // tail plus quadrature error estimate
    std::vector<double> max_abs;  // per k, max over points
    int max_admissible = 0;
    double c1 = 0.0;  // fitted large-s decay rate, worst point
};

/// M_k = int_0^inf phi(s) s^k ds by the trapezoid rule in ln s, with a
/// power-law tail s^{n/2} below s_min and an exp(-c1 s^{1/3}) tail fitted above
/// s_max. Throws ValidationError naming the largest admissible K when K exceeds it.
MomentTable moments(const PhiSamples& phi, int K, int dim = 2);
/// Same, without the admissibility error.
MomentTable moments_unchecked(const PhiSamples& phi, int K, int dim = 2);

// ---------------------------------------------------------------- Hardy transform

/// int_0^inf phi(s) g(s) ds ~ sum_i w_i phi_i g(s_i).
struct WeightedSamples {
    std::vector<double> s, w, phi;

    static WeightedSamples from_phi(const PhiSamples& p, std::size_t row);
    static WeightedSamples from_function(const std::function<double(double)>& phi, const std::vector<double>& breaks,
                                         int nodes_per_panel);
    double l2_norm() const;
};

std::complex<double> hardy_value(const WeightedSamples& phi, std::complex<double> z);

struct Triangle {
    std::complex<double> a, b, c;
};

struct HardyDiagnostics {
    std::vector<std::complex<double>> z;
    std::vector<std::complex<double>> f;
    std::vector<double> ys;
    std::vector<double> line_norms;
    double phi_norm = 0.0;
    std::vector<double> morera;  // |contour integral| / (perimeter max|f|)
    double morera_max = 0.0;
    bool line_norms_monotone = true;
};

/// f(z) on the grid; throws ValidationError if some Im z <= 0.
HardyDiagnostics hardy_transform(const WeightedSamples& phi, std::span<const std::complex<double>> z_grid,
                                 std::span<const Triangle> triangles = {}, std::span<const double> ys = {},
                                 double x_range = 100.0, double dx = 0.1);

/// (int |f(x + i y)|^2 dx)^{1/2} by the trapezoid rule on [-x_range, x_range].
double line_norm(const WeightedSamples& phi, double y, double x_range = 100.0, double dx = 0.1);
double morera_residual(const WeightedSamples& phi, const Triangle& tri, int nodes_per_edge = 24);

struct PaleyWienerReport {
    double sup_line_norm = 0.0;
    double phi_norm = 0.0;
    double relative_gap = 0.0;
    bool monotone = true;
    bool y_range_ok = true;  // >= 2 decades
    std::string warning;
};
PaleyWienerReport paley_wiener_check(const HardyDiagnostics& diag);

struct TaylorCheck {
    std::vector<std::complex<double>> from_moments;  // (2 pi i)^k M_k[phi e^{-2 pi s}]
    std::vector<std::complex<double>> from_cauchy;   // contour integrals on |z - i| = radius
    double max_relative = 0.0;
};
TaylorCheck taylor_consistency(const WeightedSamples& phi, int K, double radius = 0.5, int contour_nodes = 256);

// ---------------------------------------------------------------- experiments

struct ModelSetup {
    ManifoldModel model = ManifoldModel::flat_torus(2, {1.0, 0.0, 0.0, 1.0});
    BasisRequest request = BasisRequest::by_modes(2000);
    int resolution = 64;
    std::optional<std::uint64_t> remix_seed;
};

struct ExperimentSpec {
    ModelSetup a, b;
    double m = 1.0;
    Ball O, omega1, omega2;
    std::optional<Eigen::MatrixXd> map;  // identification matrix; metric-matched if absent
    std::optional<Point> center_b;       // image of O's center; O's center if absent
    std::vector<Ball> sources;
    int s_points = 160;
    double s_min = 1e-2;
    int K = 10;
    double null_floor = 1e-10;
    double leakage_bound = 1.0;  // relative, per source
    std::vector<double> hardy_ys{1.0, 0.3, 0.1, 0.03, 0.01};
};

/// Defaults for the unit square torus: O = B((0.5, 0.5), 0.1) and five bumps in omega1.
ExperimentSpec default_experiment();

struct SourceResult {
    Ball ball;
    Discrepancy discrepancy;
    double leakage_a = 0.0, leakage_b = 0.0;
};

struct ExperimentReport {
    std::string model_a, model_b;
    std::size_t modes_a = 0, modes_b = 0;
    double cutoff_a = 0.0, cutoff_b = 0.0;
    std::size_t observation_nodes = 0;
    double isometry_defect = 0.0;
    double separation = 0.0;
    std::vector<SourceResult> sources;
    double null_residual = 0.0;
    double null_threshold = 0.0;
    double max_discrepancy = 0.0;  // relative
    std::string verdict;           // indistinguishable, distinguishable, inconclusive
    PhiSamples phi;                // first source, omega2 nodes
    MomentTable moments;
    HardyDiagnostics hardy;        // first source, first omega2 node
    PaleyWienerReport paley_wiener;
    double s_max = 0.0;
};

/// Verdict: indistinguishable when every relative discrepancy is at most the
/// null threshold; distinguishable when the smallest exceeds 100x the threshold.
std::string verdict_for(std::span<const double> discrepancies, double threshold);

/// Runs the pipeline. The null residual comes from running model A against an
/// independently built copy of itself; the threshold is max(null_floor, 10x that).
ExperimentReport distinguish(const ExperimentSpec& spec, bool with_diagnostics = true);

}  // namespace clab
