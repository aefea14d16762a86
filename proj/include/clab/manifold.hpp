#pragma once

// Model closed manifolds with analytic eigenbases of the Laplace-Beltrami
// operator. Convention throughout: -Delta phi = lambda phi, lambda >= 0.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace clab {

struct Circle {
    double radius = 1.0;
};

/// R^n / Z^n with the constant metric G (dim x dim, row-major). Coordinates
/// live in the unit cell [0, 1)^n; the volume is sqrt(det G).
struct FlatTorus {
    int dim = 2;
    std::vector<double> metric{1.0, 0.0, 0.0, 1.0};
};

struct Sphere2 {
    double radius = 1.0;
};

class ManifoldModel {
public:
    using Kind = std::variant<Circle, FlatTorus, Sphere2>;

    ManifoldModel(Kind kind, std::string label);

    static ManifoldModel circle(double radius, std::string label = "circle");
    static ManifoldModel flat_torus(int dim, std::vector<double> metric, std::string label = "torus");
    static ManifoldModel sphere(double radius, std::string label = "sphere");

    const Kind& kind() const { return kind_; }
    const std::string& label() const { return label_; }
    std::string kind_name() const;

    int dimension() const;
    double volume() const;
    double diameter() const;

    /// Metric matrix in chart coordinates. For the torus this is G; for the
    /// circle it is r^2; the sphere's metric depends on the point and is not
    /// exposed here.
    Eigen::MatrixXd torus_metric() const;

    /// Throws ValidationError if parameters are invalid (radius <= 0, metric
    /// not symmetric positive definite, dimension out of range).
    void validate() const;

private:
    Kind kind_;
    std::string label_;
};

/// Chart coordinates: angle on the circle; unit-cell coordinates on the torus;
/// (polar theta, azimuth phi) on the sphere. Unused slots are zero.
struct Point {
    std::array<double, 3> x{};
};

/// Maps coordinates to the fundamental domain of the model's chart.
Point reduce(const ManifoldModel& model, const Point& p);

double geodesic_distance(const ManifoldModel& model, const Point& a, const Point& b);

/// Identifies one orthonormal eigenfunction. Circle: index[0] = k. Torus:
/// index = lattice vector k (first nonzero entry positive). Sphere:
/// index[0] = l, index[1] = m in [-l, l]. parity selects cos (0) or sin (1)
/// where applicable.
struct ModeLabel {
    std::array<int, 3> index{};
    int parity = 0;
    bool operator==(const ModeLabel&) const = default;
};

struct Eigenspace {
    double eigenvalue = 0.0;
    std::size_t offset = 0;
    std::size_t multiplicity = 0;
};

/// Selects the truncation: all eigenspaces with lambda <= cutoff, or the
/// largest set of complete eigenspaces holding at most max_modes functions.
struct BasisRequest {
    std::optional<double> cutoff;
    std::optional<std::size_t> max_modes;
    std::size_t hard_limit = 400000;

    static BasisRequest by_cutoff(double c) {
        BasisRequest r;
        r.cutoff = c;
        return r;
    }
    static BasisRequest by_modes(std::size_t n) {
        BasisRequest r;
        r.max_modes = n;
        return r;
    }
};

class SpectralBasis {
public:
    SpectralBasis(ManifoldModel model, double cutoff, std::vector<Eigenspace> spaces,
                  std::vector<ModeLabel> modes);

    const ManifoldModel& model() const { return model_; }
    /// Truncation level: every eigenvalue <= cutoff is present.
    double cutoff() const { return cutoff_; }
    double max_eigenvalue() const { return spaces_.back().eigenvalue; }
    std::size_t size() const { return modes_.size(); }
    const std::vector<Eigenspace>& eigenspaces() const { return spaces_; }
    const std::vector<ModeLabel>& modes() const { return modes_; }
    /// Eigenvalue of each mode, expanded per (k, j).
    const std::vector<double>& mode_eigenvalues() const { return mode_lambda_; }
    std::size_t space_of_mode(std::size_t j) const { return mode_space_[j]; }

    /// Largest lattice/frequency index present per chart direction (torus: max |k_d|;
    /// circle: max k; sphere: max degree l).
    int max_index() const { return max_index_; }
    /// Smallest grid resolution for which build_grid integrates products of
    /// basis functions exactly.
    int min_resolution() const;

    /// Values of every basis function at p, written to out (size() entries).
    void evaluate(const Point& p, std::span<double> out) const;
    std::vector<double> evaluate(const Point& p) const;
    /// Row i holds all basis functions at points[i].
    Eigen::MatrixXd evaluate_matrix(std::span<const Point> points) const;

    /// Copy whose eigenfunctions are re-mixed inside every eigenspace by a random
    /// orthogonal matrix (a gauge change of the orthonormal bases).
    SpectralBasis remixed(std::uint64_t seed) const;
    bool is_mixed() const { return !mixing_.empty(); }

private:
    void evaluate_raw(const Point& p, std::span<double> out) const;

    ManifoldModel model_;
    double cutoff_;
    std::vector<Eigenspace> spaces_;
    std::vector<ModeLabel> modes_;
    std::vector<double> mode_lambda_;
    std::vector<std::size_t> mode_space_;
    int max_index_ = 0;
    std::vector<Eigen::MatrixXd> mixing_;  // one orthogonal block per eigenspace, or empty
};

using BasisPtr = std::shared_ptr<const SpectralBasis>;

SpectralBasis build_basis(const ManifoldModel& model, const BasisRequest& request);
BasisPtr make_basis(const ManifoldModel& model, const BasisRequest& request);

/// Tensor-product grid discretizing the volume integral.
struct QuadratureGrid {
    std::string model_label;
    int resolution = 0;
    std::vector<Point> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    double total_weight() const;
};

using GridPtr = std::shared_ptr<const QuadratureGrid>;

/// Circle: N equispaced angles. Torus: N^dim cell points. Sphere: N Gauss-Legendre
/// nodes in cos(theta) times 2N equispaced azimuths.
QuadratureGrid build_grid(const ManifoldModel& model, int resolution);
/// Same, but rejects resolutions too coarse for the basis.
QuadratureGrid build_grid(const ManifoldModel& model, int resolution, const SpectralBasis& basis);
GridPtr make_grid(const ManifoldModel& model, int resolution);

/// Throws ValidationError if the grid cannot integrate the basis exactly.
void check_nyquist(const QuadratureGrid& grid, const SpectralBasis& basis);

/// sum_i w_i u_i v_i.
double inner_product(std::span<const double> u, std::span<const double> v, const QuadratureGrid& grid);

/// Weyl-law mode count estimate omega_n Vol Lambda^{n/2} / (2 pi)^n.
double weyl_count(const ManifoldModel& model, double cutoff);

}  // namespace clab
