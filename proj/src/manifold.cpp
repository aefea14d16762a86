#include "clab/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "clab/errors.hpp"
#include "clab/quadrature.hpp"

namespace clab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Eigen::MatrixXd metric_of(const FlatTorus& t) {
    Eigen::MatrixXd g(t.dim, t.dim);
    for (int i = 0; i < t.dim; ++i)
        for (int j = 0; j < t.dim; ++j) g(i, j) = t.metric[i * t.dim + j];
    return g;
}

double wrap_angle(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

double wrap_unit(double a) {
    double r = a - std::floor(a);
    if (r >= 1.0) r = 0.0;
    return r;
}

Eigen::Vector3d sphere_unit(const Point& p) {
    const double st = std::sin(p.x[0]);
    return {st * std::cos(p.x[1]), st * std::sin(p.x[1]), std::cos(p.x[0])};
}

bool label_less(const ModeLabel& a, const ModeLabel& b) {
    if (a.index != b.index) return a.index < b.index;
    return a.parity < b.parity;
}

struct RawMode {
    double lambda;
    ModeLabel label;
};

// Sorts, groups into eigenspaces, and truncates according to the request.
SpectralBasis assemble(const ManifoldModel& model, std::vector<RawMode> raw, const BasisRequest& req,
                       double cutoff) {
    std::sort(raw.begin(), raw.end(), [](const RawMode& a, const RawMode& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        return label_less(a.label, b.label);
    });
    // group eigenvalues equal to relative 1e-12
    std::vector<Eigenspace> spaces;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!spaces.empty()) {
            const double ref = spaces.back().eigenvalue;
            if (std::abs(raw[i].lambda - ref) <= 1e-12 * std::max(ref, 1e-300) ||
                raw[i].lambda == ref) {
                ++spaces.back().multiplicity;
                raw[i].lambda = ref;
                continue;
            }
        }
        spaces.push_back({raw[i].lambda, i, 1});
    }
    // within an eigenspace keep label order for determinism
    for (const auto& s : spaces) {
        std::sort(raw.begin() + s.offset, raw.begin() + s.offset + s.multiplicity,
                  [](const RawMode& a, const RawMode& b) { return label_less(a.label, b.label); });
    }
    if (req.max_modes) {
        std::size_t total = 0, keep = 0;
        for (const auto& s : spaces) {
            if (total + s.multiplicity > *req.max_modes) break;
            total += s.multiplicity;
            ++keep;
        }
        if (keep == 0) throw ValidationError("build_basis: max_modes must be at least 1");
        spaces.resize(keep);
        raw.resize(total);
        cutoff = spaces.back().eigenvalue;
    }
    std::vector<ModeLabel> labels;
    labels.reserve(raw.size());
    for (const auto& r : raw) labels.push_back(r.label);
    return SpectralBasis(model, cutoff, std::move(spaces), std::move(labels));
}

std::vector<RawMode> enumerate(const ManifoldModel& model, double cutoff, std::size_t hard_limit) {
    std::vector<RawMode> raw;
    auto push = [&](double lambda, ModeLabel label) {
        if (raw.size() >= hard_limit) {
            std::ostringstream os;
            os << "build_basis: cutoff " << cutoff << " exceeds the hard limit of " << hard_limit
               << " modes on " << model.label();
            throw ResourceError(os.str());
        }
        raw.push_back({lambda, label});
    };
    std::visit(
        overloaded{
            [&](const Circle& c) {
                const int kmax = static_cast<int>(std::floor(std::sqrt(cutoff) * c.radius + 1e-9));
                push(0.0, {{0, 0, 0}, 0});
                for (int k = 1; k <= kmax; ++k) {
                    const double lambda = static_cast<double>(k) * k / (c.radius * c.radius);
                    if (lambda > cutoff * (1.0 + 1e-12)) break;
                    push(lambda, {{k, 0, 0}, 0});
                    push(lambda, {{k, 0, 0}, 1});
                }
            },
            [&](const FlatTorus& t) {
                const Eigen::MatrixXd g = metric_of(t);
                const Eigen::MatrixXd gi = g.inverse();
                const double r = cutoff / (4.0 * kPi * kPi);
                std::array<int, 3> kb{0, 0, 0};
                for (int d = 0; d < t.dim; ++d)
                    kb[d] = static_cast<int>(std::floor(std::sqrt(r * g(d, d)) + 1e-9));
                // rough Weyl precheck so absurd cutoffs fail before allocation
                if (weyl_count(model, cutoff) > 2.0 * static_cast<double>(hard_limit)) {
                    std::ostringstream os;
                    os << "build_basis: cutoff " << cutoff << " needs about " << weyl_count(model, cutoff)
                       << " modes, above the hard limit of " << hard_limit;
                    throw ResourceError(os.str());
                }
                std::array<int, 3> k{0, 0, 0};
                const int d2 = t.dim > 1 ? kb[1] : 0;
                const int d3 = t.dim > 2 ? kb[2] : 0;
                for (k[0] = -kb[0]; k[0] <= kb[0]; ++k[0])
                    for (k[1] = -d2; k[1] <= d2; ++k[1])
                        for (k[2] = -d3; k[2] <= d3; ++k[2]) {
                            // half-space representative: first nonzero entry positive
                            int first = 0;
                            for (int d = 0; d < t.dim; ++d)
                                if (k[d] != 0) {
                                    first = k[d];
                                    break;
                                }
                            if (first < 0) continue;
                            double q = 0.0;
                            for (int a = 0; a < t.dim; ++a)
                                for (int b = 0; b < t.dim; ++b) q += k[a] * gi(a, b) * k[b];
                            if (q > r * (1.0 + 1e-12)) continue;
                            const double lambda = 4.0 * kPi * kPi * q;
                            if (first == 0) {
                                push(0.0, {k, 0});
                            } else {
                                push(lambda, {k, 0});
                                push(lambda, {k, 1});
                            }
                        }
            },
            [&](const Sphere2& s) {
                const double r2 = s.radius * s.radius;
                for (int l = 0;; ++l) {
                    const double lambda = l * (l + 1.0) / r2;
                    if (lambda > cutoff * (1.0 + 1e-12)) break;
                    for (int m = -l; m <= l; ++m) push(lambda, {{l, m, 0}, 0});
                }
            }},
        model.kind());
    return raw;
}

}  // namespace

// ---------------------------------------------------------------- model

ManifoldModel::ManifoldModel(Kind kind, std::string label) : kind_(std::move(kind)), label_(std::move(label)) {}

ManifoldModel ManifoldModel::circle(double radius, std::string label) {
    ManifoldModel m(Circle{radius}, std::move(label));
    m.validate();
    return m;
}

ManifoldModel ManifoldModel::flat_torus(int dim, std::vector<double> metric, std::string label) {
    ManifoldModel m(FlatTorus{dim, std::move(metric)}, std::move(label));
    m.validate();
    return m;
}

ManifoldModel ManifoldModel::sphere(double radius, std::string label) {
    ManifoldModel m(Sphere2{radius}, std::move(label));
    m.validate();
    return m;
}

std::string ManifoldModel::kind_name() const {
    return std::visit(overloaded{[](const Circle&) { return std::string("circle"); },
                                 [](const FlatTorus&) { return std::string("flat_torus"); },
                                 [](const Sphere2&) { return std::string("sphere"); }},
                      kind_);
}

int ManifoldModel::dimension() const {
    return std::visit(overloaded{[](const Circle&) { return 1; }, [](const FlatTorus& t) { return t.dim; },
                                 [](const Sphere2&) { return 2; }},
                      kind_);
}

double ManifoldModel::volume() const {
    return std::visit(overloaded{[](const Circle& c) { return kTwoPi * c.radius; },
                                 [](const FlatTorus& t) { return std::sqrt(metric_of(t).determinant()); },
                                 [](const Sphere2& s) { return 4.0 * kPi * s.radius * s.radius; }},
                      kind_);
}

double ManifoldModel::diameter() const {
    return std::visit(overloaded{[](const Circle& c) { return kPi * c.radius; },
                                 [this](const FlatTorus& t) {
                                     const Eigen::MatrixXd g = metric_of(t);
                                     if (g.isDiagonal()) return 0.5 * std::sqrt(g.trace());
                                     // covering radius estimated on a sample lattice
                                     const int n = t.dim == 3 ? 24 : (t.dim == 2 ? 128 : 1024);
                                     double best = 0.0;
                                     Point origin;
                                     std::array<int, 3> i{0, 0, 0};
                                     const int n2 = t.dim > 1 ? n : 1, n3 = t.dim > 2 ? n : 1;
                                     for (i[0] = 0; i[0] < n; ++i[0])
                                         for (i[1] = 0; i[1] < n2; ++i[1])
                                             for (i[2] = 0; i[2] < n3; ++i[2]) {
                                                 Point p;
                                                 for (int d = 0; d < t.dim; ++d) p.x[d] = double(i[d]) / n;
                                                 best = std::max(best, geodesic_distance(*this, origin, p));
                                             }
                                     return best;
                                 },
                                 [](const Sphere2& s) { return kPi * s.radius; }},
                      kind_);
}

Eigen::MatrixXd ManifoldModel::torus_metric() const {
    return std::visit(overloaded{[](const Circle& c) {
                                     Eigen::MatrixXd g(1, 1);
                                     g(0, 0) = c.radius * c.radius;
                                     return g;
                                 },
                                 [](const FlatTorus& t) { return metric_of(t); },
                                 [](const Sphere2&) -> Eigen::MatrixXd {
                                     throw ValidationError("torus_metric: sphere metric is point dependent");
                                 }},
                      kind_);
}

void ManifoldModel::validate() const {
    std::visit(overloaded{[](const Circle& c) {
                              if (!(c.radius > 0.0) || !std::isfinite(c.radius))
                                  throw ValidationError("circle radius must be positive");
                          },
                          [](const FlatTorus& t) {
                              if (t.dim < 1 || t.dim > 3)
                                  throw ValidationError("flat torus dimension must be 1, 2 or 3");
                              if (t.metric.size() != static_cast<std::size_t>(t.dim * t.dim))
                                  throw ValidationError("flat torus metric must have dim*dim entries");
                              const Eigen::MatrixXd g = metric_of(t);
                              if (!g.allFinite()) throw ValidationError("flat torus metric has non-finite entries");
                              if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-14 * g.cwiseAbs().maxCoeff())
                                  throw ValidationError("flat torus metric is not symmetric");
                              Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
                              if (es.eigenvalues().minCoeff() <= 0.0) {
                                  std::ostringstream os;
                                  os << "flat torus metric is not positive definite (min eigenvalue "
                                     << es.eigenvalues().minCoeff() << ")";
                                  throw ValidationError(os.str());
                              }
                          },
                          [](const Sphere2& s) {
                              if (!(s.radius > 0.0) || !std::isfinite(s.radius))
                                  throw ValidationError("sphere radius must be positive");
                          }},
               kind_);
}

// ---------------------------------------------------------------- points

Point reduce(const ManifoldModel& model, const Point& p) {
    Point out = p;
    std::visit(overloaded{[&](const Circle&) { out.x[0] = wrap_angle(p.x[0]); },
                          [&](const FlatTorus& t) {
                              for (int d = 0; d < t.dim; ++d) out.x[d] = wrap_unit(p.x[d]);
                          },
                          [&](const Sphere2&) {
                              if (p.x[0] < 0.0 || p.x[0] > kPi) {
                                  const Eigen::Vector3d u = sphere_unit(p);
                                  out.x[0] = std::acos(std::clamp(u.z(), -1.0, 1.0));
                                  out.x[1] = wrap_angle(std::atan2(u.y(), u.x()));
                              } else {
                                  out.x[1] = wrap_angle(p.x[1]);
                              }
                          }},
               model.kind());
    return out;
}

double geodesic_distance(const ManifoldModel& model, const Point& a, const Point& b) {
    return std::visit(
        overloaded{[&](const Circle& c) {
                       const double d = wrap_angle(b.x[0] - a.x[0]);
                       return c.radius * std::min(d, kTwoPi - d);
                   },
                   [&](const FlatTorus& t) {
                       const Eigen::MatrixXd g = metric_of(t);
                       std::array<double, 3> delta{};
                       for (int d = 0; d < t.dim; ++d) {
                           double x = b.x[d] - a.x[d];
                           delta[d] = x - std::round(x);
                       }
                       double best = std::numeric_limits<double>::infinity();
                       std::array<int, 3> n{0, 0, 0};
                       const int r1 = 1, r2 = t.dim > 1 ? 1 : 0, r3 = t.dim > 2 ? 1 : 0;
                       for (n[0] = -r1; n[0] <= r1; ++n[0])
                           for (n[1] = -r2; n[1] <= r2; ++n[1])
                               for (n[2] = -r3; n[2] <= r3; ++n[2]) {
                                   double q = 0.0;
                                   for (int i = 0; i < t.dim; ++i)
                                       for (int j = 0; j < t.dim; ++j)
                                           q += (delta[i] + n[i]) * g(i, j) * (delta[j] + n[j]);
                                   best = std::min(best, q);
                               }
                       return std::sqrt(std::max(best, 0.0));
                   },
                   [&](const Sphere2& s) {
                       const Eigen::Vector3d u = sphere_unit(a), v = sphere_unit(b);
                       return s.radius * std::atan2(u.cross(v).norm(), u.dot(v));
                   }},
        model.kind());
}

// ---------------------------------------------------------------- basis

SpectralBasis::SpectralBasis(ManifoldModel model, double cutoff, std::vector<Eigenspace> spaces,
                             std::vector<ModeLabel> modes)
    : model_(std::move(model)), cutoff_(cutoff), spaces_(std::move(spaces)), modes_(std::move(modes)) {
    mode_lambda_.resize(modes_.size());
    mode_space_.resize(modes_.size());
    for (std::size_t s = 0; s < spaces_.size(); ++s)
        for (std::size_t j = 0; j < spaces_[s].multiplicity; ++j) {
            mode_lambda_[spaces_[s].offset + j] = spaces_[s].eigenvalue;
            mode_space_[spaces_[s].offset + j] = s;
        }
    for (const auto& m : modes_) {
        if (std::holds_alternative<Sphere2>(model_.kind())) {
            max_index_ = std::max(max_index_, m.index[0]);
        } else {
            for (int v : m.index) max_index_ = std::max(max_index_, std::abs(v));
        }
    }
}

int SpectralBasis::min_resolution() const {
    if (std::holds_alternative<Sphere2>(model_.kind())) return std::max(4, max_index_ + 1);
    return std::max(4, 2 * max_index_ + 1);
}

void SpectralBasis::evaluate_raw(const Point& p, std::span<double> out) const {
    std::visit(
        overloaded{
            [&](const Circle& c) {
                const double n0 = 1.0 / std::sqrt(kTwoPi * c.radius);
                const double n1 = 1.0 / std::sqrt(kPi * c.radius);
                for (std::size_t j = 0; j < modes_.size(); ++j) {
                    const auto& m = modes_[j];
                    const int k = m.index[0];
                    if (k == 0)
                        out[j] = n0;
                    else
                        out[j] = n1 * (m.parity == 0 ? std::cos(k * p.x[0]) : std::sin(k * p.x[0]));
                }
            },
            [&](const FlatTorus& t) {
                const double vol = model_.volume();
                const double n0 = 1.0 / std::sqrt(vol);
                const double n1 = std::sqrt(2.0 / vol);
                const int kmax = max_index_;
                // per-direction tables of exp(2 pi i k x_d), k = 0..kmax
                std::array<std::vector<std::complex<double>>, 3> tab;
                for (int d = 0; d < t.dim; ++d) {
                    tab[d].resize(kmax + 1);
                    const std::complex<double> step = std::polar(1.0, kTwoPi * p.x[d]);
                    tab[d][0] = 1.0;
                    for (int k = 1; k <= kmax; ++k) {
                        // direct evaluation every 16 steps keeps the recurrence drift negligible
                        tab[d][k] = (k % 16 == 0) ? std::polar(1.0, kTwoPi * k * p.x[d]) : tab[d][k - 1] * step;
                    }
                }
                for (std::size_t j = 0; j < modes_.size(); ++j) {
                    const auto& m = modes_[j];
                    std::complex<double> z = 1.0;
                    bool zero = true;
                    for (int d = 0; d < t.dim; ++d) {
                        const int k = m.index[d];
                        if (k != 0) zero = false;
                        const auto& e = tab[d][std::abs(k)];
                        z *= (k >= 0) ? e : std::conj(e);
                    }
                    if (zero)
                        out[j] = n0;
                    else
                        out[j] = n1 * (m.parity == 0 ? z.real() : z.imag());
                }
            },
            [&](const Sphere2& s) {
                const int lmax = max_index_;
                const double x = std::cos(p.x[0]);
                const double sx = std::sin(p.x[0]);
                // fully normalized associated Legendre functions, index l*(l+1)/2 + m
                std::vector<double> plm((lmax + 1) * (lmax + 2) / 2, 0.0);
                auto at = [](int l, int m) { return l * (l + 1) / 2 + m; };
                plm[0] = 1.0 / std::sqrt(4.0 * kPi);
                for (int m = 1; m <= lmax; ++m)
                    plm[at(m, m)] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx * plm[at(m - 1, m - 1)];
                for (int m = 0; m < lmax; ++m) plm[at(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * plm[at(m, m)];
                for (int m = 0; m <= lmax; ++m)
                    for (int l = m + 2; l <= lmax; ++l) {
                        const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
                        const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                                                   (4.0 * double(l - 1) * (l - 1) - 1.0));
                        plm[at(l, m)] = a * (x * plm[at(l - 1, m)] - b * plm[at(l - 2, m)]);
                    }
                const double inv_r = 1.0 / s.radius;
                const double root2 = std::sqrt(2.0);
                for (std::size_t j = 0; j < modes_.size(); ++j) {
                    const int l = modes_[j].index[0];
                    const int m = modes_[j].index[1];
                    double v;
                    if (m == 0)
                        v = plm[at(l, 0)];
                    else if (m > 0)
                        v = root2 * plm[at(l, m)] * std::cos(m * p.x[1]);
                    else
                        v = root2 * plm[at(l, -m)] * std::sin(-m * p.x[1]);
                    out[j] = v * inv_r;
                }
            }},
        model_.kind());
}

void SpectralBasis::evaluate(const Point& p, std::span<double> out) const {
    if (out.size() != modes_.size()) throw ValidationError("SpectralBasis::evaluate: output size mismatch");
    if (mixing_.empty()) {
        evaluate_raw(p, out);
        return;
    }
    std::vector<double> raw(modes_.size());
    evaluate_raw(p, raw);
    for (std::size_t s = 0; s < spaces_.size(); ++s) {
        const auto& sp = spaces_[s];
        const Eigen::Map<const Eigen::VectorXd> in(raw.data() + sp.offset, sp.multiplicity);
        Eigen::Map<Eigen::VectorXd> res(out.data() + sp.offset, sp.multiplicity);
        res.noalias() = mixing_[s] * in;
    }
}

std::vector<double> SpectralBasis::evaluate(const Point& p) const {
    std::vector<double> out(modes_.size());
    evaluate(p, out);
    return out;
}

Eigen::MatrixXd SpectralBasis::evaluate_matrix(std::span<const Point> points) const {
    Eigen::MatrixXd e(points.size(), modes_.size());
    parallel_for(points.size(), default_threads(), [&](std::size_t i) {
        std::vector<double> row(modes_.size());
        evaluate(points[i], row);
        for (std::size_t j = 0; j < row.size(); ++j) e(i, j) = row[j];
    });
    return e;
}

SpectralBasis SpectralBasis::remixed(std::uint64_t seed) const {
    SpectralBasis copy = *this;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    copy.mixing_.clear();
    for (std::size_t s = 0; s < spaces_.size(); ++s) {
        const auto d = static_cast<Eigen::Index>(spaces_[s].multiplicity);
        Eigen::MatrixXd a(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) a(i, j) = normal(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        Eigen::MatrixXd q = qr.householderQ();
        const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index j = 0; j < d; ++j)
            if (r(j, j) < 0.0) q.col(j) *= -1.0;
        Eigen::MatrixXd block = q;
        if (is_mixed()) block = q * mixing_[s];
        copy.mixing_.push_back(std::move(block));
    }
    return copy;
}

SpectralBasis build_basis(const ManifoldModel& model, const BasisRequest& request) {
    model.validate();
    if (request.cutoff.has_value() == request.max_modes.has_value())
        throw ValidationError("build_basis: give exactly one of cutoff or max_modes");
    if (request.cutoff) {
        if (!(*request.cutoff > 0.0) || !std::isfinite(*request.cutoff))
            throw ValidationError("build_basis: cutoff must be positive");
        return assemble(model, enumerate(model, *request.cutoff, request.hard_limit), request, *request.cutoff);
    }
    const std::size_t want = *request.max_modes;
    if (want == 0) throw ValidationError("build_basis: max_modes must be at least 1");
    if (want > request.hard_limit) {
        std::ostringstream os;
        os << "build_basis: max_modes " << want << " exceeds the hard limit of " << request.hard_limit;
        throw ResourceError(os.str());
    }
    // invert the Weyl law for a first guess, then grow until the request is covered
    const int n = model.dimension();
    double cutoff = std::pow(static_cast<double>(want + 1) * std::pow(kTwoPi, n) /
                                 (std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0) * model.volume()),
                             2.0 / n);
    cutoff = std::max(cutoff, 1e-3);
    for (int attempt = 0; attempt < 200; ++attempt) {
        auto raw = enumerate(model, cutoff, request.hard_limit * 4);
        if (raw.size() > want) {
            BasisRequest r = request;
            return assemble(model, std::move(raw), r, cutoff);
        }
        cutoff *= 1.5;
    }
    throw NumericError("build_basis: could not bracket the requested mode count");
}

BasisPtr make_basis(const ManifoldModel& model, const BasisRequest& request) {
    return std::make_shared<const SpectralBasis>(build_basis(model, request));
}

double weyl_count(const ManifoldModel& model, double cutoff) {
    const int n = model.dimension();
    const double ball = std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
    return ball * model.volume() * std::pow(cutoff, 0.5 * n) / std::pow(kTwoPi, n);
}

// ---------------------------------------------------------------- grids

double QuadratureGrid::total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

QuadratureGrid build_grid(const ManifoldModel& model, int resolution) {
    model.validate();
    if (resolution < 4) throw ValidationError("build_grid: resolution must be at least 4");
    QuadratureGrid grid;
    grid.model_label = model.label();
    grid.resolution = resolution;
    std::visit(overloaded{[&](const Circle& c) {
                              const double w = kTwoPi * c.radius / resolution;
                              for (int i = 0; i < resolution; ++i) {
                                  Point p;
                                  p.x[0] = kTwoPi * i / resolution;
                                  grid.nodes.push_back(p);
                                  grid.weights.push_back(w);
                              }
                          },
                          [&](const FlatTorus& t) {
                              const double total = std::pow(static_cast<double>(resolution), t.dim);
                              if (total > 8e6) throw ResourceError("build_grid: torus grid exceeds 8e6 nodes");
                              const double w = model.volume() / total;
                              std::array<int, 3> i{0, 0, 0};
                              const int n2 = t.dim > 1 ? resolution : 1, n3 = t.dim > 2 ? resolution : 1;
                              for (i[0] = 0; i[0] < resolution; ++i[0])
                                  for (i[1] = 0; i[1] < n2; ++i[1])
                                      for (i[2] = 0; i[2] < n3; ++i[2]) {
                                          Point p;
                                          for (int d = 0; d < t.dim; ++d)
                                              p.x[d] = static_cast<double>(i[d]) / resolution;
                                          grid.nodes.push_back(p);
                                          grid.weights.push_back(w);
                                      }
                          },
                          [&](const Sphere2& s) {
                              const auto gl = gauss_legendre(resolution, -1.0, 1.0);
                              const int nphi = 2 * resolution;
                              const double dphi = kTwoPi / nphi;
                              for (int i = 0; i < resolution; ++i) {
                                  const double theta = std::acos(gl.nodes[i]);
                                  for (int j = 0; j < nphi; ++j) {
                                      Point p;
                                      p.x[0] = theta;
                                      p.x[1] = j * dphi;
                                      grid.nodes.push_back(p);
                                      grid.weights.push_back(s.radius * s.radius * gl.weights[i] * dphi);
                                  }
                              }
                          }},
               model.kind());
    return grid;
}

void check_nyquist(const QuadratureGrid& grid, const SpectralBasis& basis) {
    const int need = basis.min_resolution();
    if (grid.resolution < need) {
        std::ostringstream os;
        os << "grid resolution " << grid.resolution << " is below the Nyquist requirement for basis cutoff "
           << basis.cutoff() << "; need resolution >= " << need;
        throw ValidationError(os.str());
    }
}

QuadratureGrid build_grid(const ManifoldModel& model, int resolution, const SpectralBasis& basis) {
    QuadratureGrid grid = build_grid(model, resolution);
    check_nyquist(grid, basis);
    return grid;
}

GridPtr make_grid(const ManifoldModel& model, int resolution) {
    return std::make_shared<const QuadratureGrid>(build_grid(model, resolution));
}

double inner_product(std::span<const double> u, std::span<const double> v, const QuadratureGrid& grid) {
    if (u.size() != grid.size() || v.size() != grid.size())
        throw ValidationError("inner_product: samples are not defined on this grid");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += grid.weights[i] * u[i] * v[i];
    return s;
}

}  // namespace clab
