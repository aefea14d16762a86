#include "clab/transmute.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "clab/errors.hpp"
#include "clab/quadrature.hpp"

namespace clab {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrtPi = std::sqrt(std::numbers::pi);

void check_t(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("transmutation: t must be positive");
}

void check_lambda(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("transmutation: lambda must be nonnegative");
}

// 2 int_0^inf s^2 e^{-s^2/4t} ds on the real axis.
double zero_mode_integral(double t) {
    const double top = std::sqrt(4.0 * t * 45.0);
    const auto rule = composite_gauss_legendre(linspace(0.0, top, 9), 24);
    return rule.apply([t](double s) { return 2.0 * s * s * std::exp(-s * s / (4.0 * t)); });
}

double log_residual(double log_c, double log_i, double log_lhs) {
    return std::abs(std::expm1(log_c + log_i - log_lhs));
}

TransmutationCheck make_check(const std::string& identity, double t, double lambda, double eff_lambda,
                              double log_lhs, const Prefactor& c) {
    TransmutationCheck r;
    r.identity = identity;
    r.t = t;
    r.lambda = lambda;
    r.log_lhs = log_lhs;
    r.lhs = std::exp(log_lhs);
    r.log_integral = transmutation_log_integral(t, eff_lambda);
    r.integral = std::exp(r.log_integral);
    r.realline = transmutation_integral_realline(t, eff_lambda);
    r.derived_prefactor = c(t);
    r.residual = log_residual(c.log_value(t), r.log_integral, log_lhs);
    if (!std::isfinite(r.log_integral)) {
        std::ostringstream os;
        os << "transmutation quadrature failed at t = " << t << ", lambda = " << lambda;
        throw NumericError(os.str());
    }
    return r;
}

}  // namespace

double transmutation_log_integral(double t, double lambda) {
    check_t(t);
    check_lambda(lambda);
    if (lambda == 0.0) return std::log(zero_mode_integral(t));
    // shifted line s = w + 2 i lambda t; the integrand becomes
    // (w + 2 i lambda t) e^{-w^2/4t} e^{-t lambda^2}
    const double h = 0.5 * std::sqrt(t);
    const double top = std::sqrt(4.0 * t * 45.0);
    const int n = static_cast<int>(std::ceil(top / h));
    std::complex<double> sum = 0.0;
    for (int k = -n; k <= n; ++k) {
        const double w = k * h;
        sum += std::complex<double>(w, 2.0 * lambda * t) * std::exp(-w * w / (4.0 * t));
    }
    sum *= h;
    const double reduced = sum.imag() / lambda;
    if (!(reduced > 0.0)) throw NumericError("transmutation: shifted-line quadrature lost positivity");
    return -t * lambda * lambda + std::log(reduced);
}

double transmutation_integral_realline(double t, double lambda) {
    check_t(t);
    check_lambda(lambda);
    if (lambda == 0.0) {
        const double top = std::sqrt(4.0 * t * 45.0);
        return trapezoid(4001, 0.0, top).apply([t](double s) { return 2.0 * s * s * std::exp(-s * s / (4.0 * t)); });
    }
    if (t * lambda * lambda > 15.0) return std::numeric_limits<double>::quiet_NaN();
    const double top = std::sqrt(4.0 * t * 45.0);
    const int panels = static_cast<int>(std::ceil(top * lambda / 3.0 + top / std::sqrt(t))) + 4;
    const auto rule = composite_gauss_legendre(linspace(0.0, top, panels + 1), 16);
    return rule.apply([t, lambda](double s) { return 2.0 * s * std::exp(-s * s / (4.0 * t)) * std::sin(s * lambda) / lambda; });
}

double gaussian_sine_integral(double a, double b) {
    return kSqrtPi * b / (4.0 * std::pow(a, 1.5)) * std::exp(-b * b / (4.0 * a));
}

double Prefactor::operator()(double t) const { return a * std::pow(t, p); }
double Prefactor::log_value(double t) const { return std::log(a) + p * std::log(t); }

Prefactor Prefactor::derived() {
    // I(t, lambda) = (2/lambda) gaussian_sine_integral(1/4t, lambda) = 4 sqrt(pi) t^{3/2} e^{-t lambda^2}
    return {1.0 / (4.0 * kSqrtPi), -1.5};
}

Prefactor Prefactor::printed() { return {1.0 / (4.0 * kSqrtPi), -1.0 / 3.0}; }

TransmutationCheck scalar_transmute_biharmonic(double t, double lambda, const Prefactor& c) {
    check_t(t);
    check_lambda(lambda);
    return make_check("biharmonic", t, lambda, lambda, -t * lambda * lambda, c);
}

TransmutationCheck scalar_transmute_heat(double t, double lambda, const Prefactor& c) {
    check_t(t);
    check_lambda(lambda);
    return make_check("heat", t, lambda, std::sqrt(lambda), -t * lambda, c);
}

TransmuteSweep transmute_sweep(std::span<const double> ts, std::span<const double> lambdas) {
    if (ts.size() < 2 || lambdas.empty()) throw ValidationError("transmute_sweep: need at least two t values");
    TransmuteSweep sw;
    std::vector<double> x, y;
    for (double t : ts)
        for (double l : lambdas) {
            for (int id = 0; id < 2; ++id) {
                auto r = id == 0 ? scalar_transmute_biharmonic(t, l) : scalar_transmute_heat(t, l);
                x.push_back(std::log(t));
                y.push_back(r.log_lhs - r.log_integral);
                sw.rows.push_back(r);
            }
        }
    const auto line = fit_line(x, y);
    sw.fit = {std::exp(line.intercept), line.slope};
    const Prefactor printed = Prefactor::printed();
    for (auto& r : sw.rows) {
        r.derived_prefactor = sw.fit(r.t);
        r.residual = log_residual(sw.fit.log_value(r.t), r.log_integral, r.log_lhs);
        sw.max_residual = std::max(sw.max_residual, r.residual);
        const double pr = log_residual(printed.log_value(r.t), r.log_integral, r.log_lhs);
        sw.max_printed_residual = std::max(sw.max_printed_residual, pr);
        if (std::isfinite(r.realline)) {
            ++sw.realline_checked;
            const double dev = std::abs(r.realline - r.integral) / r.integral;
            sw.max_realline_deviation = std::max(sw.max_realline_deviation, dev);
        }
    }
    // local exponents between neighbouring t values, lambda = first entry
    const std::size_t per_t = 2 * lambdas.size();
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const auto& a = sw.rows[i * per_t];
        const auto& b = sw.rows[(i + 1) * per_t];
        const double pa = (b.log_lhs - b.log_integral) - (a.log_lhs - a.log_integral);
        const double local = pa / (std::log(b.t) - std::log(a.t));
        sw.local_exponent_spread = std::max(sw.local_exponent_spread, std::abs(local - sw.fit.p));
    }
    return sw;
}

// ---------------------------------------------------------------- waves

WaveKind parse_wave_kind(const std::string& name) {
    if (name == "sinc_wave") return WaveKind::SincWave;
    if (name == "cos_wave") return WaveKind::CosWave;
    if (name == "half_wave") return WaveKind::HalfWave;
    if (name == "exp_wave") return WaveKind::ExpWave;
    throw ValidationError("unknown wave kind '" + name + "'");
}

Field wave_apply(const Field& u, double sigma, WaveKind kind) {
    MultiplierParams p;
    p.sigma = sigma;
    switch (kind) {
        case WaveKind::SincWave: return apply_multiplier(u, SpectralMultiplier::named("sinc_wave", p));
        case WaveKind::CosWave: return apply_multiplier(u, SpectralMultiplier::named("cos_wave", p));
        case WaveKind::HalfWave: {
            if (sigma < 0.0) return wave_apply(u, -sigma, kind) * -1.0;
            p.t = sigma;
            return apply_multiplier(u, SpectralMultiplier::named("half_wave", p));
        }
        case WaveKind::ExpWave: break;
    }
    throw ValidationError("wave_apply: exp_wave is complex; use wave_apply_complex");
}

ComplexField wave_apply_complex(const Field& u, double sigma) {
    MultiplierParams p;
    p.sigma = sigma;
    return apply_complex(u, SpectralMultiplier::named("exp_wave", p));
}

SigmaRule uniform_sigma_rule(double S, double h) {
    if (!(S > 0.0) || !(h > 0.0)) throw ValidationError("uniform_sigma_rule: S and h must be positive");
    SigmaRule r;
    const int n = static_cast<int>(std::floor(S / h));
    for (int k = -n; k <= n; ++k) {
        r.nodes.push_back(k * h);
        r.weights.push_back(h);
    }
    r.resolved_frequency = kPi / h;
    return r;
}

SigmaRule half_wave_sigma_rule(double t, double lambda_max, double S, double r0) {
    if (!(t > 0.0) || !(lambda_max >= 0.0) || !(S > 1.0) || !(r0 > 0.0 && r0 < 1.0))
        throw ValidationError("half_wave_sigma_rule: invalid parameters");
    const double c = t * t / 4.0;
    std::vector<double> sig, wts;
    const auto base = gauss_legendre(12, 0.0, 1.0);
    double r = r0;
    while (r < 1.0) {
        const double rate = 2.0 * c / (r * r * r) + 2.0 * lambda_max * r;
        const double dr = std::min({kPi / rate, 1.0 - r, 0.05});
        for (std::size_t i = 0; i < base.size(); ++i) {
            const double rr = r + dr * base.nodes[i];
            sig.push_back(rr * rr);
            wts.push_back(2.0 * rr * dr * base.weights[i]);
        }
        r += dr;
        if (1.0 - r < 1e-14) break;
    }
    const double width = std::min(1.0, kPi / (lambda_max + 1.0));
    const int panels = static_cast<int>(std::ceil((S - 1.0) / width));
    for (int p = 0; p < panels; ++p) {
        const double a = 1.0 + (S - 1.0) * p / panels;
        const double b = 1.0 + (S - 1.0) * (p + 1) / panels;
        for (std::size_t i = 0; i < base.size(); ++i) {
            sig.push_back(a + (b - a) * base.nodes[i]);
            wts.push_back((b - a) * base.weights[i]);
        }
    }
    SigmaRule rule;
    for (std::size_t i = sig.size(); i-- > 0;) {
        rule.nodes.push_back(-sig[i]);
        rule.weights.push_back(wts[i]);
    }
    for (std::size_t i = 0; i < sig.size(); ++i) {
        rule.nodes.push_back(sig[i]);
        rule.weights.push_back(wts[i]);
    }
    rule.resolved_frequency = lambda_max;
    return rule;
}

double gaussian_psi_hat(double sigma) { return kSqrtPi * std::exp(-sigma * sigma / 4.0); }

double half_wave_psi_hat(double t, double sigma) {
    const double s = std::abs(sigma);
    if (s == 0.0) return std::numeric_limits<double>::infinity();
    const double a = t * t / (4.0 * s);
    double inner;
    if (a <= 4.0) {
        static const auto rule = gauss_legendre(40, 0.0, 1.0);
        inner = rule.apply([a](double v) { return std::sin(a * (1.0 - v * v)); });
    } else {
        // int_0^1 e^{-i a v^2} dv = int_0^inf - int_1^inf; the second piece is
        // taken on v^2 = 1 - i u, u >= 0, where it decays like e^{-a u}
        static const auto rule = composite_gauss_legendre(linspace(0.0, 45.0, 10), 20);
        std::complex<double> tail = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double x = rule.nodes[i];
            const std::complex<double> root = std::sqrt(std::complex<double>(1.0, -x / a));
            tail += rule.weights[i] * std::exp(-x) * std::complex<double>(0.0, -1.0) / (2.0 * root);
        }
        tail *= std::polar(1.0, -a) / a;
        const std::complex<double> full = std::sqrt(kPi / (4.0 * a)) * std::polar(1.0, -kPi / 4.0);
        inner = (std::polar(1.0, a) * (full - tail)).imag();
    }
    return 2.0 * t / s * inner;
}

SynthesisResult multiplier_synthesis(const Field& u, const std::function<double(double)>& psi_hat,
                                     const SigmaRule& rule) {
    const double lmax = u.basis->max_eigenvalue();
    if (lmax > rule.resolved_frequency * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "sigma grid resolves frequencies up to " << rule.resolved_frequency << " but the basis reaches "
           << lmax << "; need step <= " << kPi / lmax;
        throw ValidationError(os.str());
    }
    // the exp_wave multiplier is accumulated once per eigenspace, then applied
    const auto& spaces = u.basis->eigenspaces();
    std::vector<double> weight(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        weight[i] = rule.weights[i] * psi_hat(rule.nodes[i]) / (2.0 * kPi);
    std::vector<std::complex<double>> mult(spaces.size());
    parallel_for(spaces.size(), default_threads(), [&](std::size_t k) {
        std::complex<double> sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            if (weight[i] == 0.0) continue;
            sum += weight[i] * std::polar(1.0, -rule.nodes[i] * spaces[k].eigenvalue);
        }
        mult[k] = sum;
    });
    SpectralMultiplier synthesized("synthesized", SpectralMultiplier::ComplexRule([&](double lambda) {
                                       for (std::size_t k = 0; k < spaces.size(); ++k)
                                           if (spaces[k].eigenvalue == lambda) return mult[k];
                                       return std::complex<double>(0.0, 0.0);
                                   }));
    const Eigen::VectorXcd acc = apply_complex(u, synthesized).coeffs;
    SynthesisResult res;
    res.field = {u.basis, acc.real()};
    res.max_imag = acc.imag().cwiseAbs().maxCoeff();
    return res;
}

}  // namespace clab
