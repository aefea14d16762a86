#pragma once

// Transmutation identities expressing e^{-t lambda^2} and e^{-t lambda} through
// the sine propagator, wave multipliers, and Fourier synthesis of multipliers.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clab/funcalc.hpp"

namespace clab {

/// ln I(t, lambda) with I(t, lambda) = int_0^inf e^{-tau/4t} sin(sqrt(tau) lambda)/lambda dtau.
/// With tau = s^2 the integrand is entire and even in s; the integral is taken
/// along the shifted line s = w + 2 i lambda t, where the exp(-t lambda^2)
/// factor separates exactly and the remaining Gaussian is integrated by the
/// trapezoid rule. lambda = 0 uses 2 int s^2 e^{-s^2/4t} ds.
double transmutation_log_integral(double t, double lambda);

/// The same integral by composite Gauss-Legendre on the real s-axis. Returns NaN
/// when t lambda^2 > 15 (cancellation makes the real-axis sum meaningless).
double transmutation_integral_realline(double t, double lambda);

/// int_0^inf s e^{-a s^2} sin(b s) ds = sqrt(pi) b / (4 a^{3/2}) e^{-b^2 / 4a}.
double gaussian_sine_integral(double a, double b);

/// c(t) = a t^p.
struct Prefactor {
    double a = 0.0;
    double p = 0.0;
    double operator()(double t) const;
    double log_value(double t) const;

    /// Normalization implied by the Gaussian-sine integral.
    static Prefactor derived();
    /// 1 / (4 sqrt(pi) t^{1/3}).
    static Prefactor printed();
};

struct TransmutationCheck {
    std::string identity;  // "biharmonic" or "heat"
    double t = 0.0;
    double lambda = 0.0;
    double lhs = 0.0;           // e^{-t lambda^2} or e^{-t lambda}
    double log_lhs = 0.0;
    double integral = 0.0;      // may underflow; log_integral is authoritative
    double log_integral = 0.0;
    double realline = 0.0;      // NaN when skipped
    double derived_prefactor = 0.0;
    double residual = 0.0;      // |c I - lhs| / lhs, evaluated in logs
};

TransmutationCheck scalar_transmute_biharmonic(double t, double lambda, const Prefactor& c = Prefactor::derived());
/// Uses sin(sqrt(tau) sqrt(lambda)) / sqrt(lambda); target e^{-t lambda}.
TransmutationCheck scalar_transmute_heat(double t, double lambda, const Prefactor& c = Prefactor::derived());

struct TransmuteSweep {
    std::vector<TransmutationCheck> rows;  // both identities, residuals against the fit
    Prefactor fit;
    double max_residual = 0.0;          // fitted prefactor
    double max_printed_residual = 0.0;  // printed prefactor
    double max_realline_deviation = 0.0;
    std::size_t realline_checked = 0;
    double local_exponent_spread = 0.0;  // max |p_local - p| over t
};

/// Fits ln c = ln a + p ln t by least squares over both identities, then
/// reports residuals of the fitted and of the printed prefactor.
TransmuteSweep transmute_sweep(std::span<const double> ts, std::span<const double> lambdas);

// ---------------------------------------------------------------- waves

enum class WaveKind { SincWave, CosWave, HalfWave, ExpWave };
WaveKind parse_wave_kind(const std::string& name);

/// sin(sigma lambda)/lambda, cos(sigma lambda), sin(sigma sqrt(lambda))/sqrt(lambda).
Field wave_apply(const Field& u, double sigma, WaveKind kind);
/// e^{i sigma Delta} acting as e^{-i sigma lambda}.
ComplexField wave_apply_complex(const Field& u, double sigma);

/// Symmetric quadrature rule on the sigma-line with the highest frequency it resolves.
struct SigmaRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double resolved_frequency = 0.0;
};

/// Trapezoid nodes k h, |k h| <= S; resolves frequencies up to pi / h.
SigmaRule uniform_sigma_rule(double S, double h);

/// Rule for the transform of sin(t sqrt|x|)/sqrt|x|: sigma = r^2 on
/// [r0^2, 1] with panels following the 1/sigma chirp, uniform panels on
/// [1, S], mirrored to negative sigma.
SigmaRule half_wave_sigma_rule(double t, double lambda_max, double S = 4000.0, double r0 = 0.002);

double gaussian_psi_hat(double sigma);
/// Fourier transform of sin(t sqrt|x|)/sqrt|x|, which is
/// (2t/|sigma|) int_0^1 sin(t^2 (1 - v^2) / (4|sigma|)) dv.
double half_wave_psi_hat(double t, double sigma);

struct SynthesisResult {
    Field field;
    double max_imag = 0.0;  // largest imaginary coefficient discarded
};

/// (1/2 pi) sum_i w_i psi_hat(sigma_i) e^{i sigma_i Delta} u. Throws
/// ValidationError if the rule does not resolve lambda_max.
SynthesisResult multiplier_synthesis(const Field& u, const std::function<double(double)>& psi_hat,
                                     const SigmaRule& rule);

}  // namespace clab
