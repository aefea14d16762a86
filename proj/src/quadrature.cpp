#include "clab/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "clab/errors.hpp"

namespace clab {

namespace {
std::atomic<int> g_threads{1};

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double d = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, d};
}
}  // namespace

double QuadratureRule::apply(const std::function<double(double)>& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw ValidationError("gauss_legendre: need at least one node");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, d] = legendre_with_derivative(n, x);
            dp = d;
            const double dx = p / d;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        dp = legendre_with_derivative(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.nodes[i] = mid - half * x;
        rule.weights[n - 1 - i] = half * w;
        rule.weights[i] = half * w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = mid;
    return rule;
}

QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, int n_per_panel) {
    QuadratureRule rule;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const auto panel = gauss_legendre(n_per_panel, breaks[p], breaks[p + 1]);
        rule.nodes.insert(rule.nodes.end(), panel.nodes.begin(), panel.nodes.end());
        rule.weights.insert(rule.weights.end(), panel.weights.begin(), panel.weights.end());
    }
    return rule;
}

QuadratureRule trapezoid(int n, double a, double b) {
    if (n < 2) throw ValidationError("trapezoid: need at least two nodes");
    QuadratureRule rule;
    rule.nodes = linspace(a, b, n);
    const double h = (b - a) / (n - 1);
    rule.weights.assign(n, h);
    rule.weights.front() *= 0.5;
    rule.weights.back() *= 0.5;
    return rule;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(std::max(n, 0));
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
    if (n > 1) out.back() = b;
    return out;
}

std::vector<double> logspace(double a, double b, int n) {
    if (a <= 0.0 || b <= 0.0) throw ValidationError("logspace: bounds must be positive");
    auto exps = linspace(std::log(a), std::log(b), n);
    for (auto& e : exps) e = std::exp(e);
    if (n > 0) {
        exps.front() = a;
        exps.back() = b;
    }
    return exps;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw ValidationError("fit_line: need at least two (x, y) pairs");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw ValidationError("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::size_t i = next++; i < n; i = next++) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

int default_threads() { return g_threads.load(); }
void set_default_threads(int threads) { g_threads.store(std::max(threads, 1)); }

}  // namespace clab
