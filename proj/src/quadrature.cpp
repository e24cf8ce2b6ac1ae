#include "lseprec/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace lseprec {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

QuadRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
    QuadRule q;
    q.nodes.resize(n);
    q.weights.resize(n);
    // Newton iteration from the Chebyshev-based initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (double(i) + 0.75) / (double(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / double(k);
                p0 = p1;
                p1 = p2;
            }
            dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.nodes[i] = -x;
        q.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.weights[i] = w;
        q.weights[n - 1 - i] = w;
    }
    return q;
}

QuadRule gauss_legendre(int n, double a, double b) {
    QuadRule q = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        q.nodes[i] = mid + half * q.nodes[i];
        q.weights[i] *= half;
    }
    return q;
}

QuadRule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n >= 1");
    QuadRule q;
    q.nodes.resize(n);
    q.weights.resize(n);
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    double x = 0.0;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Standard initial guesses for the largest roots, then step down.
        if (i == 0)
            x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            x -= 1.14 * std::pow(double(n), 0.426) / x;
        else if (i == 2)
            x = 1.86 * x - 0.86 * q.nodes[0];
        else if (i == 3)
            x = 1.91 * x - 0.91 * q.nodes[1];
        else
            x = 2.0 * x - q.nodes[i - 2];
        double dp = 0.0;
        for (int it = 0; it < 200; ++it) {
            double p0 = pim4, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = x * std::sqrt(2.0 / (k + 1.0)) * p1 - std::sqrt(double(k) / (k + 1.0)) * p2;
            }
            dp = std::sqrt(2.0 * n) * p1;
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.nodes[i] = x;
        q.nodes[n - 1 - i] = -x;
        q.weights[i] = 2.0 / (dp * dp);
        q.weights[n - 1 - i] = q.weights[i];
    }
    return q;
}

QuadRule gauss_hermite_normal(int n, double sigma) {
    QuadRule q = gauss_hermite(n);
    const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
    const double scale = std::sqrt(2.0) * sigma;
    for (int i = 0; i < n; ++i) {
        q.nodes[i] *= scale;
        q.weights[i] *= inv_sqrt_pi;
    }
    return q;
}

}  // namespace lseprec
