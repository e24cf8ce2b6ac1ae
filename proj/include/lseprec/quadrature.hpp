#pragma once

#include <vector>

namespace lseprec {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1].
QuadRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadRule gauss_legendre(int n, double a, double b);

/// Gauss-Hermite rule for integrals against exp(-x^2) dx (physicists' weight).
QuadRule gauss_hermite(int n);

/// Nodes/weights for E[f(X)] with X ~ N(0, sigma^2); weights sum to 1.
QuadRule gauss_hermite_normal(int n, double sigma);

}  // namespace lseprec
