#include "lseprec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lseprec {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("SpectralModel: alpha must be positive and finite");
}

// Adaptive Simpson on [a, b] with absolute tolerance.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 48);
}

}  // namespace

SpectralModel SpectralModel::marchenko_pastur(double alpha) {
    check_alpha(alpha);
    SpectralModel m;
    m.kind_ = SpectralKind::MarchenkoPastur;
    m.alpha_ = alpha;
    m.mean_ = alpha;
    return m;
}

SpectralModel SpectralModel::point_mass(double alpha, double atom) {
    check_alpha(alpha);
    if (!(atom > 0.0) || !std::isfinite(atom))
        throw std::invalid_argument("SpectralModel: point-mass atom must be positive");
    SpectralModel m;
    m.kind_ = SpectralKind::PointMass;
    m.alpha_ = alpha;
    m.atom_ = atom;
    m.mean_ = atom;
    return m;
}

SpectralModel SpectralModel::empirical(double alpha, std::vector<double> eigenvalues) {
    check_alpha(alpha);
    if (eigenvalues.empty())
        throw std::invalid_argument("SpectralModel: empirical spectrum needs samples");
    for (double e : eigenvalues)
        if (!std::isfinite(e) || e < 0.0)
            throw std::invalid_argument("SpectralModel: eigenvalues must be finite and non-negative");
    std::sort(eigenvalues.begin(), eigenvalues.end());
    SpectralModel m;
    m.kind_ = SpectralKind::Empirical;
    m.alpha_ = alpha;
    m.eig_ = std::move(eigenvalues);
    m.lambda_min_ = m.eig_.front();
    m.mean_ = std::accumulate(m.eig_.begin(), m.eig_.end(), 0.0) / double(m.eig_.size());
    double m2 = 0.0;
    for (double e : m.eig_) m2 += e * e;
    m2 /= double(m.eig_.size());
    m.var_ = m2 - m.mean_ * m.mean_;
    return m;
}

SpectralModel SpectralModel::empirical_from_file(double alpha, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("SpectralModel: cannot open " + path);
    std::vector<double> eig;
    double v;
    while (in >> v) eig.push_back(v);
    return empirical(alpha, std::move(eig));
}

double SpectralModel::stieltjes(double s) const {
    double acc = 0.0;
    for (double e : eig_) acc += 1.0 / (e - s);
    return acc / double(eig_.size());
}

double SpectralModel::stieltjes_deriv(double s) const {
    double acc = 0.0;
    for (double e : eig_) {
        const double d = e - s;
        acc += 1.0 / (d * d);
    }
    return acc / double(eig_.size());
}

// Solve G(s) = -omega on the real branch s < lambda_min where G is monotone
// increasing from 0+ to +inf.
double SpectralModel::invert_stieltjes(double omega) const {
    const double target = -omega;  // > 0 for omega < 0
    if (!(target > 0.0))
        throw std::domain_error("SpectralModel: empirical inversion needs omega < 0");
    // Initial guess from G(s) ~ 1/(mean - s) far below the spectrum.
    double hi = lambda_min_ - 1e-12 * std::max(1.0, std::abs(lambda_min_)) - 1e-300;
    double lo = std::min(mean_ - 1.0 / target, hi - 1.0);
    while (stieltjes(lo) > target) {
        lo = hi - 2.0 * (hi - lo);
        if (!std::isfinite(lo)) throw std::runtime_error("SpectralModel: bracket expansion failed");
    }
    // G(hi) -> +inf at the edge, so [lo, hi] brackets the root.
    // Safeguarded Newton.
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double g = stieltjes(s);
        if (g > target) hi = s; else lo = s;
        const double step = (g - target) / stieltjes_deriv(s);
        double snext = s - step;
        if (!(snext > lo && snext < hi)) snext = 0.5 * (lo + hi);
        if (std::abs(snext - s) <= 1e-15 * std::max(1.0, std::abs(s))) { s = snext; break; }
        s = snext;
    }
    const double resid = stieltjes(s) - target;
    if (std::abs(resid) > 1e-9 * std::max(1.0, target))
        throw std::runtime_error("SpectralModel: Stieltjes inversion did not converge, residual " +
                                 std::to_string(resid));
    return s;
}

double SpectralModel::r_empirical(double omega) const {
    if (std::abs(omega) < 1e-9) {
        // R(omega) = mean + var*omega + O(omega^2); avoids the s -> -inf branch.
        return mean_ + var_ * omega;
    }
    const double s = invert_stieltjes(omega);
    return s - 1.0 / omega;  // G^{-1}(-omega) - omega^{-1}
}

double SpectralModel::cache_eval(double omega) const {
    // Fritsch-Carlson monotone cubic on the cached grid.
    const auto& xs = cache_omega_;
    auto it = std::upper_bound(xs.begin(), xs.end(), omega);
    size_t i = (it == xs.begin()) ? 0 : size_t(it - xs.begin()) - 1;
    if (i >= xs.size() - 1) i = xs.size() - 2;
    const double h = xs[i + 1] - xs[i];
    const double t = (omega - xs[i]) / h;
    const double y0 = cache_r_[i], y1 = cache_r_[i + 1];
    const double m0 = cache_slope_[i] * h, m1 = cache_slope_[i + 1] * h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
}

void SpectralModel::build_cache(double omega_min, double omega_max, int points) {
    if (kind_ != SpectralKind::Empirical) return;  // closed forms need no cache
    if (points < 4 || !(omega_min < omega_max))
        throw std::invalid_argument("SpectralModel: bad cache grid");
    cache_omega_.clear(); cache_r_.clear(); cache_slope_.clear();
    std::vector<double> xs(points), ys(points);
    for (int i = 0; i < points; ++i) {
        xs[i] = omega_min + (omega_max - omega_min) * double(i) / double(points - 1);
        ys[i] = r_empirical(xs[i]);
    }
    // Fritsch-Carlson slopes keep the interpolant monotone on monotone data.
    std::vector<double> d(points - 1), sl(points);
    for (int i = 0; i + 1 < points; ++i) d[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    sl[0] = d[0];
    sl[points - 1] = d[points - 2];
    for (int i = 1; i + 1 < points; ++i)
        sl[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i]);
    cache_omega_ = std::move(xs);
    cache_r_ = std::move(ys);
    cache_slope_ = std::move(sl);
}

double SpectralModel::r_transform(double omega) const {
    if (!std::isfinite(omega))
        throw std::domain_error("SpectralModel: omega must be finite");
    switch (kind_) {
        case SpectralKind::MarchenkoPastur:
            if (omega >= 1.0)
                throw std::domain_error("SpectralModel: Marchenko-Pastur R needs omega < 1");
            return alpha_ / (1.0 - omega);
        case SpectralKind::PointMass:
            return atom_;
        case SpectralKind::Empirical:
            if (has_cache() && omega >= cache_omega_.front() && omega <= cache_omega_.back())
                return cache_eval(omega);
            return r_empirical(omega);
    }
    return 0.0;
}

double SpectralModel::r_derivative(double omega) const {
    switch (kind_) {
        case SpectralKind::MarchenkoPastur: {
            if (omega >= 1.0)
                throw std::domain_error("SpectralModel: Marchenko-Pastur R needs omega < 1");
            const double d = 1.0 - omega;
            return alpha_ / (d * d);
        }
        case SpectralKind::PointMass:
            return 0.0;
        case SpectralKind::Empirical: {
            if (std::abs(omega) < 1e-6) return var_;  // R'(0) = second free cumulant
            // Implicit differentiation of G(s(omega)) = -omega:
            //   R'(omega) = -1/G'(s) + 1/omega^2.
            const double s = invert_stieltjes(omega);
            return -1.0 / stieltjes_deriv(s) + 1.0 / (omega * omega);
        }
    }
    return 0.0;
}

double SpectralModel::r_integral(double a, double b) const {
    if (!(a <= b)) throw std::domain_error("SpectralModel: r_integral needs a <= b");
    if (a == b) return 0.0;
    switch (kind_) {
        case SpectralKind::MarchenkoPastur:
            if (-a >= 1.0 || -b >= 1.0)
                throw std::domain_error("SpectralModel: integrand leaves the MP domain");
            return alpha_ * std::log((1.0 + b) / (1.0 + a));
        case SpectralKind::PointMass:
            return atom_ * (b - a);
        case SpectralKind::Empirical:
            return integrate([this](double w) { return r_transform(-w); }, a, b, 1e-10);
    }
    return 0.0;
}

}  // namespace lseprec
