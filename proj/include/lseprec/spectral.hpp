#pragma once

#include <string>
#include <vector>

namespace lseprec {

enum class SpectralKind { MarchenkoPastur, PointMass, Empirical };

/// Spectrum of the channel Gram matrix H^H H, exposed through its R-transform.
///
/// Evaluations are restricted to the real axis; every downstream formula calls
/// R at -chi or -chi_tilde with chi, chi_tilde >= 0.
class SpectralModel {
public:
    static SpectralModel marchenko_pastur(double alpha);
    static SpectralModel point_mass(double alpha, double atom);
    static SpectralModel empirical(double alpha, std::vector<double> eigenvalues);
    // Plain-text file, one eigenvalue per line.
    static SpectralModel empirical_from_file(double alpha, const std::string& path);

    SpectralKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double atom() const { return atom_; }
    const std::vector<double>& eigenvalues() const { return eig_; }

    /// R(omega). Closed form for Marchenko-Pastur (alpha/(1-omega), omega < 1)
    /// and point mass; numeric Stieltjes inversion for empirical spectra.
    double r_transform(double omega) const;

    /// dR/domega in the transform argument.
    double r_derivative(double omega) const;

    /// Integral of R(-w) dw over [a, b].
    double r_integral(double a, double b) const;

    /// Precompute a monotone interpolant of R over [omega_min, omega_max]
    /// (empirical spectra only; the solvers evaluate R thousands of times).
    void build_cache(double omega_min, double omega_max, int points);
    bool has_cache() const { return !cache_omega_.empty(); }

    double mean_eigenvalue() const { return mean_; }

private:
    SpectralModel() = default;

    double stieltjes(double s) const;        // G(s) = mean 1/(lambda_i - s)
    double stieltjes_deriv(double s) const;  // G'(s)
    double invert_stieltjes(double omega) const;  // s with G(s) = -omega, s < lambda_min
    double r_empirical(double omega) const;
    double cache_eval(double omega) const;

    SpectralKind kind_ = SpectralKind::MarchenkoPastur;
    double alpha_ = 1.0;
    double atom_ = 1.0;
    std::vector<double> eig_;
    double mean_ = 0.0;
    double var_ = 0.0;
    double lambda_min_ = 0.0;

    // monotone cubic cache
    std::vector<double> cache_omega_, cache_r_, cache_slope_;
};

}  // namespace lseprec
