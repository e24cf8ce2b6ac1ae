#pragma once

#include "lseprec/decoupled.hpp"
#include "lseprec/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lseprec {

enum class ChannelModel { IidGaussian, HaarSpectrum };

/// One finite-size precoding problem: minimize ||H v - sqrt(rho) s||^2 + u(v)
/// over the support.
struct ProblemInstance {
    Eigen::MatrixXcd H;  // k x n
    Eigen::VectorXcd s;  // k
    double rho = 1.0;
    Penalty penalty;
    Support support;
    std::uint64_t seed = 0;

    int n() const { return int(H.cols()); }
    int k() const { return int(H.rows()); }
};

struct SolveResult {
    Eigen::VectorXcd x;
    double objective = 0.0;
    double distortion = 0.0;       // (1/k) ||H x - sqrt(rho) s||^2
    double active_fraction = 0.0;
    double avg_power = 0.0;        // ||x||^2 / n
    int iterations = 0;
    bool converged = true;
};

ProblemInstance sample_instance(int n, double alpha, double rho, const Penalty& penalty,
                                const Support& support, ChannelModel model, std::uint64_t seed,
                                const SpectralModel* spectrum = nullptr);

double instance_objective(const ProblemInstance& inst, const Eigen::VectorXcd& x);
SolveResult make_result(const ProblemInstance& inst, Eigen::VectorXcd x, int iterations,
                        bool converged);

/// Closed-form regularized zero-forcing solution (pure ridge on the complex
/// plane): x = (H^H H + lambda I)^{-1} H^H sqrt(rho) s.
SolveResult solve_rzf(const ProblemInstance& inst);

struct ConvexOptions {
    int max_iter = 20000;
    double tol = 1e-12;  // relative objective change
};

/// Accelerated proximal gradient for convex instances (lambda0 = 0, support
/// complex plane or disc). Converges to the global minimum.
SolveResult solve_convex(const ProblemInstance& inst, const ConvexOptions& options = {});

struct CoordOptions {
    int max_sweeps = 500;
    int restarts = 8;
    double tol = 1e-12;
    bool shuffle = false;  // seeded coordinate-order shuffling per sweep
};

/// Cyclic exact coordinate minimization; handles every penalty/support pair.
/// Heuristic for non-convex cases: the result upper-bounds the optimum.
SolveResult solve_coordinate(const ProblemInstance& inst, const CoordOptions& options = {});

/// Random transmit antenna selection baseline: ridge-precode on a random
/// column subset of ceil(eta_target * n) antennas, zeros elsewhere.
SolveResult random_tas(const ProblemInstance& inst, double eta_target, double lambda);

struct MarginalReport {
    struct Bin {
        std::vector<double> magnitudes;  // pooled |x_j| for the bin
        double activity_rate = 0.0;
    };
    std::vector<Bin> bins;
    double max_ks = 0.0;  // max two-sample KS statistic across bin pairs
};

/// Pools per-antenna outputs by index bin across trials and compares the
/// |x_j| distributions between bins (decoupling-property check).
MarginalReport empirical_marginal(const std::vector<SolveResult>& results, int n_bins,
                                  double active_tol);

/// Binary dump: header (n, k as u64 LE), then row-major H as interleaved f64
/// LE (re, im) pairs, then s likewise.
void dump_instance(const ProblemInstance& inst, const std::string& path);
ProblemInstance load_instance(const std::string& path, double rho, const Penalty& penalty,
                              const Support& support);

}  // namespace lseprec
