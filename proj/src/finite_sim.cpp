#include "lseprec/finite_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace lseprec {

namespace {

Eigen::MatrixXcd gaussian_matrix(int rows, int cols, double entry_var, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(entry_var / 2.0));
    Eigen::MatrixXcd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            m(i, j) = cplx(normal(rng), normal(rng));
    return m;
}

// Haar unitary via QR of a Gaussian matrix with the diagonal phase fix.
Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& rng) {
    Eigen::MatrixXcd g = gaussian_matrix(n, n, 1.0, rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
        const cplx d = r(i, i);
        q.col(i) *= (std::abs(d) > 0.0) ? d / std::abs(d) : cplx(1.0, 0.0);
    }
    return q;
}

double power_iteration_sigma_max(const Eigen::MatrixXcd& h, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    Eigen::VectorXcd v = gaussian_matrix(int(h.cols()), 1, 1.0, rng);
    v.normalize();
    double s = 0.0, prev = -1.0;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXcd w = h.adjoint() * (h * v);
        s = std::sqrt(w.norm());
        if (w.norm() == 0.0) return 0.0;
        v = w / w.norm();
        if (prev > 0.0 && std::abs(s - prev) <= 1e-6 * s) break;
        prev = s;
    }
    return s;
}

// Per-entry proximal map of gamma*(lambda|v|^2 + lambda1|v|) plus the support
// constraint (complex plane or disc).
cplx prox_entry(cplx z, double gamma, const Penalty& penalty, const Support& support) {
    const double a = std::abs(z);
    if (a == 0.0) return cplx(0.0, 0.0);
    double m = (a - gamma * penalty.l1) / (1.0 + 2.0 * gamma * penalty.ridge);
    if (m <= 0.0) return cplx(0.0, 0.0);
    if (support.kind == SupportKind::Disc) m = std::min(m, std::sqrt(support.peak));
    return (m / a) * z;
}

double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        // Advance both sides through the full tie group so the CDF gap is
        // only evaluated between distinct values.
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        const double fa = double(i) / double(a.size());
        const double fb = double(j) / double(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = (unsigned char)((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
    return v;
}

void put_f64(std::ofstream& out, double v) {
    static_assert(sizeof(double) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

double get_f64(std::ifstream& in) {
    const std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

ProblemInstance sample_instance(int n, double alpha, double rho, const Penalty& penalty,
                                const Support& support, ChannelModel model, std::uint64_t seed,
                                const SpectralModel* spectrum) {
    if (n < 2) throw std::invalid_argument("sample_instance: n >= 2");
    const int k = int(std::lround(alpha * n));
    if (k < 1) throw std::invalid_argument("sample_instance: alpha * n >= 1");
    penalty.validate();

    std::mt19937_64 rng(seed);
    ProblemInstance inst;
    inst.rho = rho;
    inst.penalty = penalty;
    inst.support = support;
    inst.seed = seed;

    if (model == ChannelModel::IidGaussian) {
        inst.H = gaussian_matrix(k, n, 1.0 / double(n), rng);
    } else {
        // H = W [diag(sigma) 0] U^H with Haar W, U and sigma^2 drawn from the
        // spectral model (padded with zeros for alpha < 1).
        if (spectrum == nullptr)
            throw std::invalid_argument("sample_instance: haar_spectrum needs a spectral model");
        std::vector<double> eig(n, 0.0);
        switch (spectrum->kind()) {
            case SpectralKind::PointMass:
                if (n > k)
                    throw std::invalid_argument(
                        "sample_instance: point-mass spectrum needs alpha >= 1 (rank n)");
                std::fill(eig.begin(), eig.end(), spectrum->atom());
                break;
            case SpectralKind::Empirical: {
                const auto& samples = spectrum->eigenvalues();
                std::uniform_int_distribution<size_t> pick(0, samples.size() - 1);
                for (int i = 0; i < std::min(n, k); ++i) eig[i] = samples[pick(rng)];
                break;
            }
            case SpectralKind::MarchenkoPastur: {
                // Eigenvalues of an independent Gram matrix with matching load.
                Eigen::MatrixXcd g = gaussian_matrix(k, n, 1.0 / double(n), rng);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.adjoint() * g);
                for (int i = 0; i < n; ++i) eig[i] = std::max(0.0, es.eigenvalues()(i));
                break;
            }
        }
        std::sort(eig.begin(), eig.end(), std::greater<double>());
        for (int i = k; i < n; ++i)
            if (eig[i] > 1e-10)
                throw std::invalid_argument("sample_instance: spectrum rank exceeds k");
        Eigen::MatrixXcd u = haar_unitary(n, rng);
        Eigen::MatrixXcd w = haar_unitary(k, rng);
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(k, n);
        for (int i = 0; i < k; ++i) b(i, i) = std::sqrt(std::max(0.0, eig[i]));
        inst.H = w * b * u.adjoint();
    }
    inst.s = gaussian_matrix(k, 1, 1.0, rng);
    return inst;
}

double instance_objective(const ProblemInstance& inst, const Eigen::VectorXcd& x) {
    double obj = (inst.H * x - std::sqrt(inst.rho) * inst.s).squaredNorm();
    for (int j = 0; j < x.size(); ++j) obj += inst.penalty(x(j));
    return obj;
}

SolveResult make_result(const ProblemInstance& inst, Eigen::VectorXcd x, int iterations,
                        bool converged) {
    SolveResult res;
    res.objective = instance_objective(inst, x);
    res.distortion = (inst.H * x - std::sqrt(inst.rho) * inst.s).squaredNorm() / double(inst.k());
    const double tol = 1e-9 * std::max(1.0, inst.support.bounded() ? std::sqrt(inst.support.peak) : 1.0);
    int active = 0;
    for (int j = 0; j < x.size(); ++j)
        if (std::abs(x(j)) > tol) ++active;
    res.active_fraction = double(active) / double(x.size());
    res.avg_power = x.squaredNorm() / double(x.size());
    res.iterations = iterations;
    res.converged = converged;
    res.x = std::move(x);
    return res;
}

SolveResult solve_rzf(const ProblemInstance& inst) {
    if (!inst.penalty.pure_ridge() || inst.support.kind != SupportKind::ComplexPlane)
        throw std::invalid_argument("solve_rzf: pure ridge on the complex plane only");
    const int n = inst.n();
    Eigen::MatrixXcd gram = inst.H.adjoint() * inst.H;
    gram.diagonal().array() += inst.penalty.ridge;
    Eigen::VectorXcd x = gram.ldlt().solve(inst.H.adjoint() * (std::sqrt(inst.rho) * inst.s));
    (void)n;
    return make_result(inst, std::move(x), 1, true);
}

SolveResult solve_convex(const ProblemInstance& inst, const ConvexOptions& options) {
    if (inst.penalty.zero_norm > 0.0)
        throw std::invalid_argument("solve_convex: zero-norm penalty is not convex");
    if (inst.support.kind == SupportKind::PskZero)
        throw std::invalid_argument("solve_convex: psk_zero support is not convex");

    const int n = inst.n();
    const double sigma_max = power_iteration_sigma_max(inst.H, inst.seed);
    const double lips = 2.0 * sigma_max * sigma_max;
    const double gamma = (lips > 0.0) ? 1.0 / lips : 1.0;
    const Eigen::VectorXcd target = std::sqrt(inst.rho) * inst.s;

    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
    Eigen::VectorXcd y = x;
    double t = 1.0;
    double obj = instance_objective(inst, x);
    int it = 0;
    bool converged = false;
    for (; it < options.max_iter; ++it) {
        const Eigen::VectorXcd grad = 2.0 * (inst.H.adjoint() * (inst.H * y - target));
        Eigen::VectorXcd z = y - gamma * grad;
        Eigen::VectorXcd x_new(n);
        for (int j = 0; j < n; ++j) x_new(j) = prox_entry(z(j), gamma, inst.penalty, inst.support);
        double obj_new = instance_objective(inst, x_new);
        if (obj_new > obj) {
            // Monotone fallback: plain proximal step from x.
            const Eigen::VectorXcd gx = 2.0 * (inst.H.adjoint() * (inst.H * x - target));
            Eigen::VectorXcd zx = x - gamma * gx;
            for (int j = 0; j < n; ++j) x_new(j) = prox_entry(zx(j), gamma, inst.penalty, inst.support);
            obj_new = instance_objective(inst, x_new);
            t = 1.0;
        }
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x_new + ((t - 1.0) / t_new) * (x_new - x);
        const double rel = std::abs(obj - obj_new) / std::max(1e-300, std::abs(obj));
        x = std::move(x_new);
        obj = obj_new;
        t = t_new;
        if (rel < options.tol) { converged = true; ++it; break; }
    }
    return make_result(inst, std::move(x), it, converged);
}

namespace {

// One full cyclic sweep of exact coordinate minimization. Returns the final
// objective; residual r = sqrt(rho) s - H x is maintained incrementally.
double coordinate_sweeps(const ProblemInstance& inst, Eigen::VectorXcd& x, int max_sweeps,
                         double tol, bool shuffle, std::mt19937_64& rng, int& sweeps_done) {
    const int n = inst.n();
    std::vector<double> col_norm2(n);
    for (int j = 0; j < n; ++j) col_norm2[j] = inst.H.col(j).squaredNorm();
    Eigen::VectorXcd r = std::sqrt(inst.rho) * inst.s - inst.H * x;
    double obj = instance_objective(inst, x);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (sweeps_done = 0; sweeps_done < max_sweeps; ++sweeps_done) {
        if (shuffle) std::shuffle(order.begin(), order.end(), rng);
        for (int j : order) {
            if (col_norm2[j] <= 0.0) continue;
            const Eigen::VectorXcd& h = inst.H.col(j);
            const cplx c_hat = (h.dot(r) + col_norm2[j] * x(j)) / col_norm2[j];
            const cplx v = solve_scalar(c_hat, 1.0 / col_norm2[j], inst.penalty, inst.support);
            if (v != x(j)) {
                r += h * (x(j) - v);
                x(j) = v;
            }
        }
        const double obj_new = instance_objective(inst, x);
        const double rel = std::abs(obj - obj_new) / std::max(1e-300, std::abs(obj));
        obj = obj_new;
        if (rel < tol) { ++sweeps_done; break; }
    }
    return obj;
}

}  // namespace

SolveResult solve_coordinate(const ProblemInstance& inst, const CoordOptions& options) {
    const int n = inst.n();
    std::mt19937_64 rng(inst.seed ^ 0xc2b2ae3d27d4eb4full);

    // Initializations: zero, ridge solution projected to the support, then
    // seeded random support points.
    std::vector<Eigen::VectorXcd> inits;
    inits.push_back(Eigen::VectorXcd::Zero(n));
    if (options.restarts > 1) {
        ProblemInstance ridge = inst;
        ridge.penalty = Penalty::ridge_only(std::max(inst.penalty.ridge, 1e-3));
        ridge.support = Support::complex_plane();
        Eigen::VectorXcd xr = solve_rzf(ridge).x;
        for (int j = 0; j < n; ++j) xr(j) = solve_scalar(xr(j), 1.0, Penalty{}, inst.support);
        inits.push_back(std::move(xr));
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    while (int(inits.size()) < options.restarts) {
        Eigen::VectorXcd xr(n);
        const double scale = inst.support.bounded() ? std::sqrt(inst.support.peak) : std::sqrt(inst.rho);
        for (int j = 0; j < n; ++j) {
            cplx g(normal(rng), normal(rng));
            xr(j) = solve_scalar(scale * g, 1.0, Penalty{}, inst.support);
        }
        inits.push_back(std::move(xr));
    }

    SolveResult best;
    double best_obj = std::numeric_limits<double>::infinity();
    int total_sweeps = 0;
    for (auto& x0 : inits) {
        Eigen::VectorXcd x = std::move(x0);
        int sweeps = 0;
        const double obj = coordinate_sweeps(inst, x, options.max_sweeps, options.tol,
                                             options.shuffle, rng, sweeps);
        total_sweeps += sweeps;
        if (obj < best_obj) {
            best_obj = obj;
            best = make_result(inst, std::move(x), sweeps, true);
        }
    }
    best.iterations = total_sweeps;
    return best;
}

SolveResult random_tas(const ProblemInstance& inst, double eta_target, double lambda) {
    if (!(eta_target > 0.0 && eta_target <= 1.0))
        throw std::invalid_argument("random_tas: eta_target in (0, 1]");
    const int n = inst.n();
    const int m = int(std::ceil(eta_target * n));
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(inst.seed ^ 0xa5a5a5a55a5a5a5aull);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(m);
    std::sort(idx.begin(), idx.end());

    Eigen::MatrixXcd hs(inst.k(), m);
    for (int j = 0; j < m; ++j) hs.col(j) = inst.H.col(idx[j]);
    Eigen::MatrixXcd gram = hs.adjoint() * hs;
    gram.diagonal().array() += lambda;
    Eigen::VectorXcd xs = gram.ldlt().solve(hs.adjoint() * (std::sqrt(inst.rho) * inst.s));

    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
    for (int j = 0; j < m; ++j) x(idx[j]) = xs(j);
    return make_result(inst, std::move(x), 1, true);
}

MarginalReport empirical_marginal(const std::vector<SolveResult>& results, int n_bins,
                                  double active_tol) {
    if (n_bins < 2) throw std::invalid_argument("empirical_marginal: need >= 2 bins");
    if (results.empty()) throw std::invalid_argument("empirical_marginal: no results");
    const int n = int(results.front().x.size());
    MarginalReport rep;
    rep.bins.resize(n_bins);
    for (const auto& res : results) {
        for (int j = 0; j < n; ++j) {
            const int b = std::min(n_bins - 1, j * n_bins / n);
            rep.bins[b].magnitudes.push_back(std::abs(res.x(j)));
        }
    }
    for (auto& bin : rep.bins) {
        if (bin.magnitudes.size() < 1000)
            throw std::invalid_argument("empirical_marginal: need >= 1000 samples per bin");
        std::sort(bin.magnitudes.begin(), bin.magnitudes.end());
        int active = 0;
        for (double v : bin.magnitudes)
            if (v > active_tol) ++active;
        bin.activity_rate = double(active) / double(bin.magnitudes.size());
    }
    for (int a = 0; a < n_bins; ++a)
        for (int b = a + 1; b < n_bins; ++b)
            rep.max_ks = std::max(rep.max_ks,
                                  ks_statistic(rep.bins[a].magnitudes, rep.bins[b].magnitudes));
    return rep;
}

void dump_instance(const ProblemInstance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dump_instance: cannot open " + path);
    put_u64(out, std::uint64_t(inst.n()));
    put_u64(out, std::uint64_t(inst.k()));
    for (int i = 0; i < inst.k(); ++i)
        for (int j = 0; j < inst.n(); ++j) {
            put_f64(out, inst.H(i, j).real());
            put_f64(out, inst.H(i, j).imag());
        }
    for (int i = 0; i < inst.k(); ++i) {
        put_f64(out, inst.s(i).real());
        put_f64(out, inst.s(i).imag());
    }
}

ProblemInstance load_instance(const std::string& path, double rho, const Penalty& penalty,
                              const Support& support) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_instance: cannot open " + path);
    const auto n = get_u64(in);
    const auto k = get_u64(in);
    ProblemInstance inst;
    inst.rho = rho;
    inst.penalty = penalty;
    inst.support = support;
    inst.H.resize(Eigen::Index(k), Eigen::Index(n));
    for (std::uint64_t i = 0; i < k; ++i)
        for (std::uint64_t j = 0; j < n; ++j) {
            const double re = get_f64(in), im = get_f64(in);
            inst.H(Eigen::Index(i), Eigen::Index(j)) = cplx(re, im);
        }
    inst.s.resize(Eigen::Index(k));
    for (std::uint64_t i = 0; i < k; ++i) {
        const double re = get_f64(in), im = get_f64(in);
        inst.s(Eigen::Index(i)) = cplx(re, im);
    }
    if (!in) throw std::runtime_error("load_instance: truncated file " + path);
    return inst;
}

}  // namespace lseprec
