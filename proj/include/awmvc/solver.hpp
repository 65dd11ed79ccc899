#pragma once

#include "awmvc/common.hpp"
#include "awmvc/dataset.hpp"
#include "awmvc/procrustes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace awmvc {

enum class Variant {
    Full,       ///< m embeddings of dims k..mk, auto-weighted
    FixedDim,   ///< single embedding of dimension k
    EqualAlpha  ///< alpha frozen at 1/m
};

/// How the reconstruction weights are recomputed from residual norms r_p.
enum class Init { Spectral, Random };

inline const char* to_string(Init i) { return i == Init::Spectral ? "spectral" : "random"; }

enum class AlphaRule {
    Paper,  ///< alpha_p ∝ 1 / r_p
    Kkt     ///< alpha_p ∝ 1 / r_p², exact minimizer of Σ alpha_p² r_p² on the simplex
};

inline std::string to_string(Variant v)
{
    switch (v) {
    case Variant::Full: return "full";
    case Variant::FixedDim: return "fixed-dim";
    case Variant::EqualAlpha: return "equal-alpha";
    }
    return "?";
}

inline std::string to_string(AlphaRule r) { return r == AlphaRule::Paper ? "paper" : "kkt"; }

struct SolverConfig {
    int k = 2;
    int m = 3;
    std::vector<Index> dims;  ///< empty means k, 2k, ..., mk
    int max_iter = 50;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    Variant variant = Variant::Full;
    AlphaRule alpha_rule = AlphaRule::Paper;
    Init init = Init::Spectral;
    double residual_eps = 1e-12;

    /// Applies variant overrides and defaults, then checks against n samples.
    SolverConfig resolved(Index n) const
    {
        SolverConfig c = *this;
        if (c.k < 1) throw ValidationError("cluster count k must be positive");
        if (c.variant == Variant::FixedDim) {
            c.m = 1;
            c.dims = {c.k};
        }
        if (c.m < 1) throw ValidationError("embedding count m must be positive");
        if (c.dims.empty())
            for (int p = 1; p <= c.m; ++p) c.dims.push_back(Index(p) * c.k);
        if (static_cast<int>(c.dims.size()) != c.m)
            throw ValidationError("dims lists " + std::to_string(c.dims.size()) + " entries for m = " +
                                  std::to_string(c.m));
        if (c.k > n)
            throw ValidationError("k = " + std::to_string(c.k) + " exceeds n = " + std::to_string(n));
        for (Index d : c.dims)
            if (d < c.k || d > n)
                throw ValidationError("embedding dimension " + std::to_string(d) + " must lie in [k, n] = [" +
                                      std::to_string(c.k) + ", " + std::to_string(n) + "]");
        if (c.max_iter < 1) throw ValidationError("max_iter must be positive");
        if (!(c.tol > 0.0)) throw ValidationError("tol must be positive");
        return c;
    }
};

/// All optimization variables. H[p][v] is d_v × d_p, Z[p] is d_p × n,
/// W[p] is d_p × k, M is k × n. H and M stay empty until the first sweep.
struct SolverState {
    std::vector<std::vector<Matrix>> H;
    std::vector<Matrix> Z;
    std::vector<Matrix> W;
    Matrix M;
    Vector alpha;
    Vector beta;

    std::size_t m() const { return Z.size(); }
};

enum class Step { H, M, W, Z, Alpha, Beta };

inline const char* step_name(Step s)
{
    switch (s) {
    case Step::H: return "H";
    case Step::M: return "M";
    case Step::W: return "W";
    case Step::Z: return "Z";
    case Step::Alpha: return "alpha";
    case Step::Beta: return "beta";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Individual block updates
// ---------------------------------------------------------------------------

/// H_p^(v) = X^(v) Z_pᵀ, the unconstrained least-squares minimizer given Z_p.
inline void update_H(SolverState& s, const MultiViewDataset& ds)
{
    s.H.resize(s.m());
    parallel_for(s.m(), [&](std::size_t p) {
        s.H[p].resize(ds.num_views());
        for (std::size_t v = 0; v < ds.num_views(); ++v) s.H[p][v].noalias() = ds.views[v].data * s.Z[p].transpose();
    });
}

/// M = argmax trace(M A), A = Σ_p beta_p Z_pᵀ W_p. Returns true when A is
/// rank-deficient, i.e. the maximizer is not unique (e.g. beta = 0).
inline bool update_M(SolverState& s)
{
    const Index n = s.Z.front().cols();
    const Index k = s.W.front().cols();
    Matrix a = Matrix::Zero(n, k);
    for (std::size_t p = 0; p < s.m(); ++p) a.noalias() += s.beta(Index(p)) * (s.Z[p].transpose() * s.W[p]);
    auto sol = procrustes_solve(a);
    s.M = std::move(sol.q);
    return sol.rank < k;
}

/// W_p = argmax trace(W_pᵀ Z_p Mᵀ) over orthonormal columns.
inline void update_W(SolverState& s)
{
    parallel_for(s.m(), [&](std::size_t p) {
        const Matrix g = s.Z[p] * s.M.transpose();
        s.W[p] = procrustes_max_trace_rows(g).transpose();
    });
}

/// Z_p = argmax trace(Z_p B_p) with B_p = alpha_p² Σ_v X^(v)ᵀ H_p^(v) + beta_p Mᵀ W_pᵀ.
inline void update_Z(SolverState& s, const MultiViewDataset& ds)
{
    parallel_for(s.m(), [&](std::size_t p) {
        const double a2 = s.alpha(Index(p)) * s.alpha(Index(p));
        Matrix b = s.beta(Index(p)) * (s.M.transpose() * s.W[p].transpose());
        for (std::size_t v = 0; v < ds.num_views(); ++v)
            b.noalias() += a2 * (ds.views[v].data.transpose() * s.H[p][v]);
        s.Z[p] = procrustes_max_trace_rows(b);
    });
}

/// r_p² = Σ_v ‖X^(v) − H_p^(v) Z_p‖²_F for every embedding p.
inline Vector reconstruction_residuals(const SolverState& s, const MultiViewDataset& ds)
{
    Vector r2(Index(s.m()));
    parallel_for(s.m(), [&](std::size_t p) {
        double acc = 0.0;
        for (std::size_t v = 0; v < ds.num_views(); ++v)
            acc += (ds.views[v].data - s.H[p][v] * s.Z[p]).squaredNorm();
        r2(Index(p)) = acc;
    });
    return r2;
}

/// Simplex weights from residual norms r (not squared). Residuals at or
/// below eps share the whole mass uniformly, the limit of either rule.
inline Vector alpha_weights(const Vector& r, AlphaRule rule, double eps = 1e-12)
{
    const Index m = r.size();
    Vector alpha = Vector::Zero(m);
    Index zeros = 0;
    for (Index p = 0; p < m; ++p)
        if (r(p) <= eps) ++zeros;
    if (zeros > 0) {
        for (Index p = 0; p < m; ++p)
            if (r(p) <= eps) alpha(p) = 1.0 / double(zeros);
        return alpha;
    }
    for (Index p = 0; p < m; ++p) alpha(p) = rule == AlphaRule::Paper ? 1.0 / r(p) : 1.0 / (r(p) * r(p));
    return alpha / alpha.sum();
}

inline void update_alpha(SolverState& s, const MultiViewDataset& ds, AlphaRule rule = AlphaRule::Paper,
                         double eps = 1e-12)
{
    s.alpha = alpha_weights(reconstruction_residuals(s, ds).cwiseSqrt(), rule, eps);
}

/// theta_p = trace(Z_pᵀ W_p M), evaluated as Σ (Z_p Mᵀ) ∘ W_p.
inline Vector alignment_traces(const SolverState& s)
{
    Vector theta(Index(s.m()));
    for (std::size_t p = 0; p < s.m(); ++p)
        theta(Index(p)) = (s.Z[p] * s.M.transpose()).cwiseProduct(s.W[p]).sum();
    return theta;
}

/// Maximizer of Σ beta_p theta_p on the nonnegative unit sphere.
inline Vector beta_weights(const Vector& theta)
{
    const Vector pos = theta.cwiseMax(0.0);
    const double norm = pos.norm();
    if (norm == 0.0) return Vector::Constant(theta.size(), 1.0 / std::sqrt(double(theta.size())));
    return pos / norm;
}

inline void update_beta(SolverState& s) { s.beta = beta_weights(alignment_traces(s)); }

/// Σ_p Σ_v ½ alpha_p² ‖X^(v) − H_p^(v) Z_p‖²_F − Σ_p beta_p trace(Z_pᵀ W_p M).
inline double objective(const SolverState& s, const MultiViewDataset& ds)
{
    const Vector r2 = reconstruction_residuals(s, ds);
    const Vector theta = alignment_traces(s);
    return 0.5 * s.alpha.cwiseAbs2().dot(r2) - s.beta.dot(theta);
}

/// −Σ_p k √d_p; no feasible state can go below it.
inline double objective_lower_bound(int k, const std::vector<Index>& dims)
{
    double b = 0.0;
    for (Index d : dims) b -= double(k) * std::sqrt(double(d));
    return b;
}

/// Largest Frobenius deviation from identity among ZZᵀ, WᵀW and (if set) MMᵀ.
inline double constraint_violation(const SolverState& s)
{
    double worst = 0.0;
    for (const auto& z : s.Z)
        worst = std::max(worst, (z * z.transpose() - Matrix::Identity(z.rows(), z.rows())).norm());
    for (const auto& w : s.W)
        worst = std::max(worst, (w.transpose() * w - Matrix::Identity(w.cols(), w.cols())).norm());
    if (s.M.size())
        worst = std::max(worst, (s.M * s.M.transpose() - Matrix::Identity(s.M.rows(), s.M.rows())).norm());
    return worst;
}

// ---------------------------------------------------------------------------
// Initialization and the alternating loop
// ---------------------------------------------------------------------------

/// Starting Z and W. Spectral init puts the rows of every Z_p on the leading
/// right singular subspace of the stacked views (padded with Gaussian
/// directions when d_p exceeds its rank); Random draws Gaussian matrices.
/// Both orthonormalize by QR.
inline SolverState init_state(const SolverConfig& cfg, const MultiViewDataset& ds, std::mt19937_64& rng)
{
    const SolverConfig c = cfg.resolved(ds.n());
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&](Index rows, Index cols) {
        Matrix g(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) g(i, j) = gauss(rng);
        return g;
    };

    Matrix leading;  // n × r, orthonormal columns
    if (c.init == Init::Spectral) {
        Index total = 0;
        for (const auto& v : ds.views) total += v.dim();
        Matrix stacked(ds.n(), total);
        Index at = 0;
        for (const auto& v : ds.views) {
            stacked.middleCols(at, v.dim()) = v.data.transpose();
            at += v.dim();
        }
        Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
        const auto& sv = svd.singularValues();
        Index rank = 0;
        while (rank < sv.size() && sv(rank) > sv(0) * 1e-10 * double(ds.n())) ++rank;
        leading = svd.matrixU().leftCols(rank);
    }

    SolverState s;
    for (Index d : c.dims) {
        Matrix basis = draw(ds.n(), d);
        const Index r = std::min(d, Index(leading.cols()));
        basis.leftCols(r) = leading.leftCols(r);
        s.Z.push_back(orthonormal_columns(basis).transpose());
        s.W.push_back(orthonormal_columns(draw(d, c.k)));
    }
    s.alpha = Vector::Constant(c.m, 1.0 / c.m);
    s.beta = Vector::Constant(c.m, 1.0 / std::sqrt(double(c.m)));
    return s;
}

struct FitReport {
    std::vector<double> objective_trace;
    std::vector<Vector> alpha_trace;  ///< alpha after each sweep
    std::vector<Vector> beta_trace;   ///< beta after each sweep
    Vector alpha_final;
    Vector beta_final;
    int iterations = 0;
    bool converged = false;
    std::map<std::string, double> per_step_seconds;
    double total_seconds = 0.0;
    Matrix M;
    double lower_bound = 0.0;
    int degenerate_m_steps = 0;       ///< sweeps where the M subproblem had no unique maximizer
    int monotonicity_violations = 0;  ///< sweeps whose objective rose by more than 1e-8
    SolverConfig config;              ///< resolved configuration actually run
};

struct FitCallbacks {
    /// Invoked after every individual block update.
    std::function<void(Step, const SolverState&)> on_step;
    /// Invoked after each full sweep with its 1-based index and objective.
    std::function<void(int, const SolverState&, double)> on_iteration;
};

struct FitResult {
    SolverState state;
    FitReport report;
};

inline FitResult fit(const SolverConfig& cfg, const MultiViewDataset& ds, const FitCallbacks& callbacks = {})
{
    using clock = std::chrono::steady_clock;
    ds.validate();
    const SolverConfig c = cfg.resolved(ds.n());

    FitResult out;
    FitReport& rep = out.report;
    rep.config = c;
    rep.lower_bound = objective_lower_bound(c.k, c.dims);
    for (const char* name : {"init", "H", "M", "W", "Z", "alpha", "beta", "objective"}) rep.per_step_seconds[name] = 0.0;

    const auto t_start = clock::now();
    auto timed = [&](const char* name, auto&& fn) {
        const auto t0 = clock::now();
        fn();
        rep.per_step_seconds[name] += std::chrono::duration<double>(clock::now() - t0).count();
    };
    auto notify = [&](Step st) {
        if (callbacks.on_step) callbacks.on_step(st, out.state);
    };

    std::mt19937_64 rng(c.seed);
    timed("init", [&] { out.state = init_state(c, ds, rng); });
    SolverState& s = out.state;

    for (int iter = 1; iter <= c.max_iter; ++iter) {
        timed("H", [&] { update_H(s, ds); });
        notify(Step::H);
        timed("M", [&] {
            if (update_M(s)) ++rep.degenerate_m_steps;
        });
        notify(Step::M);
        timed("W", [&] { update_W(s); });
        notify(Step::W);
        timed("Z", [&] { update_Z(s, ds); });
        notify(Step::Z);

        // Residuals and alignments at the post-update point are shared by the
        // weight updates and the objective.
        Vector r2;
        timed("alpha", [&] {
            r2 = reconstruction_residuals(s, ds);
            if (c.variant != Variant::EqualAlpha) s.alpha = alpha_weights(r2.cwiseSqrt(), c.alpha_rule, c.residual_eps);
        });
        notify(Step::Alpha);
        Vector theta;
        timed("beta", [&] {
            theta = alignment_traces(s);
            s.beta = beta_weights(theta);
        });
        notify(Step::Beta);

        double obj = 0.0;
        timed("objective", [&] { obj = 0.5 * s.alpha.cwiseAbs2().dot(r2) - s.beta.dot(theta); });
        if (!std::isfinite(obj))
            throw NumericError("objective became non-finite at iteration " + std::to_string(iter));

        if (!rep.objective_trace.empty() && obj > rep.objective_trace.back() + 1e-8) ++rep.monotonicity_violations;
        rep.objective_trace.push_back(obj);
        rep.alpha_trace.push_back(s.alpha);
        rep.beta_trace.push_back(s.beta);
        rep.iterations = iter;
        if (callbacks.on_iteration) callbacks.on_iteration(iter, s, obj);

        if (rep.objective_trace.size() >= 2) {
            const double prev = rep.objective_trace[rep.objective_trace.size() - 2];
            if (std::abs(prev - obj) <= c.tol * (1.0 + std::abs(obj))) {
                rep.converged = true;
                break;
            }
        }
    }

    rep.alpha_final = s.alpha;
    rep.beta_final = s.beta;
    rep.M = s.M;
    rep.total_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    return out;
}

} // namespace awmvc
