// Numeric primal/dual solver for the margin-constrained discrimination SDP.
//
// The dual reduces to a nested search: for fixed y, minimize the convex
// minimax f(beta) = max(|beta|, max_i(g_i + |beta - v_i|)) over 3-space,
// then minimize d(y) = f*(y) + y m over y >= 0. The primal side searches
// POVMs parametrized by three conclusive elements, with exact feasibility
// repair by uniform down-scaling. Optimality of either side is certified a
// posteriori by the duality gap, never by the optimizer.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "qsdm/bloch.hpp"
#include "qsdm/povm.hpp"
#include "qsdm/states.hpp"

namespace qsdm {

struct DualSearchResult {
    double y_star = 0.0;
    double alpha_star = 0.0;
    Vec3 beta_star;
    double d_star = 0.0;
    int inner_iterations = 0;
};

struct PrimalSearchResult {
    Povm povm;
    double p_success = 0.0;
    double p_error = 0.0;
    int restarts_used = 0;
};

struct VerificationReport {
    double povm_min_eig = 0.0;
    double completeness_residual = 0.0;
    std::array<double, 4> dual_slacks{};            // min eig of Y, Y-G1, Y-G2, Y-G3
    std::array<double, 5> attainability_residuals{};  // E_i(Y-G_i) i=1..3, E0 Y, |y (m - px)|
    double gap = 0.0;
    bool pass = false;
};

struct VerifyTolerances {
    double eigenvalue = 1e-9;
    double residual = 1e-8;
    double gap = 1e-7;

    static VerifyTolerances analytic_pair() { return {1e-9, 1e-8, 1e-7}; }
    static VerifyTolerances numeric_pair() { return {1e-9, 1e-5, 1e-5}; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

struct NmResult {
    std::vector<double> x;
    double fx = 0.0;
    int evals = 0;
};

// Standard Nelder-Mead with a shrinking-restart loop; good enough for the
// small convex problems here.
template <class F>
NmResult nelder_mead(F&& f, std::vector<double> x0, double step, int max_evals, double tol) {
    const std::size_t n = x0.size();
    NmResult best{x0, f(x0), 1};

    for (int round = 0; round < 6 && step > 1e-14; ++round, step *= 0.05) {
        const double round_start = best.fx;
        std::vector<std::vector<double>> simplex(n + 1, best.x);
        std::vector<double> fv(n + 1);
        fv[0] = best.fx;
        for (std::size_t i = 0; i < n; ++i) {
            simplex[i + 1][i] += step;
            fv[i + 1] = f(simplex[i + 1]);
        }
        best.evals += static_cast<int>(n);

        while (best.evals < max_evals) {
            // order
            std::array<std::size_t, 16> idx{};
            for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
            std::sort(idx.begin(), idx.begin() + static_cast<long>(n + 1),
                      [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            const std::size_t lo = idx[0], hi = idx[n], nh = idx[n - 1];
            if (fv[hi] - fv[lo] < tol) break;

            std::vector<double> centroid(n, 0.0);
            for (std::size_t i = 0; i <= n; ++i)
                if (i != hi)
                    for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

            auto blend = [&](double t) {
                std::vector<double> p(n);
                for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (centroid[k] - simplex[hi][k]);
                return p;
            };

            std::vector<double> xr = blend(1.0);
            double fr = f(xr);
            ++best.evals;
            if (fr < fv[lo]) {
                std::vector<double> xe = blend(2.0);
                double fe = f(xe);
                ++best.evals;
                if (fe < fr) { simplex[hi] = std::move(xe); fv[hi] = fe; }
                else { simplex[hi] = std::move(xr); fv[hi] = fr; }
            } else if (fr < fv[nh]) {
                simplex[hi] = std::move(xr);
                fv[hi] = fr;
            } else {
                std::vector<double> xc = blend(fr < fv[hi] ? 0.5 : -0.5);
                double fc = f(xc);
                ++best.evals;
                if (fc < std::min(fr, fv[hi])) {
                    simplex[hi] = std::move(xc);
                    fv[hi] = fc;
                } else {
                    for (std::size_t i = 0; i <= n; ++i) {
                        if (i == lo) continue;
                        for (std::size_t k = 0; k < n; ++k)
                            simplex[i][k] = simplex[lo][k] + 0.5 * (simplex[i][k] - simplex[lo][k]);
                        fv[i] = f(simplex[i]);
                    }
                    best.evals += static_cast<int>(n);
                }
            }
        }
        for (std::size_t i = 0; i <= n; ++i)
            if (fv[i] < best.fx) { best.fx = fv[i]; best.x = simplex[i]; }
        if (round > 0 && round_start - best.fx < tol) break;
    }
    return best;
}

struct InnerProblem {
    std::array<double, 3> g{};   // scalar parts of the shifted operators
    std::array<Vec3, 3> v{};     // vector parts

    double value(const Vec3& beta) const {
        double f = norm(beta);
        for (int i = 0; i < 3; ++i)
            f = std::max(f, g[static_cast<std::size_t>(i)] + norm(beta - v[static_cast<std::size_t>(i)]));
        return f;
    }
};

inline InnerProblem make_inner_problem(const Ensemble& ens, double y) {
    InnerProblem p;
    for (int i = 0; i < 3; ++i) {
        const BlochOperator gi = dual_shift_operator(ens, y, i);
        p.g[static_cast<std::size_t>(i)] = gi.scale;
        p.v[static_cast<std::size_t>(i)] = gi.vector;
    }
    return p;
}

inline std::pair<double, Vec3> solve_inner(const InnerProblem& prob, const std::vector<Vec3>& starts,
                                           int max_evals, int* eval_counter = nullptr) {
    auto f = [&](const std::vector<double>& x) { return prob.value({x[0], x[1], x[2]}); };
    double best_f = 0.0;
    Vec3 best_b;
    bool first = true;
    for (const Vec3& s : starts) {
        NmResult r = nelder_mead(f, {s.x, s.y, s.z}, 0.3, max_evals, 1e-14);
        if (eval_counter) *eval_counter += r.evals;
        if (first || r.fx < best_f) {
            best_f = r.fx;
            best_b = {r.x[0], r.x[1], r.x[2]};
            first = false;
        }
    }
    return {best_f, best_b};
}

inline std::vector<Vec3> default_inner_starts(const InnerProblem& prob) {
    const Vec3 centroid = (prob.v[0] + prob.v[1] + prob.v[2]) / 3.0;
    std::vector<Vec3> starts = {Vec3{}, prob.v[0], prob.v[1], prob.v[2], centroid};
    std::uint64_t s = 0x5eedULL;
    for (int k = 0; k < 4; ++k)
        starts.push_back(centroid + Vec3{uniform01(s) - 0.5, uniform01(s) - 0.5, uniform01(s) - 0.5} * 0.4);
    return starts;
}

}  // namespace detail

// Global minimizer of the fixed-y dual sub-problem; multi-start descent from
// the origin, the shifted-operator vectors, their centroid, and perturbations.
inline std::pair<double, Vec3> dual_inner(const Ensemble& ens, double y) {
    const detail::InnerProblem prob = detail::make_inner_problem(ens, y);
    return detail::solve_inner(prob, detail::default_inner_starts(prob), 4000);
}

// Outer minimization of d(y) = alpha*(y) + y m over y in [0, 10]: coarse grid
// pass (d is convex in y, the grid guards against warm-start drift), then
// golden-section refinement of the bracketing interval.
inline DualSearchResult minimize_dual(const Ensemble& ens, double m) {
    constexpr double kYMax = 10.0;
    constexpr double kGridStep = 1e-2;
    const int n = static_cast<int>(kYMax / kGridStep);

    DualSearchResult out;
    int evals = 0;

    Vec3 warm{};
    double best_d = 0.0;
    int best_k = 0;
    std::vector<Vec3> grid_beta(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const double y = k * kGridStep;
        const detail::InnerProblem prob = detail::make_inner_problem(ens, y);
        std::vector<Vec3> starts = {warm, Vec3{}};
        if (k == 0) starts = detail::default_inner_starts(prob);
        // coarse pass: bracketing only needs d(y) to grid resolution
        auto [alpha, beta] = detail::solve_inner(prob, starts, 320, &evals);
        warm = beta;
        grid_beta[static_cast<std::size_t>(k)] = beta;
        const double d = alpha + y * m;
        if (k == 0 || d < best_d) {
            best_d = d;
            best_k = k;
        }
    }

    double lo = std::max(0.0, (best_k - 1) * kGridStep);
    double hi = std::min(kYMax, (best_k + 1) * kGridStep);
    Vec3 hint = grid_beta[static_cast<std::size_t>(best_k)];
    auto eval = [&](double y) {
        const detail::InnerProblem prob = detail::make_inner_problem(ens, y);
        std::vector<Vec3> starts = {hint, Vec3{}, (prob.v[0] + prob.v[1] + prob.v[2]) / 3.0};
        auto [alpha, beta] = detail::solve_inner(prob, starts, 2500, &evals);
        hint = beta;
        return alpha + y * m;
    };

    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = eval(c1), f2 = eval(c2);
    while (b - a > 1e-10) {
        if (f1 < f2) {
            b = c2; c2 = c1; f2 = f1;
            c1 = b - gr * (b - a);
            f1 = eval(c1);
        } else {
            a = c1; c1 = c2; f1 = f2;
            c2 = a + gr * (b - a);
            f2 = eval(c2);
        }
    }

    const double y_star = 0.5 * (a + b);
    const detail::InnerProblem prob = detail::make_inner_problem(ens, y_star);
    std::vector<Vec3> starts = detail::default_inner_starts(prob);
    starts.push_back(hint);
    auto [alpha, beta] = detail::solve_inner(prob, starts, 6000, &evals);

    out.y_star = y_star;
    out.alpha_star = alpha;
    out.beta_star = beta;
    out.d_star = alpha + y_star * m;
    out.inner_iterations = evals;
    return out;
}

inline DualCertificate to_certificate(const DualSearchResult& r, double m) {
    DualCertificate c;
    c.y = r.y_star;
    c.Y = {r.alpha_star, r.beta_star};
    c.margin = m;
    c.bound = r.alpha_star + r.y_star * m;
    return c;
}

namespace detail {

// Parameter layout: (c_i, u_i) for i = 1..3, 12 doubles. Coefficients are
// clamped to >= 0 and directions to the unit ball; E0 follows from
// completeness. A uniform scale theta <= 1 then enforces E0 >= 0 and
// p_error <= m exactly, so every returned POVM is feasible.
inline Povm povm_from_params(const Ensemble& ens, double m, const std::vector<double>& p) {
    Povm out;
    BlochOperator sum;
    for (int i = 0; i < 3; ++i) {
        const std::size_t k = static_cast<std::size_t>(4 * i);
        double c = std::max(0.0, p[k]);
        Vec3 u{p[k + 1], p[k + 2], p[k + 3]};
        const double un = norm(u);
        if (un > 1.0) u = u / un;
        out.elements[static_cast<std::size_t>(i + 1)] = {c, c * u};
        sum.scale += c;
        sum.vector += c * u;
    }

    double theta = 1.0;
    const double lam_max = max_eigenvalue(sum);
    if (lam_max > 1.0) theta = std::min(theta, 1.0 / lam_max);
    out.elements[0] = {2.0, Vec3{}};  // placeholder, fixed below
    double pe = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (j != i)
                pe += ens.priors[static_cast<std::size_t>(j)] *
                      pair_trace(out.conclusive(i + 1), ens.states[static_cast<std::size_t>(j)]);
    if (pe > m && pe > 0.0) theta = std::min(theta, m / pe);

    for (int i = 1; i < 4; ++i) {
        out.elements[static_cast<std::size_t>(i)].scale *= theta;
        out.elements[static_cast<std::size_t>(i)].vector =
            theta * out.elements[static_cast<std::size_t>(i)].vector;
    }
    out.elements[0] = {2.0 - theta * sum.scale, -theta * sum.vector};
    return out;
}

// Start candidate derived from the dual solution via complementary
// slackness: each conclusive element points opposite to beta - v_i, and the
// coefficients solve the completeness system.
inline std::vector<double> slackness_guided_start(const Ensemble& ens, const DualSearchResult& dual) {
    std::array<Vec3, 4> dirs{};  // index 0 = inconclusive
    const double bn = norm(dual.beta_star);
    dirs[0] = bn > 1e-9 ? -(dual.beta_star / bn) : Vec3{};
    for (int i = 0; i < 3; ++i) {
        const BlochOperator gi = dual_shift_operator(ens, dual.y_star, i);
        const Vec3 w = dual.beta_star - gi.vector;
        const double wn = norm(w);
        dirs[static_cast<std::size_t>(i + 1)] = wn > 1e-9 ? -(w / wn) : Vec3{};
    }

    // Solve sum c_mu = 2, sum c_mu dirs_mu = 0 by Gaussian elimination.
    double aug[4][5] = {};
    for (int c = 0; c < 4; ++c) {
        aug[0][c] = 1.0;
        aug[1][c] = dirs[static_cast<std::size_t>(c)].x;
        aug[2][c] = dirs[static_cast<std::size_t>(c)].y;
        aug[3][c] = dirs[static_cast<std::size_t>(c)].z;
    }
    aug[0][4] = 2.0;
    bool singular = false;
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
        if (std::abs(aug[piv][col]) < 1e-10) { singular = true; break; }
        std::swap(aug[col], aug[piv]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double fac = aug[r][col] / aug[col][col];
            for (int c = col; c < 5; ++c) aug[r][c] -= fac * aug[col][c];
        }
    }

    std::array<double, 4> coeff{0.5, 0.5, 0.5, 0.5};
    if (!singular)
        for (int i = 0; i < 4; ++i) coeff[static_cast<std::size_t>(i)] = aug[i][4] / aug[i][i];

    std::vector<double> p(12);
    for (int i = 0; i < 3; ++i) {
        const std::size_t k = static_cast<std::size_t>(4 * i);
        p[k] = std::max(0.0, coeff[static_cast<std::size_t>(i + 1)]);
        p[k + 1] = dirs[static_cast<std::size_t>(i + 1)].x;
        p[k + 2] = dirs[static_cast<std::size_t>(i + 1)].y;
        p[k + 3] = dirs[static_cast<std::size_t>(i + 1)].z;
    }
    return p;
}

}  // namespace detail

inline PrimalSearchResult primal_search(const Ensemble& ens, double m, std::uint64_t seed = 0) {
    const DualSearchResult dual = minimize_dual(ens, m);

    auto objective = [&](const std::vector<double>& p) {
        return -success_probability(ens, detail::povm_from_params(ens, m, p));
    };

    std::vector<std::vector<double>> starts;
    starts.push_back(detail::slackness_guided_start(ens, dual));
    {
        // symmetric heuristic: each element aimed at its own state
        std::vector<double> p(12);
        for (int i = 0; i < 3; ++i) {
            const std::size_t k = static_cast<std::size_t>(4 * i);
            const Vec3& ni = ens.states[static_cast<std::size_t>(i)].vector;
            const double nn = norm(ni);
            const Vec3 u = nn > 1e-12 ? ni / nn : Vec3{};
            p[k] = 2.0 / 3.0;
            p[k + 1] = u.x;
            p[k + 2] = u.y;
            p[k + 3] = u.z;
        }
        starts.push_back(p);
    }
    std::uint64_t rng = seed * 0x9e3779b97f4a7c15ULL + 0xabcdULL;
    while (starts.size() < 16) {
        std::vector<double> p(12);
        for (int i = 0; i < 3; ++i) {
            const std::size_t k = static_cast<std::size_t>(4 * i);
            p[k] = detail::uniform01(rng);
            p[k + 1] = 2.0 * detail::uniform01(rng) - 1.0;
            p[k + 2] = 2.0 * detail::uniform01(rng) - 1.0;
            p[k + 3] = 2.0 * detail::uniform01(rng) - 1.0;
        }
        starts.push_back(p);
    }

    PrimalSearchResult out;
    double best = 1.0;  // objective is negated success
    std::vector<double> best_p = starts.front();
    for (const auto& s : starts) {
        detail::NmResult r = detail::nelder_mead(objective, s, 0.2, 6000, 1e-14);
        if (r.fx < best) {
            best = r.fx;
            best_p = r.x;
        }
        ++out.restarts_used;
    }

    out.povm = detail::povm_from_params(ens, m, best_p);
    out.p_success = success_probability(ens, out.povm);
    out.p_error = error_probability(ens, out.povm);
    return out;
}

// Full feasibility + attainability check of a primal/dual pair. Failures are
// reported, never thrown.
inline VerificationReport verify(const Ensemble& ens, double m, const Povm& povm,
                                 const DualCertificate& cert,
                                 const VerifyTolerances& tol = VerifyTolerances::analytic_pair()) {
    VerificationReport rep;
    rep.povm_min_eig = povm_min_eigenvalue(povm);
    rep.completeness_residual = completeness_residual(povm);

    rep.dual_slacks[0] = min_eigenvalue(cert.Y);
    std::array<BlochOperator, 3> slack_ops{};
    for (int i = 0; i < 3; ++i) {
        const BlochOperator gi = dual_shift_operator(ens, cert.y, i);
        slack_ops[static_cast<std::size_t>(i)] = {cert.Y.scale - gi.scale, cert.Y.vector - gi.vector};
        rep.dual_slacks[static_cast<std::size_t>(i + 1)] =
            min_eigenvalue(slack_ops[static_cast<std::size_t>(i)]);
    }

    for (int i = 0; i < 3; ++i)
        rep.attainability_residuals[static_cast<std::size_t>(i)] =
            product_residual_norm(povm.conclusive(i + 1), slack_ops[static_cast<std::size_t>(i)]);
    rep.attainability_residuals[3] = product_residual_norm(povm.inconclusive(), cert.Y);
    const double pe = error_probability(ens, povm);
    rep.attainability_residuals[4] = std::abs(cert.y * (m - pe));

    const double d = cert.Y.scale + cert.y * m;
    rep.gap = d - success_probability(ens, povm);

    rep.pass = rep.povm_min_eig >= -tol.eigenvalue && rep.completeness_residual <= tol.residual &&
               cert.y >= -tol.eigenvalue && pe <= m + tol.eigenvalue;
    for (double s : rep.dual_slacks) rep.pass = rep.pass && s >= -tol.eigenvalue;
    for (double r : rep.attainability_residuals) rep.pass = rep.pass && r <= tol.residual;
    rep.pass = rep.pass && rep.gap <= tol.gap && rep.gap >= -tol.gap;
    return rep;
}

}  // namespace qsdm
