// Closed-form optimal discrimination with an error margin for the symmetric
// qubit family: domain classification, maximum success probability (pure and
// mixed), optimal POVM (pure) and the matching dual certificate.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "qsdm/bloch.hpp"
#include "qsdm/oracle.hpp"
#include "qsdm/povm.hpp"
#include "qsdm/states.hpp"

namespace qsdm {

enum class Domain { MinimumError, Intermediate, Linear };

inline const char* domain_label(Domain d) {
    switch (d) {
        case Domain::MinimumError: return "minimum_error";
        case Domain::Intermediate: return "intermediate";
        case Domain::Linear: return "linear";
    }
    return "?";
}

struct CriticalMargins {
    double m_lower = 0.0;  // linear/intermediate boundary
    double m_upper = 0.0;  // intermediate/minimum-error boundary
};

struct Solution {
    Domain domain = Domain::MinimumError;
    double p_success = 0.0;
    double p_error = 0.0;
    double p_inconclusive = 0.0;
    Povm povm;
    DualCertificate certificate;
    double gap = 0.0;
    bool povm_is_numeric = false;
};

namespace detail {

inline double safe_sqrt(double x) { return std::sqrt(std::max(0.0, x)); }

// A = (1/2)(1 - sqrt((r + 2 gamma)/3)); zero for identical states.
inline double margin_constant(double r, double gamma) {
    return 0.5 * (1.0 - safe_sqrt((r + 2.0 * gamma) / 3.0));
}

inline void check_margin(double m) {
    if (!(m >= 0.0 && m <= 1.0))
        throw std::invalid_argument("error margin m must lie in [0, 1]");
}

}  // namespace detail

inline CriticalMargins critical_margins(double r, double gamma) {
    check_family_parameters(r, gamma);
    const double s = 1.0 - r;
    const double t = 1.0 - gamma;
    const double A = detail::margin_constant(r, gamma);
    CriticalMargins cm;
    cm.m_upper = (2.0 - detail::safe_sqrt(2.0 * (t - s) / 3.0)) / 3.0;
    const double ratio = (s + 2.0 * t) > 1e-15 ? 2.0 * (t - s) / (s + 2.0 * t) : 1.0;
    cm.m_lower = (2.0 / 3.0) * (2.0 - detail::safe_sqrt(ratio)) * A;
    return cm;
}

// Boundary determinism: a margin exactly at a critical value takes the tag of
// the lower-m domain (the branch values agree there).
inline Domain classify_margin(double r, double gamma, double m) {
    const CriticalMargins cm = critical_margins(r, gamma);
    if (m <= cm.m_lower) return Domain::Linear;
    if (m <= cm.m_upper) return Domain::Intermediate;
    return Domain::MinimumError;
}

inline std::pair<double, Domain> max_success(double r, double gamma, double m) {
    check_family_parameters(r, gamma);
    detail::check_margin(m);
    const double s = 1.0 - r;
    const double t = 1.0 - gamma;
    const double A = detail::margin_constant(r, gamma);
    const Domain dom = classify_margin(r, gamma, m);
    double p = 0.0;
    switch (dom) {
        case Domain::MinimumError:
            p = (1.0 + detail::safe_sqrt(2.0 * (t - s) / 3.0)) / 3.0;
            break;
        case Domain::Intermediate: {
            p = 0.5 * m;
            if (A > 0.0 && (s + 2.0 * t) > 1e-15)
                p += (A * (t - s) +
                      detail::safe_sqrt(3.0 * A * (t - s) * (m * (s + 2.0 * t) - A * (s + t)))) /
                     (s + 2.0 * t);
            break;
        }
        case Domain::Linear:
            if (m > 0.0)
                p = (t + detail::safe_sqrt(0.5 * (t - s) * (s + 2.0 * t))) / (s + t) * m;
            break;
    }
    return {p, dom};
}

// Pure-case (r = 1) dual certificate. The embedding only enters through the
// Bloch-vector sum, taken from `f` so that rotated families certify too.
inline DualCertificate dual_certificate(double gamma, double m, const SymmetricFamily& f) {
    check_family_parameters(1.0, gamma);
    detail::check_margin(m);
    const Vec3 nsum = f.bloch_vectors[0] + f.bloch_vectors[1] + f.bloch_vectors[2];
    const double A = detail::margin_constant(1.0, gamma);
    DualCertificate cert;
    cert.margin = m;
    switch (classify_margin(1.0, gamma, m)) {
        case Domain::MinimumError:
            cert.y = 0.0;
            cert.Y = {(1.0 + detail::safe_sqrt(2.0 * (1.0 - gamma) / 3.0)) / 3.0, nsum / 9.0};
            break;
        case Domain::Intermediate: {
            if (A <= 0.0) {
                // identical states: the root collapses to y = 1/2 and Y = 0
                cert.y = 0.5;
                cert.Y = {0.0, Vec3{}};
                break;
            }
            const double ye = 0.5 * (1.0 + detail::safe_sqrt(3.0 * A / (2.0 * m - A)));
            const double q = (ye - 2.0) * ye / (1.0 - 2.0 * ye);
            cert.y = ye;
            // negative branch of the double sign
            const double beta_coef = 0.5 * (1.0 - std::sqrt(3.0 / (1.0 + 2.0 * gamma))) * q;
            cert.Y = {0.5 * (1.0 - detail::safe_sqrt((1.0 + 2.0 * gamma) / 3.0)) * q,
                      beta_coef * (nsum / 3.0)};
            break;
        }
        case Domain::Linear:
            cert.y = 2.0;
            cert.Y = {0.0, Vec3{}};
            break;
    }
    cert.bound = cert.Y.scale + cert.y * m;
    return cert;
}

inline DualCertificate dual_certificate(double gamma, double m) {
    return dual_certificate(gamma, m, build_family(1.0, gamma));
}

namespace detail {

inline Vec3 unit_or_zero(const Vec3& v) {
    const double n = norm(v);
    return n > 1e-12 ? v / n : Vec3{};
}

}  // namespace detail

// Pure-case (r = 1) optimal POVM. Degenerate families (identical states,
// where the kernel directions collapse) fall back to the symmetric POVM that
// satisfies the same attainability conditions.
inline Povm optimal_povm(double gamma, double m, const SymmetricFamily& f) {
    if (std::abs(f.purity - 1.0) > 1e-12)
        throw std::invalid_argument("optimal_povm: closed form requires pure states (r = 1)");
    detail::check_margin(m);
    const auto& n = f.bloch_vectors;
    const Vec3 nsum = n[0] + n[1] + n[2];
    const double A = detail::margin_constant(1.0, gamma);

    Povm povm;
    switch (classify_margin(1.0, gamma, m)) {
        case Domain::MinimumError: {
            const Vec3 beta = nsum / 9.0;
            povm.elements[0] = {0.0, Vec3{}};
            for (int i = 0; i < 3; ++i) {
                const Vec3 w = beta - n[static_cast<std::size_t>(i)] / 3.0;
                if (norm(w) > 1e-12) {
                    const Vec3 e = w / norm(w);
                    povm.elements[static_cast<std::size_t>(i + 1)] = {2.0 / 3.0, (-2.0 / 3.0) * e};
                } else {
                    // identical states: Y - G_i vanishes, any completion works
                    povm.elements[static_cast<std::size_t>(i + 1)] = {2.0 / 3.0, Vec3{}};
                }
            }
            break;
        }
        case Domain::Intermediate: {
            if (A <= 0.0) {
                // identical states: y = 1/2 makes every dual slack vanish;
                // aim each element at the common state and saturate p_x = m.
                BlochOperator sum;
                for (int i = 0; i < 3; ++i) {
                    povm.elements[static_cast<std::size_t>(i + 1)] = {0.5 * m,
                                                                      0.5 * m * n[static_cast<std::size_t>(i)]};
                    sum.scale += 0.5 * m;
                    sum.vector += 0.5 * m * n[static_cast<std::size_t>(i)];
                }
                povm.elements[0] = {2.0 - sum.scale, -sum.vector};
                break;
            }
            const DualCertificate cert = dual_certificate(gamma, m, f);
            const double ye = cert.y;
            const Vec3 beta = cert.Y.vector;
            const double C =
                A / (1.0 - gamma) *
                (2.0 + 3.0 * (m - A) + detail::safe_sqrt(3.0 * A * (2.0 * m - A)));
            const double C0 = 2.0 - 3.0 * C;
            const Vec3 e0 = -detail::unit_or_zero(beta);
            povm.elements[0] = {C0, C0 * e0};
            for (int i = 0; i < 3; ++i) {
                const Vec3 ai = (n[static_cast<std::size_t>(i)] -
                                 ye * (n[static_cast<std::size_t>((i + 1) % 3)] +
                                       n[static_cast<std::size_t>((i + 2) % 3)])) /
                                3.0;
                const Vec3 e = -detail::unit_or_zero(beta - ai);
                povm.elements[static_cast<std::size_t>(i + 1)] = {C, C * e};
            }
            break;
        }
        case Domain::Linear: {
            if (m <= 0.0) {
                povm.elements[0] = {2.0, Vec3{}};
                break;
            }
            const double C = 3.0 * m / (1.0 - gamma);
            BlochOperator sum;
            for (int i = 0; i < 3; ++i) {
                // a_i at y = 2; unit length for pure states
                const Vec3 ai = (n[static_cast<std::size_t>(i)] -
                                 2.0 * (n[static_cast<std::size_t>((i + 1) % 3)] +
                                        n[static_cast<std::size_t>((i + 2) % 3)])) /
                                3.0;
                povm.elements[static_cast<std::size_t>(i + 1)] = {C, C * ai};
                sum.scale += C;
                sum.vector += C * ai;
            }
            povm.elements[0] = {2.0 - sum.scale, -sum.vector};
            break;
        }
    }
    return povm;
}

// Full solution. Pure families get the closed-form POVM and certificate; for
// r < 1 the paper supplies only the value formulas, so the POVM comes from
// the numeric primal search and is flagged as such.
inline Solution solve(double r, double gamma, double m, std::uint64_t seed = 0) {
    check_family_parameters(r, gamma);
    detail::check_margin(m);
    Solution sol;
    auto [p, dom] = max_success(r, gamma, m);
    sol.domain = dom;
    sol.p_success = p;

    const SymmetricFamily f = build_family(r, gamma);
    const Ensemble ens = to_ensemble(f);
    if (std::abs(r - 1.0) <= 1e-12) {
        sol.povm = optimal_povm(gamma, m, f);
        sol.certificate = dual_certificate(gamma, m, f);
        sol.povm_is_numeric = false;
    } else {
        PrimalSearchResult ps = primal_search(ens, m, seed);
        sol.povm = ps.povm;
        sol.certificate = to_certificate(minimize_dual(ens, m), m);
        sol.povm_is_numeric = true;
    }
    sol.p_error = error_probability(ens, sol.povm);
    sol.p_inconclusive = 1.0 - sol.p_success - sol.p_error;
    sol.gap = sol.certificate.bound - sol.p_success;
    return sol;
}

}  // namespace qsdm
