#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qsdm/analytic.hpp"

using namespace qsdm;

namespace {

// Pure-case formulas re-evaluated independently of the implementation.
double pure_A(double g) { return 0.5 * (1.0 - std::sqrt((1.0 + 2.0 * g) / 3.0)); }
double pure_mc(double g) { return (2.0 - std::sqrt(2.0 * (1.0 - g) / 3.0)) / 3.0; }
double pure_mpc(double g) { return (1.0 - std::sqrt((1.0 + 2.0 * g) / 3.0)) / 3.0; }

double pure_pmax(double g, double m) {
    const double A = pure_A(g);
    if (m <= pure_mpc(g)) return 2.0 * m;
    if (m <= pure_mc(g)) return 0.5 * (m + A + std::sqrt(3.0 * A * (2.0 * m - A)));
    return (1.0 + std::sqrt(2.0 * (1.0 - g) / 3.0)) / 3.0;
}

// trace Y along the equality-constrained intermediate family, as a function
// of the dual parameter y.
double trace_Y_of_y(double g, double y) {
    return 0.5 * (1.0 - std::sqrt((1.0 + 2.0 * g) / 3.0)) * (y - 2.0) * y / (1.0 - 2.0 * y);
}

SymmetricFamily rotate_family(const SymmetricFamily& f, const Vec3& axis_in, double angle) {
    const Vec3 axis = axis_in / norm(axis_in);
    const double c = std::cos(angle), s = std::sin(angle);
    SymmetricFamily out = f;
    for (auto& v : out.bloch_vectors)
        v = c * v + s * cross(axis, v) + (1.0 - c) * dot(axis, v) * axis;
    return out;
}

int rank_of(const BlochOperator& e) {
    int r = 0;
    if (min_eigenvalue(e) > 1e-9) ++r;
    if (max_eigenvalue(e) > 1e-9) ++r;
    return r;
}

}  // namespace

TEST_CASE("critical margins") {
    const CriticalMargins cm = critical_margins(1.0, 0.0);
    CHECK(cm.m_upper == Catch::Approx(0.3945010).margin(1e-7));
    CHECK(cm.m_lower == Catch::Approx(0.1408830).margin(1e-7));
    CHECK(cm.m_upper == Catch::Approx(pure_mc(0.0)).margin(1e-12));
    CHECK(cm.m_lower == Catch::Approx(pure_mpc(0.0)).margin(1e-12));

    const CriticalMargins trine = critical_margins(1.0, -0.5);
    CHECK(trine.m_upper == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(trine.m_lower == Catch::Approx(1.0 / 3.0).margin(1e-12));

    const CriticalMargins ident = critical_margins(1.0, 1.0);
    CHECK(ident.m_upper == Catch::Approx(2.0 / 3.0).margin(1e-12));
    CHECK(ident.m_lower == Catch::Approx(0.0).margin(1e-12));

    CHECK_THROWS_AS(critical_margins(1.0, 2.0), std::invalid_argument);
}

TEST_CASE("max_success branch values") {
    auto [p1, d1] = max_success(1.0, 0.0, 1.0);
    CHECK(d1 == Domain::MinimumError);
    CHECK(p1 == Catch::Approx(0.6054991).margin(1e-7));

    auto [p2, d2] = max_success(1.0, 0.0, 0.10);
    CHECK(d2 == Domain::Linear);
    CHECK(p2 == Catch::Approx(0.20).margin(1e-12));

    auto [p3, d3] = max_success(1.0, 0.0, 0.25);
    CHECK(d3 == Domain::Intermediate);
    CHECK(p3 == Catch::Approx(0.4445624).margin(1e-7));

    auto [p4, d4] = max_success(0.0, 0.0, 0.4);
    CHECK(d4 == Domain::Linear);
    CHECK(p4 == Catch::Approx(0.20).margin(1e-12));
}

TEST_CASE("branch continuity at critical margins") {
    for (int gi = 0; gi <= 15; ++gi) {
        const double g = -0.5 + 1.5 * gi / 15.0;
        for (double r : {0.3, 0.6, 0.85, 1.0}) {
            const double gamma = std::clamp(g, -r / 2.0, r);
            const CriticalMargins cm = critical_margins(r, gamma);
            const double eps = 1e-9;
            if (cm.m_lower > eps) {
                const double below = max_success(r, gamma, cm.m_lower - eps).first;
                const double above = max_success(r, gamma, cm.m_lower + eps).first;
                CHECK(std::abs(below - above) < 1e-7);
            }
            if (cm.m_upper > cm.m_lower + eps && cm.m_upper < 1.0 - eps) {
                const double below = max_success(r, gamma, cm.m_upper - eps).first;
                const double above = max_success(r, gamma, cm.m_upper + eps).first;
                CHECK(std::abs(below - above) < 1e-7);
            }
        }
    }
}

TEST_CASE("monotone in m, constant on the plateau") {
    for (double g : {-0.5, -0.2, 0.0, 0.4, 1.0}) {
        double prev = -1.0;
        const double mc = critical_margins(1.0, g).m_upper;
        const double plateau = max_success(1.0, g, 1.0).first;
        for (int k = 0; k <= 1000; ++k) {
            const double m = k / 1000.0;
            const double p = max_success(1.0, g, m).first;
            CHECK(p >= prev - 1e-12);
            if (m >= mc) CHECK(p == Catch::Approx(plateau).margin(1e-12));
            prev = p;
        }
    }
}

TEST_CASE("dual certificate per domain") {
    const SymmetricFamily f = build_family(1.0, 0.0);
    const Vec3 nsum = f.bloch_vectors[0] + f.bloch_vectors[1] + f.bloch_vectors[2];

    SECTION("minimum-error") {
        const DualCertificate c = dual_certificate(0.0, 1.0, f);
        CHECK(c.y == 0.0);
        CHECK(norm(c.Y.vector - nsum / 9.0) < 1e-12);
        CHECK(c.Y.scale == Catch::Approx(0.6054991).margin(1e-7));
    }
    SECTION("linear") {
        const DualCertificate c = dual_certificate(0.0, 0.05, f);
        CHECK(c.y == 2.0);
        CHECK(c.Y.scale == 0.0);
        CHECK(norm(c.Y.vector) == 0.0);
        CHECK(c.bound == Catch::Approx(0.10).margin(1e-12));
    }
    SECTION("intermediate") {
        // y_e from the root formula; the value 1.2409711 also makes
        // d(y) stationary, which y ~ 1.0443 does not
        const DualCertificate c = dual_certificate(0.0, 0.25, f);
        const double A = pure_A(0.0);
        const double ye = 0.5 * (1.0 + std::sqrt(3.0 * A / (0.5 - A)));
        CHECK(c.y == Catch::Approx(ye).margin(1e-12));
        CHECK(c.y == Catch::Approx(1.2409711).margin(1e-6));
        CHECK(c.bound == Catch::Approx(0.4445624).margin(1e-7));
        CHECK(c.bound == Catch::Approx(max_success(1.0, 0.0, 0.25).first).margin(1e-12));
        CHECK(c.Y.scale == Catch::Approx(norm(c.Y.vector)).margin(1e-12));
    }
}

TEST_CASE("optimal POVM per domain") {
    const SymmetricFamily f = build_family(1.0, 0.0);
    const Ensemble ens = to_ensemble(f);

    SECTION("minimum-error: rank-1 elements with coefficient 2/3") {
        const Povm p = optimal_povm(0.0, 1.0, f);
        CHECK(norm(p.inconclusive().vector) == 0.0);
        CHECK(p.inconclusive().scale == 0.0);
        for (int i = 1; i < 4; ++i) {
            CHECK(p.elements[i].scale == Catch::Approx(2.0 / 3.0).margin(1e-12));
            CHECK(min_eigenvalue(p.elements[i]) == Catch::Approx(0.0).margin(1e-12));
        }
        // with this embedding e_1 = (beta - n_1/3)/|...| and E_1 points along -e_1
        const Vec3 n1 = f.bloch_vectors[0];
        const Vec3 beta = (f.bloch_vectors[0] + f.bloch_vectors[1] + f.bloch_vectors[2]) / 9.0;
        Vec3 e1 = beta - n1 / 3.0;
        e1 = e1 / norm(e1);
        CHECK(norm(p.elements[1].vector + (2.0 / 3.0) * e1) < 1e-12);
        CHECK(success_probability(ens, p) == Catch::Approx(0.6054991).margin(1e-7));
    }
    SECTION("margin zero: no conclusive outcomes") {
        const Povm p = optimal_povm(0.0, 0.0, f);
        CHECK(p.inconclusive().scale == 2.0);
        for (int i = 1; i < 4; ++i) CHECK(p.elements[i].scale == 0.0);
        CHECK(success_probability(ens, p) == 0.0);
    }
    SECTION("intermediate coefficients") {
        const Povm p = optimal_povm(0.0, 0.25, f);
        const double A = pure_A(0.0);
        const double C = A * (2.0 + 3.0 * (0.25 - A) + std::sqrt(3.0 * A * (0.5 - A)));
        CHECK(p.elements[1].scale == Catch::Approx(C).margin(1e-12));
        CHECK(p.inconclusive().scale == Catch::Approx(2.0 - 3.0 * C).margin(1e-12));
        CHECK(p.inconclusive().scale > 0.0);
        CHECK(C > 0.0);
        CHECK(completeness_residual(p) < 1e-12);
    }
}

TEST_CASE("solve examples") {
    const Solution s1 = solve(1.0, 0.0, 1.0);
    CHECK(s1.p_error == Catch::Approx(0.3945010).margin(1e-7));
    CHECK(s1.p_inconclusive == Catch::Approx(0.0).margin(1e-10));
    CHECK(s1.gap >= -1e-10);
    CHECK(s1.gap <= 1e-10);

    const Solution s2 = solve(1.0, 0.0, 0.10);
    CHECK(s2.p_error == Catch::Approx(0.10).margin(1e-10));
    CHECK(s2.p_inconclusive == Catch::Approx(0.70).margin(1e-10));  // p_? = 1 - 3m

    const Solution s3 = solve(1.0, 1.0, 2.0 / 3.0);
    CHECK(s3.p_success == Catch::Approx(1.0 / 3.0).margin(1e-12));

    CHECK_THROWS_AS(solve(1.0, 0.0, 1.5), std::invalid_argument);
}

TEST_CASE("weak duality is tight for the analytic pair") {
    for (double g : {-0.5, -0.3, 0.0, 0.25, 0.5, 0.8, 1.0}) {
        const SymmetricFamily f = build_family(1.0, g);
        const Ensemble ens = to_ensemble(f);
        for (double m : {0.0, 0.05, 0.15, 0.3, 0.5, 0.75, 1.0}) {
            const Povm p = optimal_povm(g, m, f);
            const DualCertificate c = dual_certificate(g, m, f);
            CHECK(success_probability(ens, p) == Catch::Approx(c.bound).margin(1e-10));
        }
    }
}

TEST_CASE("margin saturation whenever y > 0") {
    for (double g : {-0.5, -0.1, 0.0, 0.4, 0.9}) {
        const SymmetricFamily f = build_family(1.0, g);
        const Ensemble ens = to_ensemble(f);
        for (double m : {0.02, 0.1, 0.2, 0.3}) {
            const DualCertificate c = dual_certificate(g, m, f);
            if (c.y > 0.0) {
                const Povm p = optimal_povm(g, m, f);
                CHECK(error_probability(ens, p) == Catch::Approx(m).margin(1e-10));
            }
        }
    }
}

TEST_CASE("rank of the inconclusive element classifies the domain") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double g = -0.45 + 1.4 * u(rng);  // interior: degenerate families excluded
        const double m = u(rng);
        const SymmetricFamily f = build_family(1.0, g);
        const Povm p = optimal_povm(g, m, f);
        const Domain dom = classify_margin(1.0, g, m);
        const CriticalMargins cm = critical_margins(1.0, g);
        const int r0 = rank_of(p.inconclusive());
        if (dom == Domain::MinimumError) CHECK(r0 == 0);
        if (dom == Domain::Intermediate && m > cm.m_lower + 1e-6 && m < cm.m_upper - 1e-6)
            CHECK(r0 == 1);
        if (dom == Domain::Linear && m > 1e-6 && m < cm.m_lower - 1e-6) CHECK(r0 == 2);
    }
}

TEST_CASE("mixed formulas reduce to the pure case at r = 1") {
    for (int gi = 0; gi <= 20; ++gi) {
        const double g = -0.5 + 1.5 * gi / 20.0;
        for (int mi = 0; mi <= 20; ++mi) {
            const double m = mi / 20.0;
            CHECK(max_success(1.0, g, m).first == Catch::Approx(pure_pmax(g, m)).margin(1e-12));
        }
    }
}

TEST_CASE("rotation invariance of probabilities") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double g = -0.45 + 1.4 * u(rng);
        const double m = u(rng);
        const SymmetricFamily f = build_family(1.0, g);
        const SymmetricFamily fr = rotate_family(
            f, {u(rng) - 0.5, u(rng) - 0.5, u(rng) + 0.1}, 2.0 * M_PI * u(rng));
        const Ensemble e0 = to_ensemble(f);
        const Ensemble e1 = to_ensemble(fr);
        const Povm p0 = optimal_povm(g, m, f);
        const Povm p1 = optimal_povm(g, m, fr);
        CHECK(success_probability(e0, p0) ==
              Catch::Approx(success_probability(e1, p1)).margin(1e-12));
        CHECK(error_probability(e0, p0) ==
              Catch::Approx(error_probability(e1, p1)).margin(1e-12));
        const DualCertificate c0 = dual_certificate(g, m, f);
        const DualCertificate c1 = dual_certificate(g, m, fr);
        CHECK(c0.bound == Catch::Approx(c1.bound).margin(1e-12));
    }
}

TEST_CASE("finite difference of trace Y matches -p_error at y_e") {
    const SymmetricFamily f = build_family(1.0, 0.1);
    const Ensemble ens = to_ensemble(f);
    const CriticalMargins cm = critical_margins(1.0, 0.1);
    for (int k = 1; k <= 10; ++k) {
        const double m = cm.m_lower + (cm.m_upper - cm.m_lower) * k / 11.0;
        const DualCertificate c = dual_certificate(0.1, m, f);
        const Povm p = optimal_povm(0.1, m, f);
        const double h = 1e-6;
        const double deriv = (trace_Y_of_y(0.1, c.y + h) - trace_Y_of_y(0.1, c.y - h)) / (2.0 * h);
        CHECK(deriv == Catch::Approx(-error_probability(ens, p)).margin(1e-5));
    }
}
