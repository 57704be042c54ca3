// Four-outcome measurements and dual certificates for the margin problem.
#pragma once

#include <array>
#include <cstddef>

#include "qsdm/bloch.hpp"
#include "qsdm/states.hpp"

namespace qsdm {

// Elements E0 (inconclusive), E1, E2, E3. Each must be positive semidefinite
// and the four must sum to the identity (scale 2, vector 0).
struct Povm {
    std::array<BlochOperator, 4> elements{};

    const BlochOperator& inconclusive() const { return elements[0]; }
    const BlochOperator& conclusive(int i) const { return elements[static_cast<std::size_t>(i)]; }
};

inline double povm_min_eigenvalue(const Povm& p) {
    double worst = min_eigenvalue(p.elements[0]);
    for (int i = 1; i < 4; ++i)
        worst = std::min(worst, min_eigenvalue(p.elements[static_cast<std::size_t>(i)]));
    return worst;
}

// |sum E_mu - 1| measured on (scale, vector) components.
inline double completeness_residual(const Povm& p) {
    BlochOperator s;
    for (const auto& e : p.elements) {
        s.scale += e.scale;
        s.vector += e.vector;
    }
    return std::abs(s.scale - 2.0) + norm(s.vector);
}

inline double success_probability(const Ensemble& ens, const Povm& p) {
    double ps = 0.0;
    for (int i = 0; i < 3; ++i)
        ps += ens.priors[static_cast<std::size_t>(i)] *
              pair_trace(p.conclusive(i + 1), ens.states[static_cast<std::size_t>(i)]);
    return ps;
}

inline double error_probability(const Ensemble& ens, const Povm& p) {
    double pe = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (j != i)
                pe += ens.priors[static_cast<std::size_t>(j)] *
                      pair_trace(p.conclusive(i + 1), ens.states[static_cast<std::size_t>(j)]);
    return pe;
}

inline double inconclusive_probability(const Ensemble& ens, const Povm& p) {
    double pq = 0.0;
    for (int i = 0; i < 3; ++i)
        pq += ens.priors[static_cast<std::size_t>(i)] *
              pair_trace(p.inconclusive(), ens.states[static_cast<std::size_t>(i)]);
    return pq;
}

// Feasible dual pair (y, Y); d = tr Y + y m upper-bounds every feasible
// success probability.
struct DualCertificate {
    double y = 0.0;
    BlochOperator Y;
    double margin = 0.0;
    double bound = 0.0;  // d = tr Y + y * margin
};

// Bloch form of eta_i rho_i - y * sum_{j != i} eta_j rho_j.
inline BlochOperator dual_shift_operator(const Ensemble& ens, double y, int i) {
    BlochOperator g;
    for (int j = 0; j < 3; ++j) {
        const double c = (j == i) ? ens.priors[static_cast<std::size_t>(j)]
                                  : -y * ens.priors[static_cast<std::size_t>(j)];
        g.scale += c * ens.states[static_cast<std::size_t>(j)].scale;
        g.vector += c * ens.states[static_cast<std::size_t>(j)].vector;
    }
    return g;
}

}  // namespace qsdm
