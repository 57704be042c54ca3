// The three-state symmetric qubit family and its ensemble form.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "qsdm/bloch.hpp"

namespace qsdm {

// Three qubit states with equal pairwise geometry: n_i.n_i = r (purity),
// n_i.n_j = gamma for i != j. Valid range: 0 <= r <= 1, -r/2 <= gamma <= r.
struct SymmetricFamily {
    double purity = 1.0;
    double overlap = 0.0;
    std::array<Vec3, 3> bloch_vectors{};
};

struct Ensemble {
    std::array<BlochOperator, 3> states{};
    std::array<double, 3> priors{};
};

inline void check_family_parameters(double r, double gamma) {
    if (!(r >= 0.0 && r <= 1.0))
        throw std::invalid_argument("purity r must lie in [0, 1]");
    if (!(gamma >= -0.5 * r - 1e-15 && gamma <= r + 1e-15))
        throw std::invalid_argument("overlap gamma must lie in [-r/2, r]");
}

// Canonical embedding: three vectors of length sqrt(r) on a cone about the
// z-axis, azimuths 120 degrees apart, polar angle fixed by
// cos^2(theta) = (r + 2 gamma) / (3 r). Any rigid rotation of this family is
// equally valid; downstream quantities are rotation invariant.
inline SymmetricFamily build_family(double r, double gamma) {
    check_family_parameters(r, gamma);
    SymmetricFamily f;
    f.purity = r;
    f.overlap = gamma;
    if (r == 0.0) return f;  // all vectors zero

    double cos2 = (r + 2.0 * gamma) / (3.0 * r);
    cos2 = std::min(1.0, std::max(0.0, cos2));
    const double ct = std::sqrt(cos2);
    const double st = std::sqrt(1.0 - cos2);
    const double len = std::sqrt(r);
    for (int i = 0; i < 3; ++i) {
        const double phi = 2.0 * M_PI * i / 3.0;
        f.bloch_vectors[static_cast<std::size_t>(i)] =
            len * Vec3{st * std::cos(phi), st * std::sin(phi), ct};
    }
    return f;
}

inline Ensemble to_ensemble(const SymmetricFamily& f) {
    Ensemble e;
    for (int i = 0; i < 3; ++i) {
        e.states[static_cast<std::size_t>(i)] = {1.0, f.bloch_vectors[static_cast<std::size_t>(i)]};
        e.priors[static_cast<std::size_t>(i)] = 1.0 / 3.0;
    }
    return e;
}

}  // namespace qsdm
