// Bloch-form algebra for 2x2 Hermitian operators.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace qsdm {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
    friend Vec3 operator*(const Vec3& v, double s) { return s * v; }
    friend Vec3 operator/(const Vec3& v, double s) { return {v.x / s, v.y / s, v.z / s}; }
    Vec3& operator+=(const Vec3& b) { x += b.x; y += b.y; z += b.z; return *this; }
    Vec3 operator-() const { return {-x, -y, -z}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// A 2x2 Hermitian operator (scale * 1 + vector . sigma) / 2.
// Trace equals scale; eigenvalues are (scale -+ |vector|) / 2.
struct BlochOperator {
    double scale = 0.0;
    Vec3 vector;
};

inline double pair_trace(const BlochOperator& a, const BlochOperator& b) {
    return 0.5 * (a.scale * b.scale + dot(a.vector, b.vector));
}

inline double min_eigenvalue(const BlochOperator& a) {
    return 0.5 * (a.scale - norm(a.vector));
}

inline double max_eigenvalue(const BlochOperator& a) {
    return 0.5 * (a.scale + norm(a.vector));
}

inline BlochOperator combine(std::span<const double> coeffs, std::span<const BlochOperator> ops) {
    if (coeffs.size() != ops.size())
        throw std::invalid_argument("combine: coefficient/operator length mismatch");
    BlochOperator out;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        out.scale += coeffs[i] * ops[i].scale;
        out.vector += coeffs[i] * ops[i].vector;
    }
    return out;
}

// Row-major complex 2x2 matrix. Products of Hermitian operators are generally
// non-Hermitian, so residual checks go through this representation.
struct ComplexMatrix2 {
    std::array<std::complex<double>, 4> m{};

    std::complex<double>& operator()(int r, int c) { return m[static_cast<std::size_t>(2 * r + c)]; }
    const std::complex<double>& operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }
};

inline ComplexMatrix2 materialize(const BlochOperator& a) {
    using C = std::complex<double>;
    ComplexMatrix2 out;
    out(0, 0) = C(0.5 * (a.scale + a.vector.z), 0.0);
    out(0, 1) = C(0.5 * a.vector.x, -0.5 * a.vector.y);
    out(1, 0) = C(0.5 * a.vector.x, 0.5 * a.vector.y);
    out(1, 1) = C(0.5 * (a.scale - a.vector.z), 0.0);
    return out;
}

inline ComplexMatrix2 multiply(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    ComplexMatrix2 out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c);
    return out;
}

inline double frobenius_norm(const ComplexMatrix2& a) {
    double s = 0.0;
    for (const auto& e : a.m) s += std::norm(e);
    return std::sqrt(s);
}

// ||A B||_F for Bloch-form operators; zero iff the operator product vanishes.
inline double product_residual_norm(const BlochOperator& a, const BlochOperator& b) {
    return frobenius_norm(multiply(materialize(a), materialize(b)));
}

}  // namespace qsdm
