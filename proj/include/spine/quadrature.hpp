#pragma once

#include <array>
#include <cmath>

namespace spine::quad {

namespace detail {

// 15-point Kronrod nodes on [0, 1) with the embedded 7-point Gauss weights.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
double gk15(F& f, double a, double b, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kKronrod[7];
    double gauss = fc * kGauss[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kNodes[i];
        const double s = f(c - dx) + f(c + dx);
        kron += kKronrod[i] * s;
        if (i % 2 == 1)
            gauss += kGauss[i / 2] * s;
    }
    err = std::abs((kron - gauss) * h);
    return kron * h;
}

template <class F>
double adapt(F& f, double a, double b, double tol, int depth) {
    double err = 0.0;
    const double whole = gk15(f, a, b, err);
    if (err <= tol || depth <= 0)
        return whole;
    const double m = 0.5 * (a + b);
    return adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Gauss-Kronrod (7/15) integration. The rule never samples the
/// interval end points, so integrable end-point singularities are fine.
template <class F>
double integrate(F f, double a, double b, double tol = 1e-12, int max_depth = 50) {
    if (a == b)
        return 0.0;
    return detail::adapt(f, a, b, tol, max_depth);
}

} // namespace spine::quad
