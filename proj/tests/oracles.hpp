#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// into the library.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

namespace oracle {

// Integral of ln|t - y| over y in [-1, 1], split at the singularity.
inline double log_integral(double t) {
    boost::math::quadrature::tanh_sinh<double> q;
    auto f = [t](double y) {
        const double d = std::abs(t - y);
        return d > 0.0 ? std::log(d) : 0.0;
    };
    double out = 0.0;
    if (t > -1.0)
        out += q.integrate(f, -1.0, t);
    if (t < 1.0)
        out += q.integrate(f, t, 1.0);
    return out;
}

inline double log_double_integral() {
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate([](double t) { return log_integral(t); }, -1.0, 1.0);
}

// Area of the circular segment cut from a disk of radius r by a chord at
// distance r cos(theta) from the centre (half angle theta).
inline double segment_area(double r, double theta) {
    return 0.5 * r * r * (2.0 * theta - std::sin(2.0 * theta));
}

} // namespace oracle
