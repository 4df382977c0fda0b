#include "spine/asymptotics.hpp"

#include "spine/error.hpp"

#include <cmath>
#include <numbers>

namespace spine {

namespace {

constexpr double kPi = std::numbers::pi;

double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

double window_distance(const AsymptoticParams& p, Vec2 x) {
    const double half = p.eps / p.head.radius;
    const Vec2 r = p.gamma_center - p.head.center;
    const double mid = std::atan2(r.y, r.x);
    return distance_to(Arc{p.head.center, p.head.radius, mid - half, 2 * half}, x);
}

} // namespace

AsymptoticParams params_for_spine(const SpineGeometry& g) {
    if (g.kind() != DomainKind::Spine)
        throw Error(Errc::InvalidGeometry, "spine parameters need a head and a neck");
    AsymptoticParams p;
    p.head = g.head();
    p.head_area = head_area(g);
    p.eps = g.half_width();
    p.neck_length = g.neck().absolute_length();
    p.effective_length = effective_neck_length(g.neck());
    std::tie(p.alpha, p.beta) = robin_coefficients(p.effective_length);
    p.gamma_center = g.gamma_center();
    return p;
}

AsymptoticParams params_for_head_only(const SpineGeometry& g) {
    if (g.kind() != DomainKind::HeadOnly)
        throw Error(Errc::InvalidGeometry, "expected a head-only domain");
    AsymptoticParams p;
    p.head = g.head();
    p.head_area = head_area(g);
    p.eps = g.half_width();
    p.alpha = g.robin()->alpha;
    p.beta = g.robin()->beta;
    // The Robin data corresponds to a neck of length 1/alpha.
    p.neck_length = 1.0 / p.alpha;
    p.effective_length = p.neck_length;
    p.gamma_center = g.gamma_center();
    return p;
}

double log_kernel_L1(double t) {
    if (!(std::abs(t) <= 1.0))
        throw Error(Errc::DomainError, "log kernel argument must satisfy |t| <= 1");
    return xlogx(1.0 + t) + xlogx(1.0 - t) - 2.0;
}

double log_kernel_double_integral() { return 4.0 * std::numbers::ln2 - 6.0; }

double phi_disk(Vec2 x, Vec2 xstar) { return phi_disk(HeadSpec{{0.0, 0.0}, 1.0}, x, xstar); }

double phi_disk(const HeadSpec& head, Vec2 x, Vec2 xstar) {
    const double r = head.radius;
    if (std::abs(distance(xstar, head.center) - r) > 1e-10 * r)
        throw Error(Errc::DomainError, "x* must lie on the head circle");
    const double d = distance(x, xstar);
    if (d < 1e-12)
        throw Error(Errc::SingularPoint, "Phi is singular at x*");
    return r * r * std::log(d) + 0.25 * (r * r - norm2(x - head.center));
}

std::pair<double, double> robin_coefficients(double effective_length) {
    if (!(effective_length > 0.0))
        throw Error(Errc::DomainError, "neck length must be positive");
    return {1.0 / effective_length, effective_length / 2.0};
}

double neck_profile(double x_along, double window_value, double neck_length) {
    if (x_along < 0.0 || x_along > neck_length)
        throw Error(Errc::DomainError, "position must lie along the neck");
    const double rest = neck_length - x_along;
    return -0.5 * rest * rest + (window_value / neck_length + neck_length / 2.0) * rest;
}

ExpansionResult mfpt_neumann_robin(const AsymptoticParams& p, Vec2 x) {
    if (!(p.alpha > 0.0) || !(p.eps > 0.0) || !(p.head_area > 0.0))
        throw Error(Errc::DomainError, "expansion needs alpha, eps and head area > 0");
    ExpansionResult r;
    r.leading = p.head_area / (2.0 * p.alpha * p.eps);
    r.log_term = p.head_area / kPi * (1.5 + std::log(1.0 / (2.0 * p.eps)));
    r.robin_term = p.beta / p.alpha;
    r.phi_term = phi_disk(p.head, x, p.gamma_center);
    r.value = r.leading + r.log_term + r.robin_term + r.phi_term;
    r.order_estimate = p.eps;
    r.near_window = window_distance(p, x) < 5.0 * p.eps;
    return r;
}

ExpansionResult mfpt_spine(const AsymptoticParams& p, Vec2 x) {
    AsymptoticParams q = p;
    std::tie(q.alpha, q.beta) = robin_coefficients(p.effective_length);
    return mfpt_neumann_robin(q, x);
}

double flux_on_window(const AsymptoticParams& p, double t) {
    if (!(std::abs(t) <= p.eps))
        throw Error(Errc::DomainError, "flux is defined on the window only");
    const double correction = 1.5 - std::numbers::ln2 + 0.5 * log_kernel_L1(t / p.eps);
    return -p.head_area / (2.0 * p.eps) - p.head_area / kPi * p.alpha * correction;
}

double mfpt_reference_hs(const AsymptoticParams& p) {
    const double perimeter = 2.0 * kPi * p.head.radius;
    const double len = p.effective_length;
    return p.head_area / kPi * std::log(perimeter / (2.0 * p.eps)) + 0.5 * len * len +
           p.head_area * len / (2.0 * p.eps);
}

} // namespace spine
