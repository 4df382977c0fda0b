#pragma once

#include "spine/geometry.hpp"
#include "spine/vec2.hpp"

#include <memory>
#include <utility>

namespace spine {

/// Symbols consumed by the expansion formulas.
struct AsymptoticParams {
    double head_area = 0.0;
    double eps = 0.0;   // half arclength of the window
    double alpha = 1.0; // Robin coefficient
    double beta = 0.5;  // Robin data
    double neck_length = 0.0;      // absolute length L
    double effective_length = 0.0; // curvature-corrected length
    Vec2 gamma_center{};           // window centre x*
    HeadSpec head{};
};

/// Parameters for the neck reduction: alpha = 1/Lt, beta = Lt/2 with the
/// effective neck length Lt.
AsymptoticParams params_for_spine(const SpineGeometry& g);
/// Parameters taken from the Robin window of a head-only domain.
AsymptoticParams params_for_head_only(const SpineGeometry& g);

struct ExpansionResult {
    double value = 0.0;
    double leading = 0.0;    // |head| / (2 alpha eps)
    double log_term = 0.0;   // (|head| / pi)(3/2 + ln(1/(2 eps)))
    double robin_term = 0.0; // beta / alpha
    double phi_term = 0.0;
    double order_estimate = 0.0; // size of the neglected remainder, never added
    bool near_window = false;    // evaluation point closer than 5 eps to the window
};

/// Integral of ln|t - y| over y in [-1, 1]; 0 ln 0 = 0 at the end points.
double log_kernel_L1(double t);

/// Double integral of ln|t - y| over [-1, 1]^2, i.e. 4 ln 2 - 6.
double log_kernel_double_integral();

/// Closed-form regular profile for the unit disk centred at the origin.
double phi_disk(Vec2 x, Vec2 xstar);

/// Closed form for a disk of radius R centred at c:
///   R^2 ln|x - x*| + (R^2 - |x - c|^2) / 4,
/// which reduces to the unit-disk formula for R = 1, c = 0.
double phi_disk(const HeadSpec& head, Vec2 x, Vec2 xstar);

struct PhiNumericOptions {
    double h = 0.004;        // mesh size at x*
    int mollifier_edges = 4; // half-width of the boundary hat, in edges
};

/// Finite-element evaluation of the regular profile on a disk head: solves
/// Laplace(Phi) = -1 with the boundary flux -|head| concentrated at x* by a
/// hat of half-width `mollifier_edges` edges, then fixes the additive constant
/// from the behaviour near x*. The hat-smeared log potential is split off
/// analytically, so the FEM only resolves a smooth remainder and evaluation
/// uses the point log. Throws MeshTooCoarse below three mollifier edges.
class PhiNumeric {
public:
    PhiNumeric(const HeadSpec& head, Vec2 xstar, PhiNumericOptions opts = {});
    ~PhiNumeric();
    PhiNumeric(PhiNumeric&&) noexcept;
    PhiNumeric& operator=(PhiNumeric&&) noexcept;

    double operator()(Vec2 x) const;

    /// Phi(x) - (|head|/pi) ln|x - x*| along the inward normal at x*, at the
    /// given distances; tends to 0 as the distance shrinks.
    std::vector<double> normalization_residuals(const std::vector<double>& distances) const;

    double mesh_size() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

double phi_numeric(const SpineGeometry& head_only, Vec2 x, Vec2 xstar, PhiNumericOptions opts = {});

/// (alpha, beta) = (1/Lt, Lt/2).
std::pair<double, double> robin_coefficients(double effective_length);

/// One-dimensional neck solution at distance x_along from the window, with
/// window value C and neck length L.
double neck_profile(double x_along, double window_value, double neck_length);

ExpansionResult mfpt_neumann_robin(const AsymptoticParams& p, Vec2 x);

/// The Neumann-Robin expansion with robin_coefficients(p.effective_length).
ExpansionResult mfpt_spine(const AsymptoticParams& p, Vec2 x);

/// Two-term normal-derivative profile on the window at arclength t from x*.
double flux_on_window(const AsymptoticParams& p, double t);

/// Earlier two-process estimate without its O(1) term:
///   (|head|/pi) ln(|dHead| / (2 eps)) + L^2/2 + |head| L / (2 eps).
double mfpt_reference_hs(const AsymptoticParams& p);

} // namespace spine
