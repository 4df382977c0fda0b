#include "spine/asymptotics.hpp"

#include "spine/error.hpp"
#include "spine/fem.hpp"
#include "spine/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace spine {

struct PhiNumeric::Impl {
    HeadSpec head;
    double rotation = 0.0; // angle of x* around the head centre
    double h = 0.0;
    double half = 0.0;     // mollifier half-width in arclength
    double constant = 0.0;
    std::unique_ptr<ScalarField> field;

    Vec2 to_local(Vec2 x) const {
        const Vec2 d = x - head.center;
        const double c = std::cos(-rotation), s = std::sin(-rotation);
        return head.center + Vec2{c * d.x - s * d.y, s * d.x + c * d.y};
    }

    double hat(double s) const { return std::max(0.0, half - std::abs(s)) / (half * half); }

    /// Point log plus the smooth remainder; the smeared log S only shapes
    /// the remainder's boundary data.
    double raw(Vec2 local) const {
        const double r = head.radius;
        return r * r * std::log(distance(local, head.center + polar(r, 0.0))) + field->evaluate(local);
    }
};

PhiNumeric::PhiNumeric(const HeadSpec& head, Vec2 xstar, PhiNumericOptions opts)
    : impl_(std::make_unique<Impl>()) {
    if (!(head.radius > 0.0))
        throw Error(Errc::InvalidGeometry, "head radius must be positive");
    if (std::abs(distance(xstar, head.center) - head.radius) > 1e-10 * head.radius)
        throw Error(Errc::DomainError, "x* must lie on the head circle");
    if (!(opts.h > 0.0) || opts.mollifier_edges < 3 || 16 * opts.mollifier_edges * opts.h > head.radius ||
        64 * opts.h > head.radius)
        throw Error(Errc::MeshTooCoarse, "mesh size too large for the head");

    Impl& im = *impl_;
    const double r = head.radius;
    im.head = head;
    im.rotation = std::atan2(xstar.y - head.center.y, xstar.x - head.center.x);
    im.h = opts.h;
    im.half = opts.mollifier_edges * opts.h;

    const int m = 4 * opts.mollifier_edges;
    std::vector<double> angles(2 * m + 1);
    for (int k = -m; k <= m; ++k)
        angles[k + m] = k * opts.h / r;
    auto mesh = std::make_shared<Mesh>(generate_disk_mesh(head, angles, std::sqrt(r / (2.0 * m * opts.h))));
    for (const WindowEdge& w : mesh->window_edges)
        mesh->boundary_edges.push_back({w.a, w.b, BoundaryKind::Reflecting});

    FemSystem sys = assemble_system(*mesh, 1.0, 0.0, 0.0);
    double poly_area = 0.0;
    for (int t = 0; t < static_cast<int>(mesh->triangles.size()); ++t)
        poly_area += signed_area(*mesh, t);

    // The smeared log S is harmonic and carries the concentrated flux, so the
    // remainder v = Phi - S only sees the principal-value normal derivative
    // of S, which is bounded along the whole boundary.
    auto normal_data = [&](Vec2 x) {
        const Vec2 n = unit(x - head.center);
        auto f = [&](double s) {
            const Vec2 d = x - (head.center + polar(r, s / r));
            const double d2 = norm2(d);
            return d2 > 0.0 ? dot(d, n) / d2 * im.hat(s) : im.hat(s) / (2.0 * r);
        };
        return -r * r * (quad::integrate(f, -im.half, 0.0, 1e-9, 12) + quad::integrate(f, 0.0, im.half, 1e-9, 12));
    };
    std::vector<double> bload(mesh->vertices.size(), 0.0);
    double total = 0.0;
    const double g = 1.0 / std::sqrt(3.0);
    for (const BoundaryEdge& e : mesh->boundary_edges) {
        const Vec2 pa = mesh->vertices[e.a], pb = mesh->vertices[e.b];
        const double len = distance(pa, pb);
        for (double xi : {-g, g}) {
            const double lam = 0.5 * (1.0 + xi);
            const Vec2 q = head.center + r * unit(pa + lam * (pb - pa) - head.center);
            const double w = 0.5 * len * normal_data(q);
            bload[e.a] += (1.0 - lam) * w;
            bload[e.b] += lam * w;
            total += w;
        }
    }
    for (std::size_t n = 0; n < bload.size(); ++n)
        sys.rhs[sys.dof_of_node[n]] -= poly_area * bload[n] / total;

    std::vector<double> x(sys.dofs, 0.0);
    solve_cg(sys.matrix, sys.rhs, x, CgOptions{1e-11});
    std::vector<double> nodal(mesh->vertices.size());
    for (std::size_t n = 0; n < nodal.size(); ++n)
        nodal[n] = x[sys.dof_of_node[n]];
    FieldMeta meta;
    meta.problem = ProblemKind::PureNeumann;
    meta.h = opts.h;
    im.field = std::make_unique<ScalarField>(mesh, std::move(nodal), meta);

    // Phi - S = v is smooth up to x*; quadratic interpolation in the inward
    // distance gives its limit.
    const double d[3] = {8 * opts.h, 16 * opts.h, 32 * opts.h};
    double res[3];
    for (int k = 0; k < 3; ++k)
        res[k] = im.field->evaluate(head.center + polar(r - d[k], 0.0));
    im.constant = res[0] * d[1] * d[2] / ((d[0] - d[1]) * (d[0] - d[2])) +
                  res[1] * d[0] * d[2] / ((d[1] - d[0]) * (d[1] - d[2])) +
                  res[2] * d[0] * d[1] / ((d[2] - d[0]) * (d[2] - d[1]));
}

PhiNumeric::~PhiNumeric() = default;
PhiNumeric::PhiNumeric(PhiNumeric&&) noexcept = default;
PhiNumeric& PhiNumeric::operator=(PhiNumeric&&) noexcept = default;

double PhiNumeric::operator()(Vec2 x) const {
    const Impl& im = *impl_;
    const Vec2 xstar = im.head.center + polar(im.head.radius, im.rotation);
    if (distance(x, xstar) < 1e-12)
        throw Error(Errc::SingularPoint, "Phi is singular at x*");
    return im.raw(im.to_local(x)) - im.constant;
}

std::vector<double> PhiNumeric::normalization_residuals(const std::vector<double>& distances) const {
    const Impl& im = *impl_;
    std::vector<double> out;
    for (double d : distances) {
        const Vec2 p = im.head.center + polar(im.head.radius - d, 0.0);
        out.push_back(im.raw(p) - im.constant - im.head.radius * im.head.radius * std::log(d));
    }
    return out;
}

double PhiNumeric::mesh_size() const { return impl_->h; }

double phi_numeric(const SpineGeometry& head_only, Vec2 x, Vec2 xstar, PhiNumericOptions opts) {
    if (!head_only.has_head())
        throw Error(Errc::InvalidGeometry, "Phi needs a head");
    return PhiNumeric(head_only.head(), xstar, opts)(x);
}

} // namespace spine
