#include "spine/montecarlo.hpp"

#include "spine/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <sstream>

namespace spine {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Vec2 tangent_through(const Curve& c, Vec2 hit) {
    if (const auto* s = std::get_if<Segment>(&c))
        return unit(s->b - s->a);
    return perp(unit(hit - std::get<Arc>(c).center));
}

class Walker {
public:
    Walker(const SpineGeometry& g, const WalkConfig& cfg, std::uint64_t start_index, std::uint64_t walker)
        : g_(g), cfg_(cfg),
          rng_(splitmix64(splitmix64(cfg.seed ^ splitmix64(start_index)) + walker)),
          sigma_(std::sqrt(2.0 * cfg.dt)) {
        for (const auto& piece : g.boundary())
            if (piece.kind == BoundaryKind::Absorbing)
                if (const auto* s = std::get_if<Segment>(&piece.curve))
                    absorbing_.push_back({s->a, unit(s->b - s->a)});
    }

    std::optional<double> run(Vec2 start, std::size_t max_steps) {
        Vec2 pos = start;
        std::size_t steps = 0;
        // Wall distance at the anchor, less the displacement since, bounds
        // the current clearance without touching the geometry.
        Vec2 anchor = pos;
        double clearance = wall_distance(pos);
        while (steps < max_steps) {
            const double slack = clearance - norm(pos - anchor);
            if (cfg_.aggregate && slack > 7.0 * sigma_) {
                const double room = slack / 7.0;
                const std::size_t k = std::min<std::size_t>(
                    static_cast<std::size_t>(room * room / (sigma_ * sigma_)), max_steps - steps);
                if (k > 1) {
                    pos += std::sqrt(static_cast<double>(k)) * sigma_ * gaussian();
                    steps += k;
                    continue;
                }
            }
            const Vec2 step = sigma_ * gaussian();
            if (norm(step) < slack) {
                const Vec2 next = pos + step;
                if (bridge_absorbed(pos, next))
                    return (static_cast<double>(steps) + 0.5) * cfg_.dt;
                pos = next;
                ++steps;
                continue;
            }
            anchor = pos;
            clearance = wall_distance(pos);
            if (norm(step) < clearance) {
                const Vec2 next = pos + step;
                if (bridge_absorbed(pos, next))
                    return (static_cast<double>(steps) + 0.5) * cfg_.dt;
                pos = next;
                ++steps;
                continue;
            }
            double fraction = 0.0;
            const auto outcome = resolve(pos, step, fraction);
            if (outcome == Outcome::Absorbed)
                return (static_cast<double>(steps) + fraction) * cfg_.dt;
            if (outcome == Outcome::Resample)
                continue;
            ++steps;
            anchor = pos;
            clearance = wall_distance(pos);
        }
        return std::nullopt;
    }

private:
    enum class Outcome { Moved, Absorbed, Resample };

    Vec2 gaussian() {
        const double x = normal_(rng_);
        const double y = normal_(rng_);
        return {x, y};
    }

    double wall_distance(Vec2 p) const {
        double d = std::numeric_limits<double>::max();
        for (const auto& piece : g_.boundary())
            d = std::min(d, distance_to(piece.curve, p));
        return d;
    }

    // Probability that the Brownian bridge between two sampled points
    // touched the absorbing line in between.
    bool bridge_absorbed(Vec2 a, Vec2 b) {
        for (const AbsorbingLine& l : absorbing_) {
            const double d0 = cross(l.direction, a - l.origin), d1 = cross(l.direction, b - l.origin);
            if (d0 <= 0.0 || d1 <= 0.0)
                continue;
            const double x = d0 * d1 / cfg_.dt;
            if (x < 32.0 && uniform_(rng_) < std::exp(-x))
                return true;
        }
        return false;
    }

    // Specular reflection along the straight sub-path; the caller's
    // position is only updated when the step completes. A crossing counts
    // only where the path heads out of the domain, which discards the
    // reflection point itself and handles starts on a wall.
    Outcome resolve(Vec2& pos, Vec2 step, double& fraction) {
        const double total = norm(step);
        Vec2 p = pos;
        Vec2 rem = step;
        double travelled = 0.0;
        for (int bounce = 0; bounce <= 8; ++bounce) {
            const double len = norm(rem);
            const Vec2 q = p + rem;
            if (len < 1e-14) {
                pos = q;
                return Outcome::Moved;
            }
            double best = std::numeric_limits<double>::max();
            const BoundaryPiece* hit = nullptr;
            for (const auto& piece : g_.boundary()) {
                double ts[2];
                const int n = crossing_parameters(piece.curve, p, q, -1e-12 / len, ts);
                for (int i = 0; i < n; ++i) {
                    if (ts[i] >= best)
                        break;
                    if (dot(rem, outward_normal(piece.curve, p + ts[i] * rem)) > 0.0) {
                        best = ts[i];
                        hit = &piece;
                        break;
                    }
                }
            }
            if (!hit) {
                if (bridge_absorbed(p, q)) {
                    fraction = 0.5;
                    return Outcome::Absorbed;
                }
                pos = q;
                return Outcome::Moved;
            }
            best = std::max(best, 0.0);
            const Vec2 h = p + best * rem;
            if (hit->kind == BoundaryKind::Absorbing) {
                fraction = total > 0.0 ? (travelled + best * len) / total : 0.0;
                return Outcome::Absorbed;
            }
            travelled += best * len;
            const Vec2 t = tangent_through(hit->curve, h);
            const Vec2 after = q - h;
            rem = 2.0 * dot(after, t) * t - after;
            p = h;
        }
        return Outcome::Resample;
    }

    const SpineGeometry& g_;
    const WalkConfig& cfg_;
    std::mt19937_64 rng_;
    boost::random::normal_distribution<double> normal_;
    std::uniform_real_distribution<double> uniform_;
    double sigma_;
    struct AbsorbingLine {
        Vec2 origin;
        Vec2 direction; // domain on the left
    };
    std::vector<AbsorbingLine> absorbing_;
};

void check_config(const SpineGeometry& g, const WalkConfig& cfg) {
    if (!(cfg.dt > 0.0))
        throw Error(Errc::StepTooLarge, "time step must be positive");
    if (!(std::sqrt(2.0 * cfg.dt) < g.half_width() / 4.0)) {
        std::ostringstream os;
        os << "step sqrt(2 dt) = " << std::sqrt(2.0 * cfg.dt) << " does not resolve eps / 4 = "
           << g.half_width() / 4.0;
        throw Error(Errc::StepTooLarge, os.str());
    }
    if (cfg.walkers == 0)
        throw Error(Errc::DomainError, "need at least one walker");
    if (g.kind() == DomainKind::HeadOnly)
        throw Error(Errc::InvalidGeometry, "walkers need an absorbing neck end");
}

// Interior points, or points on a reflecting wall.
bool valid_start(const SpineGeometry& g, Vec2 p) {
    const Location loc = locate(g, p);
    if (loc.kind == Location::Kind::Interior)
        return true;
    return loc.kind == Location::Kind::Boundary &&
           g.boundary()[loc.piece].kind == BoundaryKind::Reflecting;
}

} // namespace

std::size_t default_max_steps(std::size_t walkers) {
    return std::max<std::size_t>(1000000000ULL / std::max<std::size_t>(walkers, 1), 10000000ULL);
}

std::optional<double> walker_exit_time(const SpineGeometry& g, const WalkConfig& cfg, Vec2 start,
                                       std::uint64_t start_index, std::uint64_t walker) {
    Walker w(g, cfg, start_index, walker);
    return w.run(start, cfg.max_steps ? cfg.max_steps : default_max_steps(cfg.walkers));
}

MfptEstimate simulate_mfpt(const SpineGeometry& g, const WalkConfig& cfg, Vec2 start,
                           std::uint64_t start_index) {
    check_config(g, cfg);
    if (!valid_start(g, start)) {
        std::ostringstream os;
        os << "start (" << start.x << ", " << start.y << ") is not in the domain";
        throw Error(Errc::OutsideDomain, os.str());
    }
    const std::size_t max_steps = cfg.max_steps ? cfg.max_steps : default_max_steps(cfg.walkers);
    const long n = static_cast<long>(cfg.walkers);
    // NaN marks a censored walker; the merge below runs in walker order so
    // the result does not depend on the thread schedule.
    std::vector<double> times(cfg.walkers);
    auto one = [&](long i) {
        Walker w(g, cfg, start_index, static_cast<std::uint64_t>(i));
        const auto t = w.run(start, max_steps);
        times[i] = t ? *t : std::numeric_limits<double>::quiet_NaN();
    };
    if (cfg.policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic, 64)
        for (long i = 0; i < n; ++i)
            one(i);
    } else {
        for (long i = 0; i < n; ++i)
            one(i);
    }

    MfptEstimate e;
    double mean = 0.0, m2 = 0.0;
    for (double t : times) {
        if (std::isnan(t)) {
            ++e.n_censored;
            continue;
        }
        ++e.n_absorbed;
        const double delta = t - mean;
        mean += delta / static_cast<double>(e.n_absorbed);
        m2 += delta * (t - mean);
    }
    e.mean = mean;
    if (e.n_absorbed > 1)
        e.std_error = std::sqrt(m2 / static_cast<double>(e.n_absorbed - 1) / static_cast<double>(e.n_absorbed));
    e.censored = static_cast<double>(e.n_censored) >= 0.001 * static_cast<double>(cfg.walkers);
    return e;
}

std::vector<FieldSample> simulate_field(const SpineGeometry& g, const WalkConfig& cfg) {
    if (cfg.starts.empty())
        throw Error(Errc::EmptyGrid, "no start points");
    check_config(g, cfg);
    for (std::size_t k = 0; k < cfg.starts.size(); ++k)
        if (!valid_start(g, cfg.starts[k])) {
            std::ostringstream os;
            os << "start " << k << " (" << cfg.starts[k].x << ", " << cfg.starts[k].y << ") is not in the domain";
            throw Error(Errc::OutsideDomain, os.str());
        }
    std::vector<FieldSample> out;
    for (std::size_t k = 0; k < cfg.starts.size(); ++k)
        out.push_back({cfg.starts[k], simulate_mfpt(g, cfg, cfg.starts[k], k)});
    return out;
}

void write_field_csv(std::ostream& os, const std::vector<FieldSample>& samples, int digits) {
    const auto old = os.precision(digits);
    os << "x,y,mfpt,stderr,n_absorbed,n_censored\n";
    for (const FieldSample& s : samples)
        os << s.point.x << ',' << s.point.y << ',' << s.estimate.mean << ',' << s.estimate.std_error << ','
           << s.estimate.n_absorbed << ',' << s.estimate.n_censored << '\n';
    os.precision(old);
}

} // namespace spine
