#pragma once

#include "spine/geometry.hpp"
#include "spine/sparse.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace spine {

/// Increments have variance 2 dt per coordinate, so the mean exit time
/// solves Laplace(u) = -1.
struct WalkConfig {
    double dt = 1e-5;
    std::size_t walkers = 10000;
    std::uint64_t seed = 1;
    std::size_t max_steps = 0; // 0 picks default_max_steps(walkers)
    std::vector<Vec2> starts;  // used by simulate_field
    ExecPolicy policy = ExecPolicy::Parallel;
    /// Far from every wall, k Euler steps are drawn as one Gaussian of
    /// variance 2 k dt (same law as the chain while no wall is reachable
    /// within seven standard deviations).
    bool aggregate = true;
};

struct MfptEstimate {
    double mean = 0.0;
    double std_error = 0.0; // sample std / sqrt(n_absorbed)
    std::size_t n_absorbed = 0;
    std::size_t n_censored = 0;
    bool censored = false; // n_censored / walkers >= 0.001
};

/// max(1e9 / walkers, 1e7).
std::size_t default_max_steps(std::size_t walkers);

/// Exit time of one walker, or nullopt when max_steps is reached. Stream
/// (seed, start_index, walker) fully determines the path.
std::optional<double> walker_exit_time(const SpineGeometry& g, const WalkConfig& cfg, Vec2 start,
                                       std::uint64_t start_index, std::uint64_t walker);

/// Mean over cfg.walkers walkers from `start`. Parallel and serial policies
/// give bitwise identical results.
MfptEstimate simulate_mfpt(const SpineGeometry& g, const WalkConfig& cfg, Vec2 start,
                           std::uint64_t start_index = 0);

struct FieldSample {
    Vec2 point;
    MfptEstimate estimate;
};

/// Independent estimates at every cfg.starts point (start index = position in
/// the list). Throws EmptyGrid without starts and OutsideDomain naming the
/// first start that is not interior.
std::vector<FieldSample> simulate_field(const SpineGeometry& g, const WalkConfig& cfg);

/// "x,y,mfpt,stderr,n_absorbed,n_censored" rows, `digits` significant digits.
void write_field_csv(std::ostream& os, const std::vector<FieldSample>& samples, int digits = 6);

} // namespace spine
