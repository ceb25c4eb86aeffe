#ifndef FLOWLAB_OCCUPATION_HPP
#define FLOWLAB_OCCUPATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "flowlab/noise.hpp"
#include "flowlab/stats.hpp"

namespace flowlab {

/// Left-endpoint Riemann occupation of the ball B_r(center) by the stored
/// path: sum of dt over steps whose starting sample lies inside.
double occupation_time(const BrownianPath& path, const PointN& center, double r);

/// Occupation split over the concentric annuli A^1 = ball of radius 2e,
/// A^k = {2e^{k-1} <= dist < 2e^k} for k = 2..k_max, plus a final entry for
/// everything beyond. Entries sum exactly to the total horizon.
std::vector<double> occupation_annuli(const BrownianPath& path, const PointN& center,
                                      int k_max);

/// Total-occupation sampler for a transient Brownian motion: accrues
/// occupation of B_radius(0) at resolution dt and walks with coarser exact
/// Gaussian steps far from the ball, until the path escapes past
/// escape_radius (converged) or the time horizon runs out (flagged).
struct OccupationSampleSpec {
    int dimension = 3;
    double radius = 1.0;
    double dt = 1e-4;
    double escape_radius = 0.0; // 0: dimension-based default
    double horizon = 0.0;       // 0: dimension-based default

    double effective_escape_radius() const;
    double effective_horizon() const;
};

struct OccupationSample {
    double occupation = 0.0;
    bool converged = false;
    double elapsed = 0.0;
};

OccupationSample sample_total_occupation(const OccupationSampleSpec& spec,
                                         const NoiseStream& stream);

/// Exit time of an n-dimensional Brownian motion from the unit ball,
/// discrete first crossing.
double sample_unit_ball_exit(int n, const NoiseStream& stream, double dt);

/// Empirical tail of the total occupation L^{(n-1)}(B_r(0)) against
/// thresholds s*r^2. Values of s at or below the 8/n regime edge are
/// allowed but flagged.
struct TailPoint {
    double s = 0.0;
    WilsonInterval survival;
    std::size_t exceedances = 0;
    bool in_paper_regime = false;
};

struct TailCurve {
    int n = 0;
    double radius = 0.0;
    std::size_t trials = 0;
    std::vector<TailPoint> points;
    double fitted_rate = 0.0;  // decay rate of log-survival in s
    bool rate_valid = false;   // needs >= 2 points with >= 50 exceedances
    std::size_t nonconverged = 0;
    std::vector<double> scaled_samples; // L / r^2, kept for collapse checks

    std::string to_csv() const;
};

TailCurve occupation_tail(int n, double r, const std::vector<double>& s_grid,
                          std::size_t trials, std::uint64_t seed, double dt = 1e-4,
                          unsigned workers = 1);

/// Ciesielski-Taylor check: exit times of the n-ball vs total unit-ball
/// occupation in dimension n+2.
struct CtSummary {
    int n = 0;
    std::size_t samples = 0;
    double ks = 0.0;
    double mean_exit = 0.0;
    double mean_occupation = 0.0;
    std::size_t nonconverged = 0;
    std::vector<double> exit_samples;
    std::vector<double> occupation_samples;
};

CtSummary ct_identity_check(int n, std::size_t samples, double dt, std::uint64_t seed,
                            unsigned workers = 1);

} // namespace flowlab

#endif
