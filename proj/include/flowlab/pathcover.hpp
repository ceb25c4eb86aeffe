#ifndef FLOWLAB_PATHCOVER_HPP
#define FLOWLAB_PATHCOVER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "flowlab/noise.hpp"
#include "flowlab/stats.hpp"

namespace flowlab {

/// Sequential ball cover of a path: ball 0 sits at the start, each next ball
/// at the position where the path first leaves the previous one.
struct CoverReport {
    double radius = 0.0;
    double horizon = 0.0;
    std::vector<PointN> centers;
    std::vector<double> open_times;
    std::vector<double> exit_durations; // sigma_i, completed exits only
    std::size_t count() const { return centers.size(); }
};

/// Streaming version of the chaining rule so covers can be built without
/// storing the path. Exit is the first sample at distance >= r; that sample
/// becomes the next center (no boundary interpolation, so sigma_i stays a
/// whole number of steps).
class CoverAccumulator {
public:
    CoverAccumulator(double radius, double horizon);
    void start(std::span<const double> position);
    void feed(double time, std::span<const double> position);
    CoverReport take();

private:
    CoverReport report_;
    std::vector<double> center_;
    bool open_ = false;
    double open_time_ = 0.0;
};

CoverReport sequential_cover(const BrownianPath& path, double r);

/// Monte Carlo estimate of P(min_{i<=m} sigma_i < K/n) for i.i.d. exit times
/// of an n-dimensional Brownian motion from the unit ball.
WilsonInterval exit_time_minimum_tail(int n, std::size_t m, double K, std::size_t trials,
                                      std::uint64_t seed, double dt = 1e-4,
                                      unsigned workers = 1);

struct CoverCell {
    int n = 0;
    double radius = 0.0;
    double horizon = 0.0;
    std::size_t paths = 0;
    double mean_count = 0.0;
    double stderr_count = 0.0;
    std::vector<double> counts; // per-path samples, kept for distribution checks
};

struct CoverScalingTable {
    std::vector<CoverCell> cells;
    // log-log slope of mean count vs radius, one entry per n with >= 2 radii
    std::vector<std::pair<int, double>> slope_by_n;
    // linear coefficient of mean count vs n, one entry per radius
    std::vector<std::pair<double, double>> count_vs_n_coeff;

    std::string to_csv() const;
};

/// Covers of the lateral (n-1)-dimensional Brownian path for each requested
/// n and radius. Radii must be of the form e^k with 1 <= k <= ceil(log(n)/2)
/// for the given n; cells violating that are skipped.
CoverScalingTable cover_scaling_study(const std::vector<int>& n_list, double horizon,
                                      const std::vector<double>& radii,
                                      std::size_t paths_per_cell, std::uint64_t seed,
                                      double dt = 1e-4, unsigned workers = 1);

/// One cover-count sample: chains exit times of the (d = n-1)-dimensional
/// lateral Brownian motion until the horizon, streaming.
CoverReport sample_lateral_cover(int lateral_dimension, double radius, double horizon,
                                 const NoiseStream& stream, double dt);

} // namespace flowlab

#endif
