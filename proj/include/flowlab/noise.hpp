#ifndef FLOWLAB_NOISE_HPP
#define FLOWLAB_NOISE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowlab/geometry.hpp"

namespace flowlab {

/// Counter-based Gaussian noise: every variate is a pure function of
/// (seed, path_index, step, coordinate). No state, so distinct paths can be
/// generated concurrently and any path can be replayed exactly.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint64_t path_index, int dimension);

    /// Standard normal variate for (step, coord).
    double gaussian(std::uint64_t step, int coord) const;

    /// Uniform variate in (0, 1] for (step, tag), independent of the
    /// gaussians; used for per-step Bernoulli draws such as boundary-bridge
    /// crossing tests.
    double uniform(std::uint64_t step, int tag = 0) const;

    /// Writes the n Brownian increments of one step, coordinate variance dt.
    void fill_increment(std::uint64_t step, double dt, std::span<double> out) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t path_index() const { return path_index_; }
    int dimension() const { return dimension_; }

    /// Stream for another path of the same ensemble.
    NoiseStream with_path_index(std::uint64_t path_index) const {
        return NoiseStream(seed_, path_index, dimension_);
    }

private:
    std::uint64_t seed_;
    std::uint64_t path_index_;
    int dimension_;
    std::uint64_t key_; // mixed (seed, path) prefix
};

/// A stored Brownian trajectory: times[0] = 0 and positions in a flat
/// row-major block of (steps+1) x n doubles.
struct BrownianPath {
    int dimension = 1;
    std::vector<double> times;
    std::vector<double> positions;

    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
    std::span<const double> position(std::size_t i) const {
        return {positions.data() + i * static_cast<std::size_t>(dimension),
                static_cast<std::size_t>(dimension)};
    }

    /// Little-endian binary dump: magic, version, n, step count, dt schedule,
    /// then the position block.
    void save(const std::string& path) const;
    static BrownianPath load(const std::string& path);
};

/// steps i.i.d. n-dimensional N(0, dt*I) increments, deterministic in the
/// stream identity.
std::vector<PointN> generate_increments(const NoiseStream& stream, std::size_t steps, double dt);

/// Path from `start` (origin when empty) under the given step schedule.
BrownianPath generate_path(const NoiseStream& stream, const std::vector<double>& dt_schedule,
                           const PointN& start = {});

/// max over the stored path of |coordinate value|.
double running_max_abs(const BrownianPath& path, int coordinate);

} // namespace flowlab

#endif
