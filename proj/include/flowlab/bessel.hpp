#ifndef FLOWLAB_BESSEL_HPP
#define FLOWLAB_BESSEL_HPP

#include <cstdint>
#include <vector>

#include "flowlab/noise.hpp"
#include "flowlab/stats.hpp"

namespace flowlab {

/// Bessel process of real dimension nu: dD = (nu-1)/(2D) dt + dW.
struct BesselSpec {
    double nu = 2.0;          // real dimension, fractional allowed
    double start = 1.0;       // > floor_level
    double horizon = 10.0;
    double dt = 1e-4;
    double floor_level = 1e-3; // absorption threshold, treated as a hit
};

struct BesselResult {
    bool hit = false;
    double hit_time = 0.0;   // valid when hit
    double final_value = 0.0;
    double final_time = 0.0;
    std::vector<double> times;  // filled when store_path
    std::vector<double> values;
};

/// Euler path with drift substep control near the singularity: the
/// deterministic substep never moves D by more than 5% of its current value.
/// Substeps that would still overshoot below zero are halved.
BesselResult simulate_bessel(const BesselSpec& spec, const NoiseStream& stream,
                             bool store_path = false);

/// P(hit a before b | start x) for the Bessel-nu scale function
/// s(r) = r^(2-nu), with the logarithmic branch at nu = 2.
double scale_hit_probability(double nu, double x, double a, double b);

/// Exit-at-1/4 probability from x in [1/4, 1/2] for the constant-drift
/// comparison process dD = 2(n-1) dt + dW.
double harmonic_exit_prob(double x, int n);

/// Monte Carlo estimate of P(sigma > x), sigma the first time an
/// n-dimensional Brownian motion from 0 reaches radius 1/2.
WilsonInterval exit_time_tail(int n, std::size_t trials, double x,
                              std::uint64_t seed, double dt = 1e-4,
                              unsigned workers = 1);

/// One path of the three-process comparison chain: the Bessel radius
/// restarted from 3/8 after its first passage there, the hybrid-drift
/// comparison process, and the constant-drift process, all driven by the
/// same one-dimensional increments.
struct ChainPath {
    double sigma0 = 0.0;  // first passage of |B| to 3/8
    double sigma1 = 0.0;  // D1 reaches 1/2 (time after sigma0)
    double sigma2 = 0.0;  // D2 reaches 1/2
    double sigma3 = 0.0;  // D2 exits [1/4, 1/2]
    double sigma4 = 0.0;  // D3 exits [1/4, 1/2]
    double sigma5 = 0.0;  // D3 reaches 1/2
    bool d3_exited_low = false;  // D3 exit side at sigma4
    bool dominance_ok = true;    // D1 <= D2 + substep slack at every step
    bool resolved = true;        // all passage times found within the horizon
};

struct ComparisonChain {
    int n = 2;
    double dt = 1e-4;
    std::vector<ChainPath> paths;

    std::size_t count_d3_low() const;
    double mean_sigma(int which) const; // 1,2,3 -> sigma1..sigma3
};

ChainPath run_comparison_chain_path(int n, const NoiseStream& stream, double dt,
                                    double horizon = 50.0);

ComparisonChain run_comparison_chain(int n, std::size_t paths, std::uint64_t seed,
                                     double dt = 1e-4, unsigned workers = 1);

} // namespace flowlab

#endif
