#include "flowlab/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "flowlab/parallel.hpp"

namespace flowlab {

namespace {

// Deterministic drift flow of dD = drift(D) dt over `span` with substeps
// capped so one substep moves at most 5% of the current value. Returns the
// final value; absorbed paths stop at `floor_level` (pass a negative floor
// to disable). `drift` must be finite for D > 0.
template <typename DriftFn>
double drift_flow(double d, double span, double floor_level, const DriftFn& drift,
                  bool* absorbed) {
    constexpr double eta = 0.1; // substep control: dt <= eta * D / |drift|
    double remaining = span;
    while (remaining > 0.0) {
        const double g = drift(d);
        if (g == 0.0) break;
        // cap so |g| * dt_sub <= (eta/2) * d = 5% of the current value
        const double move_cap = 0.5 * eta * d / std::abs(g);
        double dt_sub = std::min(remaining, move_cap);
        double next = d + g * dt_sub;
        // reject-and-halve when the substep would still overshoot below 0
        while (next <= 0.0 && dt_sub > 1e-300) {
            dt_sub *= 0.5;
            next = d + g * dt_sub;
        }
        d = next;
        remaining -= dt_sub;
        if (floor_level >= 0.0 && d <= floor_level) {
            if (absorbed) *absorbed = true;
            return d;
        }
        if (d < 1e-12) d = 1e-12;
    }
    return d;
}

} // namespace

BesselResult simulate_bessel(const BesselSpec& spec, const NoiseStream& stream,
                             bool store_path) {
    if (!(spec.start > spec.floor_level) || !(spec.floor_level >= 0.0))
        throw std::invalid_argument("simulate_bessel: need start > floor >= 0");
    if (!(spec.horizon > 0.0) || !(spec.dt > 0.0) || !(spec.nu >= 0.0))
        throw std::invalid_argument("simulate_bessel: bad spec");

    const double half_num = 0.5 * (spec.nu - 1.0);
    const auto drift = [half_num](double d) { return half_num / d; };

    BesselResult res;
    double d = spec.start;
    double t = 0.0;
    if (store_path) {
        res.times.push_back(0.0);
        res.values.push_back(d);
    }
    const std::uint64_t max_steps =
        static_cast<std::uint64_t>(std::ceil(spec.horizon / spec.dt));
    const double sd = std::sqrt(spec.dt);
    for (std::uint64_t k = 0; k < max_steps; ++k) {
        bool absorbed = false;
        if (half_num != 0.0) d = drift_flow(d, spec.dt, spec.floor_level, drift, &absorbed);
        if (!absorbed) {
            d += sd * stream.gaussian(k, 0);
            if (d <= spec.floor_level) absorbed = true;
        }
        t += spec.dt;
        if (store_path) {
            res.times.push_back(t);
            res.values.push_back(d);
        }
        if (absorbed) {
            res.hit = true;
            res.hit_time = t;
            break;
        }
    }
    res.final_value = d;
    res.final_time = t;
    return res;
}

double scale_hit_probability(double nu, double x, double a, double b) {
    if (!(0.0 < a && a <= x && x <= b && a < b))
        throw std::invalid_argument("scale_hit_probability: need 0 < a <= x <= b");
    if (x == a) return 1.0;
    if (x == b) return 0.0;
    if (nu == 2.0) {
        const double sx = std::log(x), sa = std::log(a), sb = std::log(b);
        return (sx - sb) / (sa - sb);
    }
    const double e = 2.0 - nu;
    const double sx = std::pow(x, e), sa = std::pow(a, e), sb = std::pow(b, e);
    return (sx - sb) / (sa - sb);
}

double harmonic_exit_prob(double x, int n) {
    if (n < 2) throw std::invalid_argument("harmonic_exit_prob: n must be >= 2");
    if (!(x >= 0.25 && x <= 0.5))
        throw std::invalid_argument("harmonic_exit_prob: x must lie in [1/4, 1/2]");
    // Harmonic for the generator 2(n-1) h' + h''/2, pinned to h(1/4)=1,
    // h(1/2)=0: h(x) = (e^{-4(n-1)x} - e^{-2(n-1)}) / (e^{-(n-1)} - e^{-2(n-1)}).
    const double m = static_cast<double>(n - 1);
    const double num = std::exp(-4.0 * m * x) - std::exp(-2.0 * m);
    const double den = std::exp(-m) - std::exp(-2.0 * m);
    return num / den;
}

WilsonInterval exit_time_tail(int n, std::size_t trials, double x, std::uint64_t seed,
                              double dt, unsigned workers) {
    if (n < 1) throw std::invalid_argument("exit_time_tail: n must be >= 1");
    if (!(x >= 0.0)) throw std::invalid_argument("exit_time_tail: x must be >= 0");
    if (trials < 1) throw std::invalid_argument("exit_time_tail: trials must be >= 1");
    if (x == 0.0) return wilson_interval(trials, trials);

    const std::uint64_t steps = static_cast<std::uint64_t>(std::ceil(x / dt));
    std::vector<unsigned char> survived(trials, 0);
    parallel_for_indexed(trials, workers, [&](std::size_t p) {
        NoiseStream stream(seed, p, n);
        std::vector<double> pos(static_cast<std::size_t>(n), 0.0);
        std::vector<double> dw(static_cast<std::size_t>(n));
        bool out = false;
        for (std::uint64_t k = 0; k < steps; ++k) {
            stream.fill_increment(k, dt, dw);
            double s = 0.0;
            for (std::size_t i = 0; i < pos.size(); ++i) {
                pos[i] += dw[i];
                s += pos[i] * pos[i];
            }
            if (s >= 0.25) {
                out = true;
                break;
            }
        }
        survived[p] = out ? 0 : 1;
    });
    std::size_t count = 0;
    for (auto v : survived) count += v;
    return wilson_interval(count, trials);
}

// ---------------------------------------------------------------------------
// Comparison chain

ChainPath run_comparison_chain_path(int n, const NoiseStream& stream, double dt,
                                    double horizon) {
    if (n < 2) throw std::invalid_argument("comparison chain: n must be >= 2");
    const double m = static_cast<double>(n - 1);

    ChainPath rec;

    // Stage A: n-dimensional Brownian motion from 0 until radius 3/8.
    std::vector<double> pos(static_cast<std::size_t>(n), 0.0);
    std::vector<double> dw(static_cast<std::size_t>(n));
    const double r0sq = (3.0 / 8.0) * (3.0 / 8.0);
    std::uint64_t k = 0;
    const std::uint64_t horizon_steps = static_cast<std::uint64_t>(horizon / dt);
    for (; k < horizon_steps; ++k) {
        stream.fill_increment(k, dt, dw);
        double s = 0.0;
        for (std::size_t i = 0; i < pos.size(); ++i) {
            pos[i] += dw[i];
            s += pos[i] * pos[i];
        }
        if (s >= r0sq) break;
    }
    if (k >= horizon_steps) {
        rec.resolved = false;
        return rec;
    }
    rec.sigma0 = static_cast<double>(k + 1) * dt;

    // Stage B: the three comparison processes share one-dimensional
    // increments, restarted at 3/8 per the strong Markov property.
    const auto bessel_drift = [m](double x) { return 0.5 * m / x; };
    const auto hybrid_drift = [m](double x) {
        return x < 0.25 ? 0.5 * m / x : 2.0 * m;
    };
    const double const_drift = 2.0 * m;

    double d1 = 3.0 / 8.0, d2 = 3.0 / 8.0, d3 = 3.0 / 8.0;
    bool found1 = false, found2 = false, found3 = false, found4 = false, found5 = false;
    const double sd = std::sqrt(dt);
    const std::uint64_t base = k + 1;
    for (std::uint64_t j = 0; j < horizon_steps; ++j) {
        const double z = sd * stream.gaussian(base + j, 0);
        const double t_now = static_cast<double>(j + 1) * dt;
        if (!found1) {
            d1 = drift_flow(d1, dt, -1.0, bessel_drift, nullptr) + z;
            if (d1 < 1e-12) d1 = 1e-12;
        }
        if (!found2) {
            d2 = drift_flow(d2, dt, -1.0, hybrid_drift, nullptr) + z;
            if (d2 < 1e-12) d2 = 1e-12;
        }
        if (!found5) d3 = d3 + const_drift * dt + z;

        // Pathwise comparison: D1 may exceed D2 by at most one drift substep.
        if (!found1 && !found2 && d1 > d2 + 0.05 * d1 + 1e-12) rec.dominance_ok = false;

        if (!found1 && d1 >= 0.5) {
            rec.sigma1 = t_now;
            found1 = true;
        }
        if (!found3 && (d2 <= 0.25 || d2 >= 0.5)) {
            rec.sigma3 = t_now;
            found3 = true;
        }
        if (!found2 && d2 >= 0.5) {
            rec.sigma2 = t_now;
            found2 = true;
        }
        if (!found4 && (d3 <= 0.25 || d3 >= 0.5)) {
            rec.sigma4 = t_now;
            rec.d3_exited_low = (d3 <= 0.25);
            found4 = true;
        }
        if (!found5 && d3 >= 0.5) {
            rec.sigma5 = t_now;
            found5 = true;
        }
        if (found1 && found2 && found3 && found4 && found5) break;
    }
    if (!(found1 && found2 && found3 && found4 && found5)) rec.resolved = false;
    return rec;
}

ComparisonChain run_comparison_chain(int n, std::size_t paths, std::uint64_t seed,
                                     double dt, unsigned workers) {
    ComparisonChain chain;
    chain.n = n;
    chain.dt = dt;
    chain.paths.resize(paths);
    parallel_for_indexed(paths, workers, [&](std::size_t p) {
        NoiseStream stream(seed, p, n);
        chain.paths[p] = run_comparison_chain_path(n, stream, dt);
    });
    return chain;
}

std::size_t ComparisonChain::count_d3_low() const {
    std::size_t c = 0;
    for (const auto& p : paths)
        if (p.resolved && p.d3_exited_low) ++c;
    return c;
}

double ComparisonChain::mean_sigma(int which) const {
    double s = 0.0;
    std::size_t c = 0;
    for (const auto& p : paths) {
        if (!p.resolved) continue;
        switch (which) {
            case 1: s += p.sigma1; break;
            case 2: s += p.sigma2; break;
            case 3: s += p.sigma3; break;
            default: throw std::invalid_argument("mean_sigma: which must be 1..3");
        }
        ++c;
    }
    if (c == 0) throw std::runtime_error("mean_sigma: no resolved paths");
    return s / static_cast<double>(c);
}

} // namespace flowlab
