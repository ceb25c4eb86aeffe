#include "flowlab/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "flowlab/parallel.hpp"

namespace flowlab {

double occupation_time(const BrownianPath& path, const PointN& center, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("occupation_time: r must be > 0");
    if (static_cast<int>(center.size()) != path.dimension)
        throw std::invalid_argument("occupation_time: center dimension mismatch");
    const double r2 = r * r;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
        const auto p = path.position(k);
        double d2 = 0.0;
        for (std::size_t c = 0; c < center.size(); ++c) {
            const double dy = p[c] - center[c];
            d2 += dy * dy;
        }
        if (d2 <= r2) total += path.times[k + 1] - path.times[k];
    }
    return total;
}

std::vector<double> occupation_annuli(const BrownianPath& path, const PointN& center,
                                      int k_max) {
    if (k_max < 1) throw std::invalid_argument("occupation_annuli: k_max must be >= 1");
    if (static_cast<int>(center.size()) != path.dimension)
        throw std::invalid_argument("occupation_annuli: center dimension mismatch");
    std::vector<double> bins(static_cast<std::size_t>(k_max) + 1, 0.0);
    std::vector<double> outer2(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        const double rad = 2.0 * std::exp(static_cast<double>(k));
        outer2[static_cast<std::size_t>(k - 1)] = rad * rad;
    }
    for (std::size_t s = 0; s + 1 < path.times.size(); ++s) {
        const auto p = path.position(s);
        double d2 = 0.0;
        for (std::size_t c = 0; c < center.size(); ++c) {
            const double dy = p[c] - center[c];
            d2 += dy * dy;
        }
        const double dt = path.times[s + 1] - path.times[s];
        std::size_t bin = static_cast<std::size_t>(k_max); // beyond the last annulus
        for (std::size_t k = 0; k < outer2.size(); ++k)
            if (d2 < outer2[k]) {
                bin = k;
                break;
            }
        bins[bin] += dt;
    }
    return bins;
}

// ---------------------------------------------------------------------------
// Total occupation sampler

double OccupationSampleSpec::effective_escape_radius() const {
    if (escape_radius > 0.0) return escape_radius;
    // escape chosen so the probability of ever returning to the ball,
    // R^(2-d), is at most 0.2%; graded far steps keep the cost logarithmic
    const double d = static_cast<double>(dimension);
    const double factor = std::max(3.0, std::exp(std::log(500.0) / (d - 2.0)));
    return radius * factor;
}

double OccupationSampleSpec::effective_horizon() const {
    if (horizon > 0.0) return horizon;
    const double resc = effective_escape_radius();
    return std::max(50.0, 40.0 * resc * resc / static_cast<double>(dimension));
}

OccupationSample sample_total_occupation(const OccupationSampleSpec& spec,
                                         const NoiseStream& stream) {
    if (spec.dimension < 3)
        throw std::invalid_argument("sample_total_occupation: needs a transient dimension (>= 3)");
    if (!(spec.radius > 0.0) || !(spec.dt > 0.0))
        throw std::invalid_argument("sample_total_occupation: bad spec");
    if (stream.dimension() != spec.dimension)
        throw std::invalid_argument("sample_total_occupation: stream dimension mismatch");

    const auto d = static_cast<std::size_t>(spec.dimension);
    const double r = spec.radius;
    const double r2 = r * r;
    const double escape = spec.effective_escape_radius();
    const double escape2 = escape * escape;
    const double horizon = spec.effective_horizon();

    std::vector<double> pos(d, 0.0);
    std::vector<double> dw(d);
    OccupationSample out;
    double t = 0.0;
    double d2 = 0.0;
    std::uint64_t k = 0;
    while (t < horizon) {
        // Inside or near the ball: fixed resolution dt. Far away: exact
        // Gaussian steps sized so an unseen excursion back to the ball is an
        // 8-sigma event.
        double step = spec.dt;
        if (d2 > r2) {
            const double gap = std::sqrt(d2) - r;
            const double far = (gap / 8.0) * (gap / 8.0);
            step = std::max(spec.dt, far);
        } else {
            out.occupation += spec.dt; // left endpoint is inside
        }
        stream.fill_increment(k++, step, dw);
        d2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            pos[c] += dw[c];
            d2 += pos[c] * pos[c];
        }
        t += step;
        if (d2 >= escape2) {
            out.converged = true;
            break;
        }
    }
    out.elapsed = t;
    return out;
}

double sample_unit_ball_exit(int n, const NoiseStream& stream, double dt) {
    if (n < 1) throw std::invalid_argument("sample_unit_ball_exit: n must be >= 1");
    const auto d = static_cast<std::size_t>(n);
    std::vector<double> pos(d, 0.0);
    std::vector<double> dw(d);
    double gap_prev = 1.0; // 1 - |pos|
    std::uint64_t k = 0;
    for (;;) {
        stream.fill_increment(k++, dt, dw);
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            pos[c] += dw[c];
            s += pos[c] * pos[c];
        }
        if (s >= 1.0) return static_cast<double>(k) * dt;
        // Brownian-bridge test on the radial gap: the path may have touched
        // the sphere between samples even though both endpoints are inside.
        // Removes the O(sqrt(dt)) late-detection bias of pure sampling.
        const double gap = 1.0 - std::sqrt(s);
        const double p_cross = std::exp(-2.0 * gap_prev * gap / dt);
        if (stream.uniform(k - 1) < p_cross) return static_cast<double>(k) * dt;
        gap_prev = gap;
    }
}

// ---------------------------------------------------------------------------

TailCurve occupation_tail(int n, double r, const std::vector<double>& s_grid,
                          std::size_t trials, std::uint64_t seed, double dt,
                          unsigned workers) {
    if (n < 4) throw std::invalid_argument("occupation_tail: n must be >= 4");
    if (!(r > 0.0)) throw std::invalid_argument("occupation_tail: r must be > 0");
    if (s_grid.empty() || trials < 1)
        throw std::invalid_argument("occupation_tail: empty grid or no trials");
    for (double s : s_grid)
        if (!(s > 0.0)) throw std::invalid_argument("occupation_tail: s values must be > 0");

    OccupationSampleSpec spec;
    spec.dimension = n - 1;
    spec.radius = r;
    spec.dt = dt;

    TailCurve curve;
    curve.n = n;
    curve.radius = r;
    curve.trials = trials;
    curve.scaled_samples.resize(trials);
    std::vector<unsigned char> flags(trials, 0);
    parallel_for_indexed(trials, workers, [&](std::size_t p) {
        NoiseStream stream(seed, p, n - 1);
        const auto sample = sample_total_occupation(spec, stream);
        curve.scaled_samples[p] = sample.occupation / (r * r);
        flags[p] = sample.converged ? 0 : 1;
    });
    for (auto f : flags) curve.nonconverged += f;

    const double regime_edge = 8.0 / static_cast<double>(n);
    std::vector<double> fit_x, fit_y;
    for (double s : s_grid) {
        TailPoint pt;
        pt.s = s;
        pt.in_paper_regime = s > regime_edge;
        std::size_t exceed = 0;
        for (double v : curve.scaled_samples)
            if (v > s) ++exceed;
        pt.exceedances = exceed;
        pt.survival = wilson_interval(exceed, trials);
        if (exceed >= 50) {
            fit_x.push_back(s);
            fit_y.push_back(std::log(static_cast<double>(exceed) / static_cast<double>(trials)));
        }
        curve.points.push_back(pt);
    }
    if (fit_x.size() >= 2) {
        curve.fitted_rate = -linear_fit(fit_x, fit_y).slope;
        curve.rate_valid = true;
    }
    return curve;
}

std::string TailCurve::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "n,r,s,survival,lo,hi,exceedances,in_paper_regime\n";
    for (const auto& p : points)
        os << n << ',' << radius << ',' << p.s << ',' << p.survival.p_hat << ','
           << p.survival.lo << ',' << p.survival.hi << ',' << p.exceedances << ','
           << (p.in_paper_regime ? 1 : 0) << '\n';
    return os.str();
}

CtSummary ct_identity_check(int n, std::size_t samples, double dt, std::uint64_t seed,
                            unsigned workers) {
    if (n < 1) throw std::invalid_argument("ct_identity_check: n must be >= 1");
    if (samples < 2) throw std::invalid_argument("ct_identity_check: need >= 2 samples");

    CtSummary out;
    out.n = n;
    out.samples = samples;
    out.exit_samples.resize(samples);
    out.occupation_samples.resize(samples);
    std::vector<unsigned char> flags(samples, 0);

    OccupationSampleSpec spec;
    spec.dimension = n + 2;
    spec.dt = dt;

    parallel_for_indexed(samples, workers, [&](std::size_t p) {
        NoiseStream exit_stream(seed, 2 * p, n);
        out.exit_samples[p] = sample_unit_ball_exit(n, exit_stream, dt);
        NoiseStream occ_stream(seed, 2 * p + 1, n + 2);
        const auto occ = sample_total_occupation(spec, occ_stream);
        out.occupation_samples[p] = occ.occupation;
        flags[p] = occ.converged ? 0 : 1;
    });
    for (auto f : flags) out.nonconverged += f;
    out.mean_exit = mean(out.exit_samples);
    out.mean_occupation = mean(out.occupation_samples);
    out.ks = ks_two_sample(out.exit_samples, out.occupation_samples);
    return out;
}

} // namespace flowlab
