#include "flowlab/pathcover.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "flowlab/parallel.hpp"

namespace flowlab {

CoverAccumulator::CoverAccumulator(double radius, double horizon) {
    if (!(radius > 0.0)) throw std::invalid_argument("CoverAccumulator: radius must be > 0");
    report_.radius = radius;
    report_.horizon = horizon;
}

void CoverAccumulator::start(std::span<const double> position) {
    center_.assign(position.begin(), position.end());
    report_.centers.emplace_back(center_);
    report_.open_times.push_back(0.0);
    open_time_ = 0.0;
    open_ = true;
}

void CoverAccumulator::feed(double time, std::span<const double> position) {
    if (!open_) throw std::logic_error("CoverAccumulator: feed before start");
    double d2 = 0.0;
    for (std::size_t c = 0; c < center_.size(); ++c) {
        const double dy = position[c] - center_[c];
        d2 += dy * dy;
    }
    if (d2 >= report_.radius * report_.radius) {
        report_.exit_durations.push_back(time - open_time_);
        if (time < report_.horizon) {
            center_.assign(position.begin(), position.end());
            report_.centers.emplace_back(center_);
            report_.open_times.push_back(time);
            open_time_ = time;
        } else {
            open_ = false;
        }
    }
}

CoverReport CoverAccumulator::take() { return std::move(report_); }

CoverReport sequential_cover(const BrownianPath& path, double r) {
    if (path.times.empty()) throw std::invalid_argument("sequential_cover: empty path");
    CoverAccumulator acc(r, path.times.back());
    acc.start(path.position(0));
    for (std::size_t i = 1; i < path.times.size(); ++i)
        acc.feed(path.times[i], path.position(i));
    return acc.take();
}

WilsonInterval exit_time_minimum_tail(int n, std::size_t m, double K, std::size_t trials,
                                      std::uint64_t seed, double dt, unsigned workers) {
    if (n < 1) throw std::invalid_argument("exit_time_minimum_tail: n must be >= 1");
    if (m < 1) throw std::invalid_argument("exit_time_minimum_tail: m must be >= 1");
    if (!(K > 0.0 && K < 0.125))
        throw std::invalid_argument("exit_time_minimum_tail: K must lie in (0, 1/8)");
    const double cutoff = K / static_cast<double>(n);

    std::vector<unsigned char> happened(trials, 0);
    parallel_for_indexed(trials, workers, [&](std::size_t trial) {
        NoiseStream stream(seed, trial, n);
        std::vector<double> pos(static_cast<std::size_t>(n), 0.0);
        std::vector<double> dw(static_cast<std::size_t>(n));
        std::uint64_t k = 0;
        for (std::size_t exit = 0; exit < m; ++exit) {
            std::uint64_t steps_this_exit = 0;
            double d2 = 0.0;
            std::fill(pos.begin(), pos.end(), 0.0);
            do {
                stream.fill_increment(k++, dt, dw);
                ++steps_this_exit;
                d2 = 0.0;
                for (std::size_t c = 0; c < pos.size(); ++c) {
                    pos[c] += dw[c];
                    d2 += pos[c] * pos[c];
                }
            } while (d2 < 1.0);
            if (static_cast<double>(steps_this_exit) * dt < cutoff) {
                happened[trial] = 1;
                break;
            }
        }
    });
    std::size_t count = 0;
    for (auto v : happened) count += v;
    return wilson_interval(count, trials);
}

CoverReport sample_lateral_cover(int lateral_dimension, double radius, double horizon,
                                 const NoiseStream& stream, double dt) {
    if (lateral_dimension < 1)
        throw std::invalid_argument("sample_lateral_cover: lateral dimension must be >= 1");
    if (stream.dimension() != lateral_dimension)
        throw std::invalid_argument("sample_lateral_cover: stream dimension mismatch");
    const auto d = static_cast<std::size_t>(lateral_dimension);
    std::vector<double> pos(d, 0.0);
    std::vector<double> dw(d);
    CoverAccumulator acc(radius, horizon);
    acc.start(pos);
    const auto steps = static_cast<std::uint64_t>(std::ceil(horizon / dt));
    for (std::uint64_t k = 0; k < steps; ++k) {
        stream.fill_increment(k, dt, dw);
        for (std::size_t c = 0; c < d; ++c) pos[c] += dw[c];
        acc.feed(static_cast<double>(k + 1) * dt, pos);
    }
    return acc.take();
}

CoverScalingTable cover_scaling_study(const std::vector<int>& n_list, double horizon,
                                      const std::vector<double>& radii,
                                      std::size_t paths_per_cell, std::uint64_t seed,
                                      double dt, unsigned workers) {
    if (n_list.empty() || radii.empty())
        throw std::invalid_argument("cover_scaling_study: empty grid");
    if (paths_per_cell < 2)
        throw std::invalid_argument("cover_scaling_study: need >= 2 paths per cell");

    CoverScalingTable table;
    std::uint64_t cell_seed_offset = 0;
    for (int n : n_list) {
        if (n < 2) throw std::invalid_argument("cover_scaling_study: n must be >= 2");
        const int k_max = static_cast<int>(std::ceil(std::log(static_cast<double>(n)) / 2.0));
        for (double r : radii) {
            // accept radii e^k for integer k within the paper's ladder range
            const double k_real = std::log(r);
            const int k = static_cast<int>(std::lround(k_real));
            if (std::abs(k_real - k) > 1e-9 || k < 1 || k > k_max) continue;

            CoverCell cell;
            cell.n = n;
            cell.radius = r;
            cell.horizon = horizon;
            cell.paths = paths_per_cell;
            cell.counts.resize(paths_per_cell);
            const std::uint64_t cell_seed = seed + 1000003ULL * cell_seed_offset;
            parallel_for_indexed(paths_per_cell, workers, [&](std::size_t p) {
                NoiseStream stream(cell_seed, p, n - 1);
                const auto rep = sample_lateral_cover(n - 1, r, horizon, stream, dt);
                cell.counts[p] = static_cast<double>(rep.count());
            });
            cell.mean_count = mean(cell.counts);
            cell.stderr_count = sample_stddev(cell.counts) /
                                std::sqrt(static_cast<double>(paths_per_cell));
            table.cells.push_back(std::move(cell));
            ++cell_seed_offset;
        }
    }

    // per-n slope of log mean count vs log radius
    for (int n : n_list) {
        std::vector<double> lx, ly;
        for (const auto& c : table.cells)
            if (c.n == n && c.mean_count > 0.0) {
                lx.push_back(std::log(c.radius));
                ly.push_back(std::log(c.mean_count));
            }
        if (lx.size() >= 2) table.slope_by_n.emplace_back(n, linear_fit(lx, ly).slope);
    }
    // per-radius linear coefficient of mean count vs n
    for (double r : radii) {
        std::vector<double> xs, ys;
        for (const auto& c : table.cells)
            if (c.radius == r) {
                xs.push_back(static_cast<double>(c.n));
                ys.push_back(c.mean_count);
            }
        if (xs.size() >= 2) table.count_vs_n_coeff.emplace_back(r, linear_fit(xs, ys).slope);
    }
    return table;
}

std::string CoverScalingTable::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "n,r,T,mean_count,stderr,path_count\n";
    for (const auto& c : cells)
        os << c.n << ',' << c.radius << ',' << c.horizon << ',' << c.mean_count << ','
           << c.stderr_count << ',' << c.paths << '\n';
    return os.str();
}

} // namespace flowlab
