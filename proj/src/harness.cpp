#include "flowlab/harness.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "flowlab/parallel.hpp"
#include "flowlab/serialize.hpp"

namespace flowlab {

HittingEstimate estimate_hitting_probability(const FlowConfig& config, std::size_t paths,
                                             int refine_factor, unsigned workers) {
    if (paths < 1)
        throw std::invalid_argument("estimate_hitting_probability: paths must be >= 1");
    config.validate();

    HittingEstimate est;
    est.config = config;
    est.paths = paths;
    est.threshold = config.hit_threshold();
    est.hit_flags.assign(paths, 0);
    est.tau_hats.assign(paths, std::numeric_limits<double>::quiet_NaN());
    std::vector<unsigned char> refined(paths, 0), changed(paths, 0);

    parallel_for_indexed(paths, workers, [&](std::size_t p) {
        FlowConfig cfg = config;
        cfg.path_index = config.path_index + p;
        NoiseStream stream(cfg.seed, cfg.path_index, cfg.dimension);
        FlowResult res = run_flow(cfg, stream);
        if (!res.hit) {
            double sharpest = std::numeric_limits<double>::infinity();
            for (double d : res.min_distance) sharpest = std::min(sharpest, d);
            if (sharpest <= 3.0 * cfg.hit_threshold()) {
                const bool before = res.hit;
                res = refine_cloud(res, stream, refine_factor);
                refined[p] = 1;
                if (res.hit != before) changed[p] = 1;
            }
        }
        est.hit_flags[p] = res.hit ? 1 : 0;
        if (res.hit) est.tau_hats[p] = res.tau_hat;
    });

    for (std::size_t p = 0; p < paths; ++p) {
        est.hits += est.hit_flags[p];
        est.refined_count += refined[p];
        est.verdict_changed += changed[p];
    }
    est.interval = wilson_interval(est.hits, paths);
    est.refinement_changed_fraction =
        static_cast<double>(est.verdict_changed) / static_cast<double>(paths);
    return est;
}

std::string HittingEstimate::to_json_string() const {
    nlohmann::json j;
    j["config"] = flow_config_to_json(config);
    j["paths"] = paths;
    j["hits"] = hits;
    j["p_hat"] = interval.p_hat;
    j["wilson_lo"] = interval.lo;
    j["wilson_hi"] = interval.hi;
    j["threshold"] = threshold;
    j["refined_count"] = refined_count;
    j["verdict_changed"] = verdict_changed;
    j["refinement_changed_fraction"] = refinement_changed_fraction;
    return j.dump(2);
}

Region region_with_dimension(const Region& region, int n) {
    switch (region.kind) {
        case Region::Kind::HalfSpace:
            return Region::half_space(n, region.level, region.lateral_radius);
        case Region::Kind::BallComplement: {
            PointN center(static_cast<std::size_t>(n), 0.0);
            for (std::size_t c = 0; c < center.size() && c < region.center.size(); ++c)
                center[c] = region.center[c];
            return Region::ball_complement(n, std::move(center), region.radius);
        }
        case Region::Kind::LateralDisc: {
            std::vector<double> lc(static_cast<std::size_t>(n - 1), 0.0);
            for (std::size_t c = 0; c < lc.size() && c < region.lateral_center.size(); ++c)
                lc[c] = region.lateral_center[c];
            return Region::lateral_disc(n, region.level, region.lateral_radius, std::move(lc));
        }
        case Region::Kind::Cylinder: {
            PointN corner(static_cast<std::size_t>(n), 0.0);
            corner[0] = region.level;
            for (std::size_t c = 1; c < corner.size(); ++c)
                if (c - 1 < region.lateral_center.size())
                    corner[c] = region.lateral_center[c - 1];
            return Region::cylinder(n, corner, region.delta);
        }
    }
    return region;
}

SweepTable phase_sweep(const std::vector<int>& n_list, const std::vector<double>& c_list,
                       const std::vector<double>& alpha_list, std::size_t paths_per_cell,
                       const FlowConfig& base, unsigned workers) {
    if (n_list.empty() || c_list.empty() || alpha_list.empty())
        throw std::invalid_argument("phase_sweep: empty grid");
    SweepTable table;
    std::uint64_t cell_index = 0;
    for (int n : n_list) {
        for (double alpha : alpha_list) {
            for (double c : c_list) {
                SweepCell cell;
                cell.n = n;
                cell.c = c;
                cell.alpha = alpha;
                cell.drift_value = c * std::pow(static_cast<double>(n), alpha);
                cell.cell_seed = base.seed + 1000003ULL * cell_index;

                FlowConfig cfg = base;
                cfg.dimension = n;
                cfg.drift = DriftField::constant(cell.drift_value);
                cfg.region = region_with_dimension(base.region, n);
                cfg.seed = cell.cell_seed;
                cfg.path_index = 0;
                cell.estimate =
                    estimate_hitting_probability(cfg, paths_per_cell, 8, workers);
                table.cells.push_back(std::move(cell));
                ++cell_index;
            }
        }
    }
    return table;
}

std::string SweepTable::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "n,c,alpha,F,paths,hits,p_hat,lo,hi,threshold,refined,changed_fraction,seed\n";
    for (const auto& cell : cells) {
        const auto& e = cell.estimate;
        os << cell.n << ',' << cell.c << ',' << cell.alpha << ',' << cell.drift_value << ','
           << e.paths << ',' << e.hits << ',' << e.interval.p_hat << ',' << e.interval.lo << ','
           << e.interval.hi << ',' << e.threshold << ',' << e.refined_count << ','
           << e.refinement_changed_fraction << ',' << cell.cell_seed << '\n';
    }
    return os.str();
}

std::string SweepTable::monotone_summary() const {
    std::ostringstream os;
    os.precision(4);
    // group cells by (n, alpha) preserving insertion order
    for (std::size_t i = 0; i < cells.size(); ++i) {
        bool first_of_group = true;
        for (std::size_t j = 0; j < i; ++j)
            if (cells[j].n == cells[i].n && cells[j].alpha == cells[i].alpha)
                first_of_group = false;
        if (!first_of_group) continue;
        std::vector<const SweepCell*> group;
        for (const auto& c : cells)
            if (c.n == cells[i].n && c.alpha == cells[i].alpha) group.push_back(&c);
        os << "n=" << cells[i].n << " alpha=" << cells[i].alpha << ":";
        bool nonincreasing = true;
        for (std::size_t g = 0; g < group.size(); ++g) {
            os << " p(c=" << group[g]->c << ")=" << group[g]->estimate.interval.p_hat;
            if (g > 0 && group[g]->estimate.interval.p_hat >
                             group[g - 1]->estimate.interval.p_hat + 1e-12)
                nonincreasing = false;
        }
        os << " | nonincreasing in c: " << (nonincreasing ? "yes" : "no") << '\n';
    }
    return os.str();
}

HittingEstimate cylinder_experiment(const PointN& corner, double delta, FlowConfig base,
                                    std::size_t paths, unsigned workers) {
    if (corner.empty() || !(corner[0] > 0.0))
        throw std::invalid_argument("cylinder_experiment: corner must have a1 > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("cylinder_experiment: delta must be > 0");
    base.dimension = static_cast<int>(corner.size());
    base.region = Region::cylinder(base.dimension, corner, delta);
    return estimate_hitting_probability(base, paths, 8, workers);
}

} // namespace flowlab
