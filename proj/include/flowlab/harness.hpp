#ifndef FLOWLAB_HARNESS_HPP
#define FLOWLAB_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "flowlab/flow.hpp"
#include "flowlab/stats.hpp"

namespace flowlab {

/// Monte Carlo estimate of the hitting probability, with the near-miss
/// refinement pass folded in. Paths whose sharpest approach lies within
/// three hit thresholds get one refinement; the fraction whose verdict
/// changed is a mandatory output.
struct HittingEstimate {
    FlowConfig config; // path_index is the ensemble base
    std::size_t paths = 0;
    std::size_t hits = 0;
    WilsonInterval interval;
    double threshold = 0.0;
    std::size_t refined_count = 0;
    std::size_t verdict_changed = 0;
    double refinement_changed_fraction = 0.0;
    std::vector<unsigned char> hit_flags; // per path, after refinement
    std::vector<double> tau_hats;         // NaN when no hit

    std::string to_json_string() const;
};

HittingEstimate estimate_hitting_probability(const FlowConfig& config, std::size_t paths,
                                             int refine_factor = 8, unsigned workers = 1);

/// Phase-diagram sweep: F = c * n^alpha over the given grids. Every cell
/// records its own seed material and is reproducible in isolation.
struct SweepCell {
    int n = 0;
    double c = 0.0;
    double alpha = 0.0;
    double drift_value = 0.0;
    std::uint64_t cell_seed = 0;
    HittingEstimate estimate;
};

struct SweepTable {
    std::vector<SweepCell> cells;
    std::string to_csv() const;
    /// trend lines of hit rate vs c at fixed (n, alpha)
    std::string monotone_summary() const;
};

SweepTable phase_sweep(const std::vector<int>& n_list, const std::vector<double>& c_list,
                       const std::vector<double>& alpha_list, std::size_t paths_per_cell,
                       const FlowConfig& base, unsigned workers = 1);

/// Thm 1.3 surrogate: initial set is the cylinder C_delta(a).
HittingEstimate cylinder_experiment(const PointN& corner, double delta, FlowConfig base,
                                    std::size_t paths, unsigned workers = 1);

/// Rebuilds a region template in another ambient dimension (shape parameters
/// kept, centers zero-padded or truncated).
Region region_with_dimension(const Region& region, int n);

} // namespace flowlab

#endif
