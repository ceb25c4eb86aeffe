#ifndef FLOWLAB_REGIME_HPP
#define FLOWLAB_REGIME_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "flowlab/flow.hpp"
#include "flowlab/stats.hpp"

namespace flowlab {

/// One resolved rung of a regime ladder. Stage quantities are recorded both
/// in original units (tau, rho) and in the per-stage normalized frame where
/// the previous distance is 1 and the thresholds are 1/2 and 2.
struct LadderStage {
    double tau = 0.0;          // cumulative stage end time, original units
    double rho = 0.0;          // rho_i, an exact power-of-two multiple of rho0
    int x = 0;                 // log2(rho_i / rho_{i-1}) in {-1, +1}
    double b1_end = 0.0;       // stage-end B first coordinate, normalized frame
    double displacement = 0.0; // hitting only: rho_norm + b1_end - 1 at unit scale
};

struct RegimeLadder {
    enum class Kind { NotHitting, Hitting };
    enum class Termination { MaxStages, Horizon, Absorbed };

    Kind kind = Kind::NotHitting;
    Termination termination = Termination::MaxStages;
    double rho0 = 1.0;
    std::vector<LadderStage> stages;
    bool tie_refined = false; // some stage used the 10x substep decision

    bool first_stage_resolved() const { return !stages.empty(); }
    double final_rho() const { return stages.empty() ? rho0 : stages.back().rho; }
};

struct LadderParams {
    int dimension = 2;
    DriftField drift = DriftField::constant(0.0);
    double rho0 = 1.0;
    int max_stages = 1;
    double dt = 1e-4;
    double stage_horizon = 100.0; // per-stage cap in normalized diffusive units
    std::size_t budget = 0;       // boundary tracers; 0 picks 64 * dimension
    double lateral_radius = 8.0;  // hitting ladder: disc truncation m
    double absorb_rho = 0.0;      // hitting ladder: stop once rho <= this
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
};

/// Enlarged-region ladder: each stage restarts from the complement of the
/// ball of the previous distance around the current Brownian position and
/// flows until the distance halves or doubles.
RegimeLadder not_hitting_ladder(const LadderParams& params);

/// Half-space ladder: each stage restarts from the half-space at vertical
/// distance rho above B, boundary truncated to a lateral disc of radius m,
/// and runs until the sup vertical gap halves or doubles.
RegimeLadder hitting_ladder(const LadderParams& params);

std::vector<RegimeLadder> run_ladder_ensemble(RegimeLadder::Kind kind,
                                              const LadderParams& params,
                                              std::size_t count, unsigned workers = 1);

/// First-stage up-step frequency with a Wilson interval and a verdict line
/// against the 1/3, 1/2 and 2/3 reference levels.
struct StepProbability {
    std::size_t resolved = 0;
    std::size_t up = 0;
    WilsonInterval interval;
    std::string verdict;
};

StepProbability step_probability(const std::vector<RegimeLadder>& ensemble);

/// P(X_i = +1) pooled over all resolved stages, and the sign of the mean
/// step via the same interval.
StepProbability pooled_step_probability(const std::vector<RegimeLadder>& ensemble);

/// Lateral and vertical drift-bound kernels integrated along one hitting
/// first stage at a fixed test point, binned by the annulus (centered at the
/// test point's lateral part) containing B-perp. Bin k_infinity+1 collects
/// everything farther out.
struct DriftAccumulator {
    PointN test_point;
    int k_infinity = 1;
    std::vector<double> lateral_by_annulus;  // size k_infinity + 1
    std::vector<double> vertical_by_annulus; // size k_infinity + 1
    double lateral_total = 0.0;              // always the exact sum of the bins
    double vertical_total = 0.0;
    double tau1 = 0.0; // normalized stage duration
    bool stage_resolved = false;
    int x1 = 0;
};

DriftAccumulator drift_accumulators(const LadderParams& params, const PointN& test_point);

/// Empirical P(D_{tau_1} < 1/4 - 2*delta) over the first stages of a hitting
/// ensemble.
WilsonInterval d_bound_check(const std::vector<RegimeLadder>& ensemble, double delta);

/// JSON-lines serialization, one ladder per line.
std::string ladders_to_jsonl(const std::vector<RegimeLadder>& ensemble);

} // namespace flowlab

#endif
