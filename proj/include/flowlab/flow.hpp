#ifndef FLOWLAB_FLOW_HPP
#define FLOWLAB_FLOW_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "flowlab/geometry.hpp"
#include "flowlab/noise.hpp"

namespace flowlab {

/// Everything one flow realization needs. The hit threshold is exactly the
/// truncation radius 1/N.
struct FlowConfig {
    int dimension = 1;
    DriftField drift = DriftField::constant(0.0);
    double truncation = 100.0; // N
    double horizon = 10.0;
    double dt = 1e-4;
    Region region = Region::half_space(1, 1.0, 1.0);
    std::size_t tracer_budget = 128;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;

    double hit_threshold() const { return 1.0 / truncation; }
    void validate() const;
};

/// Labeled tracer set discretizing the initial region; positions are stored
/// flat, tracer i at psi[i*n .. i*n+n).
struct TracerCloud {
    int dimension = 1;
    std::vector<int> labels;
    std::vector<double> initial;
    std::vector<double> psi;
    double time = 0.0;
    bool terminated = false;
    double spacing_hint = 0.0; // typical inter-tracer gap, refinement uses it

    std::size_t size() const { return labels.size(); }
    std::span<const double> tracer(std::size_t i) const {
        return {psi.data() + i * static_cast<std::size_t>(dimension),
                static_cast<std::size_t>(dimension)};
    }
    std::span<const double> tracer_initial(std::size_t i) const {
        return {initial.data() + i * static_cast<std::size_t>(dimension),
                static_cast<std::size_t>(dimension)};
    }
};

/// Quasi-uniform deterministic placement on the region's boundary.
/// Labels are stable across calls with the same region and budget.
TracerCloud discretize_region(const Region& region, std::size_t budget);

/// One outer step of the translated flow: B moves by its increment once,
/// then every tracer integrates the drift ODE over dt with adaptive
/// substeps. Throws if the cloud is terminated.
void advance_cloud(TracerCloud& cloud, PointN& b, const PointN& b_increment,
                   double dt, const DriftField& drift, double truncation);

struct FlowResult {
    FlowConfig config;
    bool hit = false;
    double tau_hat = std::numeric_limits<double>::quiet_NaN();
    int hit_label = -1;
    std::size_t steps_run = 0;
    std::vector<double> min_distance; // per outer step, at the post-noise state
    std::vector<int> argmin_label;
    TracerCloud final_cloud;
    PointN final_b;
    double skipped_drift_bound = 0.0; // far-field shortcut error budget
    bool refined = false;
    bool budget_exhausted = false;
};

/// Integrates the translated flow to the horizon or to the first step whose
/// post-noise tracer distance to B is <= 1/N.
FlowResult run_flow(const FlowConfig& config, const NoiseStream& stream);

/// Re-runs extra tracers seeded around the argmin tracer's initial position
/// (neighborhood shrunk by `factor`) along the identical noise, and merges.
/// The merged minimum distance can only decrease.
FlowResult refine_cloud(const FlowResult& result, const NoiseStream& stream, int factor,
                        std::size_t max_extra_tracers = 4096);

/// Space-time rescaling of a finished record: positions scale by lambda,
/// times by lambda^2, and the config becomes the one the transformed record
/// solves (drift F(./lambda), truncation N/lambda, region scaled).
FlowResult scale_solution(const FlowResult& result, double lambda);

/// JSON text of a result; the min-distance series is downsampled to at most
/// `max_series_points` entries (0 keeps everything).
std::string flow_result_to_json(const FlowResult& result, std::size_t max_series_points = 2000);

// ---------------------------------------------------------------------------
// Stepping engine shared by run_flow and the regime ladders.

/// Supplies the Brownian increment of outer step k (already scaled by
/// sqrt(dt)); lets scaling tests drive the flow with transformed noise.
using IncrementFn = std::function<void(std::uint64_t step, std::span<double> out)>;

IncrementFn standard_increments(const NoiseStream& stream, double dt);

class FlowIntegrator {
public:
    FlowIntegrator(TracerCloud cloud, PointN b_start, DriftField drift,
                   double truncation, double dt, IncrementFn increments);

    /// Advances one outer step. Returns false once terminated (hit).
    bool step();

    bool terminated() const { return terminated_; }
    double time() const { return time_; }
    std::uint64_t steps_done() const { return step_; }
    double min_distance() const { return last_min_distance_; }
    int argmin_label() const;
    double psi1_min() const { return psi1_min_; }
    double psi1_max() const { return psi1_max_; }
    const PointN& b() const { return b_; }
    const TracerCloud& cloud() const { return cloud_; }
    TracerCloud take_cloud() { return std::move(cloud_); }
    double skipped_drift_bound() const { return skipped_bound_; }

    /// Hit checks compare against this; 0 disables hit termination.
    void set_hit_threshold(double threshold) { hit_threshold_ = threshold; }

    /// When false, step() skips the per-tracer distance scan (the hitting
    /// ladder only needs first-coordinate aggregates).
    void set_compute_min_distance(bool on) { compute_min_distance_ = on; }

    /// Advance B by coordinate 0 only; valid while the drift is identically
    /// zero and min-distance scans are off. Counter indexing is unchanged,
    /// so mixing with full steps keeps the same noise.
    bool step_b_first_coordinate_only();

    /// Lightweight state for replaying one step at finer resolution.
    struct Snapshot {
        std::vector<double> psi;
        PointN b;
        std::uint64_t step;
        double time;
        double psi1_min, psi1_max;
        double skipped_bound;
    };
    Snapshot snapshot() const;
    void restore(const Snapshot& s);

    /// Re-runs the upcoming outer step as `pieces` equal sub-steps of the
    /// same increment (noise split linearly); after each piece the callback
    /// sees the refreshed state and may stop early by returning true. Used
    /// by the regime ladders to order near-simultaneous threshold crossings.
    void step_in_pieces(int pieces, const std::function<bool(int)>& after_piece);

private:
    bool step_impl(int pieces, const std::function<bool(int)>* after_piece);
    void distance_pass();
    void drift_pass(double span, bool have_dist2);
    void refresh_psi1_aggregates();

    TracerCloud cloud_;
    PointN b_;
    DriftField drift_;
    double truncation_;
    double dt_;
    IncrementFn increments_;
    std::uint64_t step_ = 0;
    double time_ = 0.0;
    bool terminated_ = false;
    double hit_threshold_ = 0.0;
    bool compute_min_distance_ = true;
    double last_min_distance_ = std::numeric_limits<double>::infinity();
    std::size_t argmin_index_ = 0;
    double psi1_min_ = 0.0;
    double psi1_max_ = 0.0;
    double skipped_bound_ = 0.0;
    std::vector<double> dw_;
    std::vector<double> dist2_;
};

} // namespace flowlab

#endif
