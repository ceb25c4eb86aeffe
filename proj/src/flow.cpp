#include "flowlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace flowlab {

namespace {

constexpr double kDriftSkipMagnitude = 1e-8;
constexpr std::uint64_t kPlacementSeed = 0x9C0FFEE5EED5ULL;

// Deterministic quasi-uniform unit direction #idx in R^d. Antithetic pairing
// spreads the sample; purely a function of (d, idx).
std::vector<double> placement_direction(int d, std::size_t idx) {
    std::vector<double> v(static_cast<std::size_t>(d));
    const NoiseStream h(kPlacementSeed, idx / 2, d);
    for (;;) {
        for (int c = 0; c < d; ++c) v[static_cast<std::size_t>(c)] = h.gaussian(0, c);
        const double r = norm(v);
        if (r > 1e-12) {
            const double sgn = (idx % 2 == 0) ? 1.0 : -1.0;
            for (auto& x : v) x *= sgn / r;
            return v;
        }
    }
}

// Volume-stratified points of the d-ball of given radius about `center`,
// written as consecutive d-tuples. Point 0 is the center.
void fill_ball_points(int d, std::span<const double> center, double radius,
                      std::size_t count, std::vector<double>& out) {
    for (std::size_t i = 0; i < count; ++i) {
        if (i == 0) {
            out.insert(out.end(), center.begin(), center.end());
            continue;
        }
        const double frac = (static_cast<double>(i) - 0.5) / static_cast<double>(count - 1);
        const double r = radius * std::pow(frac, 1.0 / static_cast<double>(d));
        const auto dir = placement_direction(d, i);
        for (int c = 0; c < d; ++c)
            out.push_back(center[static_cast<std::size_t>(c)] + r * dir[static_cast<std::size_t>(c)]);
    }
}

// Advances one tracer's drift ODE over `span` with B fixed. dy/d2 of the
// starting state may be supplied to avoid recomputation.
void drift_advance_tracer(double* psi, const double* b, int n, double span,
                          const DriftField& field, double inv_trunc,
                          double* skipped_bound, double d2_hint) {
    const auto sq = [&](const double* p) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) {
            const double dy = p[c] - b[c];
            s += dy * dy;
        }
        return s;
    };
    double d2 = d2_hint >= 0.0 ? d2_hint : sq(psi);
    double remaining = span;
    while (remaining > 0.0) {
        const double d = std::sqrt(d2);
        if (d == 0.0) return; // u(0) = 0, no drift
        const double denom = std::max(d, inv_trunc);
        const double fmag = field(d) / denom;
        if (fmag < kDriftSkipMagnitude) {
            // far-field shortcut: drop the rest of the step, book the bound
            if (skipped_bound) *skipped_bound += fmag * remaining;
            return;
        }
        const double dt_sub = std::min(remaining, 0.05 * d / fmag);
        const double scale = fmag * dt_sub / d; // move = scale * (psi - b)
        for (int c = 0; c < n; ++c) psi[c] += scale * (psi[c] - b[c]);
        remaining -= dt_sub;
        if (remaining > 0.0) d2 = sq(psi);
    }
}

} // namespace

// ---------------------------------------------------------------------------
// FlowConfig

void FlowConfig::validate() const {
    if (dimension < 1) throw std::invalid_argument("FlowConfig: dimension must be >= 1");
    if (region.dimension != dimension)
        throw std::invalid_argument("FlowConfig: region dimension mismatch");
    if (!(truncation > 0.0)) throw std::invalid_argument("FlowConfig: truncation must be > 0");
    if (!(horizon > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("FlowConfig: horizon and dt must be > 0");
    if (tracer_budget < 1) throw std::invalid_argument("FlowConfig: tracer budget must be >= 1");
    if (!(hit_threshold() < region.distance_to_origin()))
        throw std::invalid_argument(
            "FlowConfig: hit threshold 1/N must be below the initial region distance");
}

// ---------------------------------------------------------------------------
// discretize_region

TracerCloud discretize_region(const Region& region, std::size_t budget) {
    if (budget < 1) throw std::invalid_argument("discretize_region: budget must be >= 1");
    const int n = region.dimension;
    TracerCloud cloud;
    cloud.dimension = n;

    auto& pts = cloud.initial;
    switch (region.kind) {
        case Region::Kind::HalfSpace:
        case Region::Kind::LateralDisc: {
            const double level = region.level;
            const double m = region.lateral_radius;
            if (n == 1) {
                pts.push_back(level);
                cloud.spacing_hint = 1.0;
                break;
            }
            const int d = n - 1;
            if (d == 1) {
                const double c0 = region.lateral_center[0];
                if (budget == 1) {
                    pts.push_back(level);
                    pts.push_back(c0);
                } else {
                    for (std::size_t i = 0; i < budget; ++i) {
                        const double t = static_cast<double>(i) / static_cast<double>(budget - 1);
                        pts.push_back(level);
                        pts.push_back(c0 - m + 2.0 * m * t);
                    }
                }
                cloud.spacing_hint = budget > 1 ? 2.0 * m / static_cast<double>(budget - 1) : m;
            } else {
                std::vector<double> lateral;
                fill_ball_points(d, region.lateral_center, m, budget, lateral);
                for (std::size_t i = 0; i < budget; ++i) {
                    pts.push_back(level);
                    for (int c = 0; c < d; ++c)
                        pts.push_back(lateral[i * static_cast<std::size_t>(d) +
                                              static_cast<std::size_t>(c)]);
                }
                cloud.spacing_hint =
                    2.0 * m / std::pow(static_cast<double>(budget), 1.0 / static_cast<double>(d));
            }
            break;
        }
        case Region::Kind::BallComplement: {
            const double rho = region.radius;
            if (n == 1) {
                pts.push_back(region.center[0] - rho);
                if (budget > 1) pts.push_back(region.center[0] + rho);
                cloud.spacing_hint = rho;
                break;
            }
            if (n == 2) {
                for (std::size_t i = 0; i < budget; ++i) {
                    const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) /
                                         static_cast<double>(budget);
                    pts.push_back(region.center[0] + rho * std::cos(theta));
                    pts.push_back(region.center[1] + rho * std::sin(theta));
                }
                cloud.spacing_hint = rho * 2.0 * std::numbers::pi / static_cast<double>(budget);
            } else {
                for (std::size_t i = 0; i < budget; ++i) {
                    const auto dir = placement_direction(n, i);
                    for (int c = 0; c < n; ++c)
                        pts.push_back(region.center[static_cast<std::size_t>(c)] +
                                      rho * dir[static_cast<std::size_t>(c)]);
                }
                cloud.spacing_hint =
                    2.0 * rho / std::pow(static_cast<double>(budget),
                                         1.0 / static_cast<double>(n - 1));
            }
            break;
        }
        case Region::Kind::Cylinder: {
            const int d = n - 1;
            const double delta = region.delta;
            // bottom disc carries most tracers: B approaches from below
            const std::size_t bottom = std::max<std::size_t>(1, (budget * 2) / 5);
            const std::size_t top = std::max<std::size_t>(1, budget / 5);
            const std::size_t side = std::max<std::size_t>(1, budget - bottom - top);
            std::vector<double> lateral;
            fill_ball_points(d, region.lateral_center, delta, bottom, lateral);
            for (std::size_t i = 0; i < bottom; ++i) {
                pts.push_back(region.level);
                for (int c = 0; c < d; ++c)
                    pts.push_back(lateral[i * static_cast<std::size_t>(d) +
                                          static_cast<std::size_t>(c)]);
            }
            lateral.clear();
            fill_ball_points(d, region.lateral_center, delta, top, lateral);
            for (std::size_t i = 0; i < top; ++i) {
                pts.push_back(region.level + delta);
                for (int c = 0; c < d; ++c)
                    pts.push_back(lateral[i * static_cast<std::size_t>(d) +
                                          static_cast<std::size_t>(c)]);
            }
            for (std::size_t i = 0; i < side; ++i) {
                const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(side);
                const auto dir = placement_direction(d, i);
                pts.push_back(region.level + delta * t);
                for (int c = 0; c < d; ++c)
                    pts.push_back(region.lateral_center[static_cast<std::size_t>(c)] +
                                  delta * dir[static_cast<std::size_t>(c)]);
            }
            cloud.spacing_hint =
                2.0 * delta / std::pow(static_cast<double>(budget),
                                       1.0 / static_cast<double>(std::max(1, d)));
            break;
        }
    }

    const std::size_t count = pts.size() / static_cast<std::size_t>(n);
    cloud.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) cloud.labels[i] = static_cast<int>(i);
    cloud.psi = cloud.initial;
    return cloud;
}

// ---------------------------------------------------------------------------
// advance_cloud

void advance_cloud(TracerCloud& cloud, PointN& b, const PointN& b_increment, double dt,
                   const DriftField& drift, double truncation) {
    if (cloud.terminated) throw std::invalid_argument("advance_cloud: cloud is terminated");
    if (static_cast<int>(b.size()) != cloud.dimension ||
        static_cast<int>(b_increment.size()) != cloud.dimension)
        throw std::invalid_argument("advance_cloud: dimension mismatch");
    if (!(dt > 0.0) || !(truncation > 0.0))
        throw std::invalid_argument("advance_cloud: dt and truncation must be > 0");

    for (std::size_t c = 0; c < b.size(); ++c) b[c] += b_increment[c];
    if (!drift.is_zero()) {
        const int n = cloud.dimension;
        const double inv_trunc = 1.0 / truncation;
        for (std::size_t i = 0; i < cloud.size(); ++i)
            drift_advance_tracer(cloud.psi.data() + i * static_cast<std::size_t>(n), b.data(), n,
                                 dt, drift, inv_trunc, nullptr, -1.0);
    }
    cloud.time += dt;
}

// ---------------------------------------------------------------------------
// FlowIntegrator

IncrementFn standard_increments(const NoiseStream& stream, double dt) {
    return [stream, dt](std::uint64_t step, std::span<double> out) {
        stream.fill_increment(step, dt, out);
    };
}

FlowIntegrator::FlowIntegrator(TracerCloud cloud, PointN b_start, DriftField drift,
                               double truncation, double dt, IncrementFn increments)
    : cloud_(std::move(cloud)),
      b_(std::move(b_start)),
      drift_(std::move(drift)),
      truncation_(truncation),
      dt_(dt),
      increments_(std::move(increments)) {
    if (static_cast<int>(b_.size()) != cloud_.dimension)
        throw std::invalid_argument("FlowIntegrator: B dimension mismatch");
    dw_.resize(b_.size());
    dist2_.resize(cloud_.size());
    refresh_psi1_aggregates();
}

void FlowIntegrator::refresh_psi1_aggregates() {
    psi1_min_ = std::numeric_limits<double>::infinity();
    psi1_max_ = -std::numeric_limits<double>::infinity();
    const auto n = static_cast<std::size_t>(cloud_.dimension);
    for (std::size_t i = 0; i < cloud_.size(); ++i) {
        const double v = cloud_.psi[i * n];
        psi1_min_ = std::min(psi1_min_, v);
        psi1_max_ = std::max(psi1_max_, v);
    }
}

int FlowIntegrator::argmin_label() const {
    return argmin_index_ < cloud_.size() ? cloud_.labels[argmin_index_] : -1;
}

void FlowIntegrator::distance_pass() {
    const int n = cloud_.dimension;
    const auto un = static_cast<std::size_t>(n);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < cloud_.size(); ++i) {
        double s = 0.0;
        const double* p = cloud_.psi.data() + i * un;
        for (int c = 0; c < n; ++c) {
            const double dy = p[c] - b_[static_cast<std::size_t>(c)];
            s += dy * dy;
        }
        dist2_[i] = s;
        if (s < best) {
            best = s;
            best_i = i;
        }
    }
    last_min_distance_ = std::sqrt(best);
    argmin_index_ = best_i;
}

void FlowIntegrator::drift_pass(double span, bool have_dist2) {
    const int n = cloud_.dimension;
    const auto un = static_cast<std::size_t>(n);
    const double inv_trunc = 1.0 / truncation_;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cloud_.size(); ++i) {
        double* p = cloud_.psi.data() + i * un;
        drift_advance_tracer(p, b_.data(), n, span, drift_, inv_trunc, &skipped_bound_,
                             have_dist2 ? dist2_[i] : -1.0);
        lo = std::min(lo, p[0]);
        hi = std::max(hi, p[0]);
    }
    psi1_min_ = lo;
    psi1_max_ = hi;
}

bool FlowIntegrator::step_impl(int pieces, const std::function<bool(int)>* after_piece) {
    if (terminated_) return false;
    increments_(step_, dw_);
    ++step_;
    time_ = static_cast<double>(step_) * dt_;

    const double frac = 1.0 / static_cast<double>(pieces);
    for (int piece = 0; piece < pieces; ++piece) {
        for (std::size_t c = 0; c < b_.size(); ++c) b_[c] += dw_[c] * frac;
        bool have_dist2 = false;
        if (compute_min_distance_) {
            distance_pass();
            have_dist2 = true;
            if (hit_threshold_ > 0.0 && last_min_distance_ <= hit_threshold_) {
                terminated_ = true;
                cloud_.terminated = true;
                cloud_.time = time_;
                return false;
            }
        }
        if (!drift_.is_zero()) drift_pass(dt_ * frac, have_dist2);
        if (after_piece && (*after_piece)(piece)) break;
    }
    cloud_.time = time_;
    return true;
}

bool FlowIntegrator::step() { return step_impl(1, nullptr); }

void FlowIntegrator::step_in_pieces(int pieces, const std::function<bool(int)>& after_piece) {
    if (pieces < 1) throw std::invalid_argument("step_in_pieces: pieces must be >= 1");
    step_impl(pieces, &after_piece);
}

FlowIntegrator::Snapshot FlowIntegrator::snapshot() const {
    return Snapshot{cloud_.psi, b_, step_, time_, psi1_min_, psi1_max_, skipped_bound_};
}

void FlowIntegrator::restore(const Snapshot& s) {
    cloud_.psi = s.psi;
    b_ = s.b;
    step_ = s.step;
    time_ = s.time;
    psi1_min_ = s.psi1_min;
    psi1_max_ = s.psi1_max;
    skipped_bound_ = s.skipped_bound;
    cloud_.time = s.time;
    terminated_ = false;
    cloud_.terminated = false;
}

bool FlowIntegrator::step_b_first_coordinate_only() {
    if (terminated_) return false;
    if (!drift_.is_zero())
        throw std::logic_error("step_b_first_coordinate_only needs zero drift");
    // same counter layout as a full step; only coordinate 0 is evaluated
    increments_(step_, std::span<double>(dw_.data(), 1));
    b_[0] += dw_[0];
    ++step_;
    time_ = static_cast<double>(step_) * dt_;
    cloud_.time = time_;
    return true;
}

// ---------------------------------------------------------------------------
// run_flow

FlowResult run_flow(const FlowConfig& config, const NoiseStream& stream) {
    config.validate();
    if (stream.dimension() != config.dimension)
        throw std::invalid_argument("run_flow: stream dimension mismatch");

    FlowResult res;
    res.config = config;

    TracerCloud cloud = discretize_region(config.region, config.tracer_budget);
    FlowIntegrator engine(std::move(cloud), PointN(static_cast<std::size_t>(config.dimension), 0.0),
                          config.drift, config.truncation, config.dt,
                          standard_increments(stream, config.dt));
    engine.set_hit_threshold(config.hit_threshold());

    const auto max_steps = static_cast<std::uint64_t>(std::ceil(config.horizon / config.dt));
    res.min_distance.reserve(static_cast<std::size_t>(max_steps));
    res.argmin_label.reserve(static_cast<std::size_t>(max_steps));
    while (engine.steps_done() < max_steps) {
        const bool alive = engine.step();
        res.min_distance.push_back(engine.min_distance());
        res.argmin_label.push_back(engine.argmin_label());
        if (!alive) {
            res.hit = true;
            res.tau_hat = engine.time();
            res.hit_label = engine.argmin_label();
            break;
        }
    }
    res.steps_run = engine.steps_done();
    res.skipped_drift_bound = engine.skipped_drift_bound();
    res.final_b = engine.b();
    res.final_cloud = engine.take_cloud();
    return res;
}

// ---------------------------------------------------------------------------
// refine_cloud

namespace {

// Boundary points near `anchor` (a tracer's initial position), spread over
// a neighborhood of radius `extent` at resolution extent/factor.
std::vector<double> boundary_points_near(const Region& region, std::span<const double> anchor,
                                         double extent, int factor, std::size_t cap) {
    const int n = region.dimension;
    std::vector<double> pts;
    switch (region.kind) {
        case Region::Kind::HalfSpace:
        case Region::Kind::LateralDisc: {
            if (n == 1) break; // boundary is a single point, nothing to refine
            const int d = n - 1;
            if (d == 1) {
                const double c0 = region.lateral_center[0];
                const double m = region.lateral_radius;
                const std::size_t count =
                    std::min<std::size_t>(cap, 2 * static_cast<std::size_t>(factor) + 1);
                for (std::size_t i = 0; i < count; ++i) {
                    double y = anchor[1] - extent +
                               2.0 * extent * static_cast<double>(i) /
                                   static_cast<double>(count - 1);
                    y = std::clamp(y, c0 - m, c0 + m);
                    pts.push_back(region.level);
                    pts.push_back(y);
                }
            } else {
                const std::size_t count = std::min<std::size_t>(cap, 32u * static_cast<std::size_t>(factor));
                std::vector<double> lateral;
                fill_ball_points(d, anchor.subspan(1), extent, count, lateral);
                // clamp into the disc
                for (std::size_t i = 0; i < count; ++i) {
                    double* q = lateral.data() + i * static_cast<std::size_t>(d);
                    double r2 = 0.0;
                    for (int c = 0; c < d; ++c) {
                        const double dy = q[c] - region.lateral_center[static_cast<std::size_t>(c)];
                        r2 += dy * dy;
                    }
                    const double r = std::sqrt(r2);
                    if (r > region.lateral_radius && r > 0.0) {
                        const double s = region.lateral_radius / r;
                        for (int c = 0; c < d; ++c) {
                            const double cc = region.lateral_center[static_cast<std::size_t>(c)];
                            q[c] = cc + (q[c] - cc) * s;
                        }
                    }
                    pts.push_back(region.level);
                    for (int c = 0; c < d; ++c) pts.push_back(q[c]);
                }
            }
            break;
        }
        case Region::Kind::BallComplement: {
            if (n == 1) break;
            const double rho = region.radius;
            const std::size_t count =
                std::min<std::size_t>(cap, (n == 2)
                                               ? 2 * static_cast<std::size_t>(factor) + 1
                                               : 32u * static_cast<std::size_t>(factor));
            std::vector<double> u(static_cast<std::size_t>(n));
            for (int c = 0; c < n; ++c)
                u[static_cast<std::size_t>(c)] =
                    (anchor[static_cast<std::size_t>(c)] - region.center[static_cast<std::size_t>(c)]) / rho;
            if (n == 2) {
                const double base = std::atan2(u[1], u[0]);
                const double half_angle = extent / rho;
                for (std::size_t i = 0; i < count; ++i) {
                    const double a = base - half_angle +
                                     2.0 * half_angle * static_cast<double>(i) /
                                         static_cast<double>(count - 1);
                    pts.push_back(region.center[0] + rho * std::cos(a));
                    pts.push_back(region.center[1] + rho * std::sin(a));
                }
            } else {
                for (std::size_t i = 0; i < count; ++i) {
                    auto dir = placement_direction(n, i + 1);
                    std::vector<double> v(static_cast<std::size_t>(n));
                    double s = 0.0;
                    for (int c = 0; c < n; ++c) {
                        v[static_cast<std::size_t>(c)] =
                            u[static_cast<std::size_t>(c)] +
                            (extent / rho) * dir[static_cast<std::size_t>(c)] *
                                (static_cast<double>(i) + 1.0) / static_cast<double>(count);
                        s += v[static_cast<std::size_t>(c)] * v[static_cast<std::size_t>(c)];
                    }
                    s = std::sqrt(s);
                    for (int c = 0; c < n; ++c)
                        pts.push_back(region.center[static_cast<std::size_t>(c)] +
                                      rho * v[static_cast<std::size_t>(c)] / s);
                }
            }
            break;
        }
        case Region::Kind::Cylinder: {
            // refine on the bottom/top disc the anchor belongs to
            Region disc = Region::lateral_disc(n, anchor[0], region.delta, region.lateral_center);
            return boundary_points_near(disc, anchor, extent, factor, cap);
        }
    }
    return pts;
}

} // namespace

FlowResult refine_cloud(const FlowResult& result, const NoiseStream& stream, int factor,
                        std::size_t max_extra_tracers) {
    if (factor < 2) throw std::invalid_argument("refine_cloud: factor must be >= 2");
    if (result.min_distance.empty()) throw std::invalid_argument("refine_cloud: empty record");
    if (stream.dimension() != result.config.dimension)
        throw std::invalid_argument("refine_cloud: stream dimension mismatch (replay unavailable)");

    // overall sharpest approach decides where to refine
    std::size_t best_step = 0;
    for (std::size_t k = 1; k < result.min_distance.size(); ++k)
        if (result.min_distance[k] < result.min_distance[best_step]) best_step = k;
    const int target_label = result.argmin_label[best_step];
    if (target_label < 0) throw std::invalid_argument("refine_cloud: no argmin recorded");

    std::size_t target_index = result.final_cloud.size();
    for (std::size_t i = 0; i < result.final_cloud.size(); ++i)
        if (result.final_cloud.labels[i] == target_label) {
            target_index = i;
            break;
        }
    if (target_index == result.final_cloud.size())
        throw std::invalid_argument("refine_cloud: argmin label not present in cloud");

    FlowResult merged = result;
    merged.refined = true;

    const auto anchor = result.final_cloud.tracer_initial(target_index);
    const double extent = result.final_cloud.spacing_hint;
    auto extra = boundary_points_near(result.config.region, anchor, extent, factor,
                                      max_extra_tracers);
    const auto n = static_cast<std::size_t>(result.config.dimension);
    const std::size_t extra_count = extra.size() / n;
    if (extra_count == 0) return merged; // nothing to add (point boundary)
    if (extra_count >= max_extra_tracers) merged.budget_exhausted = true;

    TracerCloud add;
    add.dimension = result.config.dimension;
    add.initial = std::move(extra);
    add.psi = add.initial;
    add.spacing_hint = extent / factor;
    add.labels.resize(extra_count);
    int next_label = 0;
    for (int l : result.final_cloud.labels) next_label = std::max(next_label, l + 1);
    for (std::size_t i = 0; i < extra_count; ++i)
        add.labels[i] = next_label + static_cast<int>(i);

    FlowIntegrator engine(std::move(add), PointN(n, 0.0), result.config.drift,
                          result.config.truncation, result.config.dt,
                          standard_increments(stream, result.config.dt));
    engine.set_hit_threshold(result.config.hit_threshold());

    const std::uint64_t replay_steps = result.steps_run;
    bool extra_hit = false;
    for (std::uint64_t k = 0; k < replay_steps; ++k) {
        const bool alive = engine.step();
        const std::size_t idx = static_cast<std::size_t>(k);
        if (engine.min_distance() < merged.min_distance[idx]) {
            merged.min_distance[idx] = engine.min_distance();
            merged.argmin_label[idx] = engine.argmin_label();
        }
        if (!alive) {
            extra_hit = true;
            break;
        }
    }
    if (extra_hit) {
        const auto hit_steps = static_cast<std::size_t>(engine.steps_done());
        merged.hit = true;
        merged.tau_hat = engine.time();
        merged.hit_label = engine.argmin_label();
        merged.steps_run = hit_steps;
        merged.min_distance.resize(hit_steps);
        merged.argmin_label.resize(hit_steps);
    }

    // append refined tracers to the merged cloud snapshot; the cloud's
    // resolution is now the refined one, so a further pass digs deeper
    merged.final_cloud.spacing_hint = extent / factor;
    const TracerCloud& rc = engine.cloud();
    merged.final_cloud.labels.insert(merged.final_cloud.labels.end(), rc.labels.begin(),
                                     rc.labels.end());
    merged.final_cloud.initial.insert(merged.final_cloud.initial.end(), rc.initial.begin(),
                                      rc.initial.end());
    merged.final_cloud.psi.insert(merged.final_cloud.psi.end(), rc.psi.begin(), rc.psi.end());
    merged.final_cloud.terminated = merged.final_cloud.terminated || rc.terminated;
    return merged;
}

// ---------------------------------------------------------------------------
// scale_solution

namespace {

Region scale_region(const Region& r, double lambda) {
    switch (r.kind) {
        case Region::Kind::HalfSpace:
            return Region::half_space(r.dimension, r.level * lambda, r.lateral_radius * lambda);
        case Region::Kind::BallComplement: {
            PointN c = r.center;
            for (auto& x : c) x *= lambda;
            return Region::ball_complement(r.dimension, std::move(c), r.radius * lambda);
        }
        case Region::Kind::LateralDisc: {
            auto c = r.lateral_center;
            for (auto& x : c) x *= lambda;
            return Region::lateral_disc(r.dimension, r.level * lambda, r.lateral_radius * lambda,
                                        std::move(c));
        }
        case Region::Kind::Cylinder: {
            PointN corner(static_cast<std::size_t>(r.dimension));
            corner[0] = r.level * lambda;
            for (int c = 1; c < r.dimension; ++c)
                corner[static_cast<std::size_t>(c)] =
                    r.lateral_center[static_cast<std::size_t>(c - 1)] * lambda;
            return Region::cylinder(r.dimension, corner, r.delta * lambda);
        }
    }
    return r;
}

} // namespace

FlowResult scale_solution(const FlowResult& result, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("scale_solution: lambda must be > 0");
    FlowResult out = result;
    const double l2 = lambda * lambda;

    out.config.drift = result.config.drift.rescaled(1.0 / lambda);
    out.config.truncation = result.config.truncation / lambda;
    out.config.horizon = result.config.horizon * l2;
    out.config.dt = result.config.dt * l2;
    out.config.region = scale_region(result.config.region, lambda);

    if (result.hit) out.tau_hat = result.tau_hat * l2;
    for (auto& d : out.min_distance) d *= lambda;
    for (auto& x : out.final_b) x *= lambda;
    for (auto& x : out.final_cloud.initial) x *= lambda;
    for (auto& x : out.final_cloud.psi) x *= lambda;
    out.final_cloud.time = result.final_cloud.time * l2;
    out.final_cloud.spacing_hint = result.final_cloud.spacing_hint * lambda;
    out.skipped_drift_bound = result.skipped_drift_bound * lambda;
    return out;
}

} // namespace flowlab
