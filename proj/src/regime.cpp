#include "flowlab/regime.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "flowlab/parallel.hpp"

namespace flowlab {

namespace {

constexpr double kDown = 0.5;
constexpr double kUp = 2.0;
constexpr double kStageTruncation = 1e6; // stages never get near 1/N

struct StageOutcome {
    bool resolved = false;
    int x = 0;
    double duration_norm = 0.0;
    double b1_end = 0.0;
    double rho_end_norm = 0.0; // exactly kDown or kUp when resolved
    double rho_measured = 0.0; // the sup/distance actually observed at the crossing
    bool tie_refined = false;
    std::uint64_t steps_used = 0;
};

IncrementFn offset_increments(const NoiseStream& stream, double dt, std::uint64_t base) {
    return [stream, dt, base](std::uint64_t k, std::span<double> out) {
        stream.fill_increment(base + k, dt, out);
    };
}

// A stage-ending step whose observed displacement exceeds the distance from
// the previous value to the opposite threshold could have visited both
// thresholds; those steps are re-run in ten pieces before deciding.
bool needs_tie_refinement(double rho_prev, double rho_now) {
    const double displacement = std::abs(rho_now - rho_prev);
    if (rho_now <= kDown) return (kUp - rho_prev) < displacement;
    if (rho_now >= kUp) return (rho_prev - kDown) < displacement;
    return false;
}

// Normalized not-hitting stage: unit sphere boundary around B = 0, run until
// the tracer distance reaches 1/2 or 2.
StageOutcome run_not_hitting_stage(const LadderParams& params, const DriftField& stage_drift,
                                   const NoiseStream& stream, std::uint64_t base_step) {
    const int n = params.dimension;
    const std::size_t budget =
        params.budget ? params.budget : 64 * static_cast<std::size_t>(n);
    PointN zeros(static_cast<std::size_t>(n), 0.0);
    TracerCloud cloud = discretize_region(Region::ball_complement(n, zeros, 1.0), budget);
    FlowIntegrator eng(std::move(cloud), zeros, stage_drift, kStageTruncation, params.dt,
                       offset_increments(stream, params.dt, base_step));

    StageOutcome out;
    const auto horizon_steps =
        static_cast<std::uint64_t>(std::ceil(params.stage_horizon / params.dt));
    const bool cheap_snapshot = static_cast<std::size_t>(n) * budget <= 4096;
    double rho_prev = 1.0;
    FlowIntegrator::Snapshot snap;
    bool have_snap = false;

    for (std::uint64_t k = 0; k < horizon_steps; ++k) {
        const bool danger = rho_prev <= 0.9 || rho_prev >= 1.5;
        if (cheap_snapshot || danger) {
            snap = eng.snapshot();
            have_snap = true;
        } else {
            have_snap = false;
        }
        eng.step();
        double rho = eng.min_distance();
        if (rho > kDown && rho < kUp) {
            rho_prev = rho;
            continue;
        }
        if (have_snap && needs_tie_refinement(rho_prev, rho)) {
            out.tie_refined = true;
            eng.restore(snap);
            double refined_rho = rho_prev;
            bool decided = false;
            eng.step_in_pieces(10, [&](int) {
                refined_rho = eng.min_distance();
                if (refined_rho <= kDown || refined_rho >= kUp) {
                    decided = true;
                    return true;
                }
                return false;
            });
            if (!decided) {
                rho_prev = refined_rho;
                continue;
            }
            rho = refined_rho;
        }
        out.resolved = true;
        out.x = (rho >= kUp) ? 1 : -1;
        out.rho_end_norm = (rho >= kUp) ? kUp : kDown;
        out.rho_measured = rho;
        out.b1_end = eng.b()[0];
        out.steps_used = eng.steps_done();
        out.duration_norm = eng.time();
        return out;
    }
    out.steps_used = eng.steps_done();
    out.duration_norm = eng.time();
    return out;
}

// Normalized hitting stage: boundary disc {1} x B_m(0), rho is the sup of
// |B1 - x1| over the disc tracers and the undisturbed far field at level 1.
StageOutcome run_hitting_stage(const LadderParams& params, const DriftField& stage_drift,
                               const NoiseStream& stream, std::uint64_t base_step) {
    const int n = params.dimension;
    const auto horizon_steps =
        static_cast<std::uint64_t>(std::ceil(params.stage_horizon / params.dt));
    StageOutcome out;

    if (stage_drift.is_zero()) {
        // static boundary: rho is exactly |B1 - 1|
        const double sd = std::sqrt(params.dt);
        double b1 = 0.0;
        double rho_prev = 1.0;
        for (std::uint64_t k = 0; k < horizon_steps; ++k) {
            const double b1_prev = b1;
            const double z = sd * stream.gaussian(base_step + k, 0);
            b1 += z;
            double rho = std::abs(b1 - 1.0);
            if (rho > kDown && rho < kUp) {
                rho_prev = rho;
                continue;
            }
            if (needs_tie_refinement(rho_prev, rho)) {
                out.tie_refined = true;
                double b1_fine = b1_prev;
                bool decided = false;
                for (int piece = 0; piece < 10; ++piece) {
                    b1_fine += z * 0.1;
                    const double r = std::abs(b1_fine - 1.0);
                    if (r <= kDown || r >= kUp) {
                        rho = r;
                        b1 = b1_fine;
                        decided = true;
                        break;
                    }
                }
                if (!decided) {
                    b1 = b1_fine;
                    rho_prev = std::abs(b1 - 1.0);
                    continue;
                }
            }
            out.resolved = true;
            out.x = (rho >= kUp) ? 1 : -1;
            out.rho_end_norm = (rho >= kUp) ? kUp : kDown;
            out.rho_measured = rho;
            out.b1_end = b1;
            out.steps_used = k + 1;
            out.duration_norm = static_cast<double>(k + 1) * params.dt;
            return out;
        }
        out.steps_used = horizon_steps;
        out.duration_norm = static_cast<double>(horizon_steps) * params.dt;
        return out;
    }

    const std::size_t budget =
        params.budget ? params.budget : 64 * static_cast<std::size_t>(n);
    TracerCloud cloud =
        discretize_region(Region::half_space(n, 1.0, params.lateral_radius), budget);
    PointN zeros(static_cast<std::size_t>(n), 0.0);
    FlowIntegrator eng(std::move(cloud), zeros, stage_drift, kStageTruncation, params.dt,
                       offset_increments(stream, params.dt, base_step));
    eng.set_compute_min_distance(false);

    const auto sup_rho = [&eng]() {
        const double b1 = eng.b()[0];
        const double a = std::abs(b1 - eng.psi1_min());
        const double b = std::abs(b1 - eng.psi1_max());
        const double c = std::abs(b1 - 1.0);
        return std::max(a, std::max(b, c));
    };

    const bool cheap_snapshot = static_cast<std::size_t>(n) * budget <= 4096;
    double rho_prev = 1.0;
    FlowIntegrator::Snapshot snap;
    bool have_snap = false;
    for (std::uint64_t k = 0; k < horizon_steps; ++k) {
        const bool danger = rho_prev <= 0.9 || rho_prev >= 1.5;
        if (cheap_snapshot || danger) {
            snap = eng.snapshot();
            have_snap = true;
        } else {
            have_snap = false;
        }
        eng.step();
        double rho = sup_rho();
        if (rho > kDown && rho < kUp) {
            rho_prev = rho;
            continue;
        }
        if (have_snap && needs_tie_refinement(rho_prev, rho)) {
            out.tie_refined = true;
            eng.restore(snap);
            double refined_rho = rho_prev;
            bool decided = false;
            eng.step_in_pieces(10, [&](int) {
                refined_rho = sup_rho();
                if (refined_rho <= kDown || refined_rho >= kUp) {
                    decided = true;
                    return true;
                }
                return false;
            });
            if (!decided) {
                rho_prev = refined_rho;
                continue;
            }
            rho = refined_rho;
        }
        out.resolved = true;
        out.x = (rho >= kUp) ? 1 : -1;
        out.rho_end_norm = (rho >= kUp) ? kUp : kDown;
        out.rho_measured = rho;
        out.b1_end = eng.b()[0];
        out.steps_used = eng.steps_done();
        out.duration_norm = eng.time();
        return out;
    }
    out.steps_used = eng.steps_done();
    out.duration_norm = eng.time();
    return out;
}

RegimeLadder run_ladder(RegimeLadder::Kind kind, const LadderParams& params) {
    if (params.dimension < 1) throw std::invalid_argument("ladder: dimension must be >= 1");
    if (!(params.rho0 > 0.0)) throw std::invalid_argument("ladder: rho0 must be > 0");
    if (params.max_stages < 1) throw std::invalid_argument("ladder: max_stages must be >= 1");
    if (kind == RegimeLadder::Kind::Hitting && !(params.lateral_radius > 0.0) &&
        params.dimension > 1)
        throw std::invalid_argument("ladder: lateral radius must be > 0");

    RegimeLadder ladder;
    ladder.kind = kind;
    ladder.rho0 = params.rho0;
    ladder.termination = RegimeLadder::Termination::MaxStages;

    NoiseStream stream(params.seed, params.path_index, params.dimension);
    double rho = params.rho0;
    double tau = 0.0;
    std::uint64_t base_step = 0;
    for (int stage = 0; stage < params.max_stages; ++stage) {
        // Lemma 2.2 normalization: the stage runs at unit distance with the
        // drift profile evaluated at the original scale.
        const DriftField stage_drift = params.drift.rescaled(rho);
        const StageOutcome oc = (kind == RegimeLadder::Kind::NotHitting)
                                    ? run_not_hitting_stage(params, stage_drift, stream, base_step)
                                    : run_hitting_stage(params, stage_drift, stream, base_step);
        base_step += oc.steps_used;
        ladder.tie_refined = ladder.tie_refined || oc.tie_refined;
        if (!oc.resolved) {
            ladder.termination = RegimeLadder::Termination::Horizon;
            return ladder;
        }
        tau += oc.duration_norm * rho * rho;
        rho *= (oc.x > 0) ? 2.0 : 0.5;
        LadderStage rec;
        rec.tau = tau;
        rec.rho = rho;
        rec.x = oc.x;
        rec.b1_end = oc.b1_end;
        rec.displacement = (kind == RegimeLadder::Kind::Hitting)
                               ? (oc.b1_end - 1.0) + oc.rho_measured
                               : 0.0;
        ladder.stages.push_back(rec);
        if (kind == RegimeLadder::Kind::Hitting && params.absorb_rho > 0.0 &&
            rho <= params.absorb_rho) {
            ladder.termination = RegimeLadder::Termination::Absorbed;
            return ladder;
        }
    }
    return ladder;
}

} // namespace

RegimeLadder not_hitting_ladder(const LadderParams& params) {
    return run_ladder(RegimeLadder::Kind::NotHitting, params);
}

RegimeLadder hitting_ladder(const LadderParams& params) {
    return run_ladder(RegimeLadder::Kind::Hitting, params);
}

std::vector<RegimeLadder> run_ladder_ensemble(RegimeLadder::Kind kind,
                                              const LadderParams& params, std::size_t count,
                                              unsigned workers) {
    std::vector<RegimeLadder> out(count);
    parallel_for_indexed(count, workers, [&](std::size_t p) {
        LadderParams local = params;
        local.path_index = params.path_index + p;
        out[p] = run_ladder(kind, local);
    });
    return out;
}

namespace {

std::string verdict_line(const WilsonInterval& w) {
    std::ostringstream os;
    os.precision(4);
    os << "p_hat=" << w.p_hat << " ci=[" << w.lo << "," << w.hi << "]";
    const double refs[3] = {1.0 / 3.0, 0.5, 2.0 / 3.0};
    const char* names[3] = {"1/3", "1/2", "2/3"};
    for (int i = 0; i < 3; ++i) {
        os << "; vs " << names[i] << ": ";
        if (w.hi < refs[i])
            os << "below";
        else if (w.lo > refs[i])
            os << "above";
        else
            os << "consistent";
    }
    return os.str();
}

} // namespace

StepProbability step_probability(const std::vector<RegimeLadder>& ensemble) {
    StepProbability sp;
    for (const auto& l : ensemble) {
        if (!l.first_stage_resolved()) continue;
        ++sp.resolved;
        if (l.stages.front().x > 0) ++sp.up;
    }
    if (sp.resolved < 30)
        throw std::invalid_argument("step_probability: need >= 30 resolved first stages");
    sp.interval = wilson_interval(sp.up, sp.resolved);
    sp.verdict = verdict_line(sp.interval);
    return sp;
}

StepProbability pooled_step_probability(const std::vector<RegimeLadder>& ensemble) {
    StepProbability sp;
    for (const auto& l : ensemble)
        for (const auto& s : l.stages) {
            ++sp.resolved;
            if (s.x > 0) ++sp.up;
        }
    if (sp.resolved < 30)
        throw std::invalid_argument("pooled_step_probability: need >= 30 resolved stages");
    sp.interval = wilson_interval(sp.up, sp.resolved);
    sp.verdict = verdict_line(sp.interval);
    return sp;
}

DriftAccumulator drift_accumulators(const LadderParams& params, const PointN& test_point) {
    const int n = params.dimension;
    if (static_cast<int>(test_point.size()) != n)
        throw std::invalid_argument("drift_accumulators: test point dimension mismatch");

    DriftAccumulator acc;
    acc.test_point = test_point;
    acc.k_infinity = std::max(
        1, static_cast<int>(std::ceil(std::log(static_cast<double>(n)) / 2.0)));
    acc.lateral_by_annulus.assign(static_cast<std::size_t>(acc.k_infinity) + 1, 0.0);
    acc.vertical_by_annulus.assign(static_cast<std::size_t>(acc.k_infinity) + 1, 0.0);

    const double fbound = params.drift.bound();
    NoiseStream stream(params.seed, params.path_index, n);

    if (params.drift.is_zero()) {
        // kernels carry the factor ||F||_inf = 0: contributions are exactly 0
        const StageOutcome oc = run_hitting_stage(params, params.drift, stream, 0);
        acc.stage_resolved = oc.resolved;
        acc.tau1 = oc.duration_norm;
        acc.x1 = oc.x;
        return acc;
    }

    // re-implementation of the hitting first stage with kernel accumulation
    const std::size_t budget =
        params.budget ? params.budget : 64 * static_cast<std::size_t>(n);
    TracerCloud cloud =
        discretize_region(Region::half_space(n, 1.0, params.lateral_radius), budget);
    PointN zeros(static_cast<std::size_t>(n), 0.0);
    FlowIntegrator eng(std::move(cloud), zeros, params.drift.rescaled(params.rho0),
                       kStageTruncation, params.dt,
                       offset_increments(stream, params.dt, 0));
    eng.set_compute_min_distance(false);

    std::vector<double> annulus_outer(static_cast<std::size_t>(acc.k_infinity));
    for (int k = 1; k <= acc.k_infinity; ++k)
        annulus_outer[static_cast<std::size_t>(k - 1)] =
            2.0 * std::exp(static_cast<double>(k));

    const auto horizon_steps =
        static_cast<std::uint64_t>(std::ceil(params.stage_horizon / params.dt));
    bool resolved = false;
    for (std::uint64_t k = 0; k < horizon_steps; ++k) {
        eng.step();
        // kernel of the drift bound at the test point given B-perp
        double u2 = 0.0;
        for (int c = 1; c < n; ++c) {
            const double dy = test_point[static_cast<std::size_t>(c)] -
                              eng.b()[static_cast<std::size_t>(c)];
            u2 += dy * dy;
        }
        const double lateral = fbound / std::sqrt(0.25 + u2);
        const double vertical = fbound / (0.25 + u2);
        const double dist = std::sqrt(u2);
        std::size_t bin = static_cast<std::size_t>(acc.k_infinity); // far bin
        for (std::size_t a = 0; a < annulus_outer.size(); ++a)
            if (dist < annulus_outer[a]) {
                bin = a;
                break;
            }
        acc.lateral_by_annulus[bin] += lateral * params.dt;
        acc.vertical_by_annulus[bin] += vertical * params.dt;

        const double b1 = eng.b()[0];
        const double rho = std::max(std::abs(b1 - eng.psi1_min()),
                                    std::max(std::abs(b1 - eng.psi1_max()),
                                             std::abs(b1 - 1.0)));
        if (rho <= kDown || rho >= kUp) {
            acc.x1 = (rho >= kUp) ? 1 : -1;
            acc.tau1 = eng.time();
            resolved = true;
            break;
        }
    }
    acc.stage_resolved = resolved;
    if (!resolved) acc.tau1 = eng.time();
    for (std::size_t i = 0; i < acc.lateral_by_annulus.size(); ++i) {
        acc.lateral_total += acc.lateral_by_annulus[i];
        acc.vertical_total += acc.vertical_by_annulus[i];
    }
    return acc;
}

WilsonInterval d_bound_check(const std::vector<RegimeLadder>& ensemble, double delta) {
    if (!(delta > 0.0 && delta <= 0.125))
        throw std::invalid_argument("d_bound_check: delta must lie in (0, 1/8]");
    const double threshold = 0.25 - 2.0 * delta;
    std::size_t resolved = 0, below = 0;
    for (const auto& l : ensemble) {
        if (l.kind != RegimeLadder::Kind::Hitting || !l.first_stage_resolved()) continue;
        ++resolved;
        if (l.stages.front().displacement < threshold) ++below;
    }
    if (resolved == 0) throw std::invalid_argument("d_bound_check: no resolved first stages");
    return wilson_interval(below, resolved);
}

std::string ladders_to_jsonl(const std::vector<RegimeLadder>& ensemble) {
    std::ostringstream os;
    for (const auto& l : ensemble) {
        nlohmann::json j;
        j["kind"] = (l.kind == RegimeLadder::Kind::NotHitting) ? "not_hitting" : "hitting";
        switch (l.termination) {
            case RegimeLadder::Termination::MaxStages: j["termination"] = "max_stages"; break;
            case RegimeLadder::Termination::Horizon: j["termination"] = "horizon"; break;
            case RegimeLadder::Termination::Absorbed: j["termination"] = "absorbed"; break;
        }
        j["rho0"] = l.rho0;
        j["tie_refined"] = l.tie_refined;
        nlohmann::json stages = nlohmann::json::array();
        for (const auto& s : l.stages) {
            stages.push_back({{"tau", s.tau},
                              {"rho", s.rho},
                              {"x", s.x},
                              {"b1_end", s.b1_end},
                              {"displacement", s.displacement}});
        }
        j["stages"] = std::move(stages);
        os << j.dump() << '\n';
    }
    return os.str();
}

} // namespace flowlab
