#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "flowlab/harness.hpp"
#include "flowlab/stats.hpp"

using namespace flowlab;

namespace {

FlowConfig one_d_baseline() {
    FlowConfig cfg;
    cfg.dimension = 1;
    cfg.drift = DriftField::constant(0.0);
    cfg.region = Region::half_space(1, 1.0, 1.0);
    cfg.truncation = 100.0;
    cfg.horizon = 10.0;
    cfg.dt = 1e-4;
    cfg.tracer_budget = 1;
    cfg.seed = 51;
    return cfg;
}

} // namespace

TEST_CASE("hitting estimate reproduces the one-dimensional reflection value" * doctest::timeout(900)) {
    const auto est = estimate_hitting_probability(one_d_baseline(), 2500);
    const double target = 2.0 * normal_cdf(-0.99 / std::sqrt(10.0));
    CHECK(std::abs(est.interval.p_hat - target) <= 0.02);
    CHECK(est.interval.lo <= est.interval.p_hat);
    CHECK(est.interval.p_hat <= est.interval.hi);
    CHECK(est.hits <= est.paths);
    const auto json_text = est.to_json_string();
    CHECK(json_text.find("\"p_hat\"") != std::string::npos);
    CHECK(json_text.find("\"refinement_changed_fraction\"") != std::string::npos);
}

TEST_CASE("hit flags are monotone in the horizon, per path") {
    FlowConfig cfg = one_d_baseline();
    std::vector<unsigned char> prev;
    for (double horizon : {2.0, 5.0, 10.0}) {
        cfg.horizon = horizon;
        const auto est = estimate_hitting_probability(cfg, 300);
        if (!prev.empty())
            for (std::size_t p = 0; p < est.hit_flags.size(); ++p)
                CHECK(est.hit_flags[p] >= prev[p]);
        prev = est.hit_flags;
    }
}

TEST_CASE("hit flags are monotone in the threshold, per path") {
    FlowConfig cfg = one_d_baseline();
    cfg.horizon = 5.0;
    cfg.truncation = 100.0;
    const auto loose = estimate_hitting_probability(cfg, 300);
    cfg.truncation = 1000.0;
    const auto tight = estimate_hitting_probability(cfg, 300);
    for (std::size_t p = 0; p < loose.hit_flags.size(); ++p)
        CHECK(loose.hit_flags[p] >= tight.hit_flags[p]);
}

TEST_CASE("enlarging the tracer set never loses hits" * doctest::timeout(900)) {
    // budgets 64 and 127 give nested lateral grids on the disc
    FlowConfig cfg;
    cfg.dimension = 2;
    cfg.drift = DriftField::constant(0.3);
    cfg.region = Region::half_space(2, 1.0, 4.0);
    cfg.truncation = 100.0;
    cfg.horizon = 5.0;
    cfg.dt = 1e-3;
    cfg.seed = 4096;
    cfg.tracer_budget = 64;
    const auto coarse = estimate_hitting_probability(cfg, 100, 8);
    cfg.tracer_budget = 127;
    const auto fine = estimate_hitting_probability(cfg, 100, 8);
    CHECK(fine.hits >= coarse.hits);
}

TEST_CASE("phase sweep: determinism, zero column, and regime separation" * doctest::timeout(900)) {
    FlowConfig base;
    base.dimension = 2;
    base.region = Region::half_space(2, 1.0, 4.0);
    base.truncation = 100.0;
    base.horizon = 5.0;
    base.dt = 1e-3;
    base.tracer_budget = 64;
    base.seed = 7;

    const auto a = phase_sweep({2}, {0.0, 0.05, 25.0}, {1.0}, 60, base);
    const auto b = phase_sweep({2}, {0.0, 0.05, 25.0}, {1.0}, 60, base);
    CHECK(a.to_csv() == b.to_csv()); // same seeds, same table, byte for byte
    REQUIRE(a.cells.size() == 3);

    // c = 0 column equals a direct zero-drift run with the cell's seed
    FlowConfig direct = base;
    direct.drift = DriftField::constant(0.0);
    direct.seed = a.cells[0].cell_seed;
    direct.path_index = 0;
    const auto zero_run = estimate_hitting_probability(direct, 60, 8);
    CHECK(a.cells[0].estimate.hits == zero_run.hits);

    // small drift at alpha=3/4 hits often; huge drift at alpha=1 never does
    CHECK(a.cells[1].estimate.interval.p_hat - a.cells[2].estimate.interval.p_hat >= 0.5);
    CHECK(a.monotone_summary().find("nonincreasing in c") != std::string::npos);
}

TEST_CASE("cylinder experiment has positive hit probability" * doctest::timeout(900)) {
    FlowConfig base;
    base.dimension = 2;
    base.drift = DriftField::constant(0.3);
    base.truncation = 100.0;
    base.horizon = 20.0;
    base.dt = 1e-3;
    base.tracer_budget = 96;
    base.seed = 88;
    const auto est = cylinder_experiment({1.0, 0.0}, 0.5, base, 100);
    CHECK(est.interval.p_hat > 0.05);

    // a fat cylinder approaches the truncated half-space answer
    const auto fat = cylinder_experiment({1.0, 0.0}, 6.0, base, 60);
    FlowConfig half = base;
    half.region = Region::lateral_disc(2, 1.0, 6.0);
    const auto disc = estimate_hitting_probability(half, 60);
    CHECK(fat.interval.lo <= disc.interval.hi + 1e-12);
    CHECK(disc.interval.lo <= fat.interval.hi + 1e-12);

    CHECK_THROWS_AS(cylinder_experiment({-1.0, 0.0}, 0.5, base, 10), std::invalid_argument);
    CHECK_THROWS_AS(cylinder_experiment({1.0, 0.0}, 0.0, base, 10), std::invalid_argument);
}

TEST_CASE("region templates map across dimensions") {
    const auto hs = region_with_dimension(Region::half_space(2, 1.5, 3.0), 5);
    CHECK(hs.dimension == 5);
    CHECK(hs.level == 1.5);
    const auto bc = region_with_dimension(Region::ball_complement(2, {0.5, 0.0}, 2.0), 3);
    CHECK(bc.dimension == 3);
    CHECK(bc.center.size() == 3);
    CHECK(bc.center[0] == 0.5);
    CHECK(bc.center[2] == 0.0);
    const auto cyl = region_with_dimension(Region::cylinder(3, {1.0, 0.2, 0.0}, 0.7), 2);
    CHECK(cyl.dimension == 2);
    CHECK(cyl.delta == 0.7);
}
