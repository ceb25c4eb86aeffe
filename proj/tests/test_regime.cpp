#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "flowlab/regime.hpp"
#include "flowlab/stats.hpp"

using namespace flowlab;

TEST_CASE("ladder bookkeeping: 2^(sum X) equals rho_m / rho0, exactly") {
    LadderParams lp;
    lp.dimension = 2;
    lp.drift = DriftField::constant(0.0);
    lp.max_stages = 10;
    lp.dt = 1e-3;
    lp.stage_horizon = 50.0;
    lp.seed = 11;
    for (std::uint64_t p = 0; p < 40; ++p) {
        lp.path_index = p;
        const auto ladder = hitting_ladder(lp);
        double log2_sum = 0.0;
        double prev_tau = 0.0;
        for (const auto& s : ladder.stages) {
            log2_sum += s.x;
            CHECK(s.tau >= prev_tau);
            prev_tau = s.tau;
        }
        if (!ladder.stages.empty())
            CHECK(ladder.stages.back().rho == std::exp2(log2_sum) * lp.rho0);
    }
}

TEST_CASE("huge drift pushes every not-hitting stage up" * doctest::timeout(300)) {
    LadderParams lp;
    lp.dimension = 2;
    lp.drift = DriftField::constant(1000.0);
    lp.max_stages = 5;
    lp.dt = 1e-4;
    lp.stage_horizon = 20.0;
    lp.seed = 77;
    std::size_t all_up = 0;
    const std::size_t paths = 50;
    for (std::uint64_t p = 0; p < paths; ++p) {
        lp.path_index = p;
        const auto ladder = not_hitting_ladder(lp);
        REQUIRE(ladder.stages.size() == 5);
        bool up = true;
        for (const auto& s : ladder.stages) up = up && (s.x == 1);
        if (up) {
            ++all_up;
            CHECK(ladder.stages.back().rho == 32.0 * lp.rho0);
        }
    }
    CHECK(all_up >= 45);
}

TEST_CASE("hitting ladder with zero drift is the gambler's ruin at 2/3" * doctest::timeout(600)) {
    LadderParams lp;
    lp.dimension = 2;
    lp.drift = DriftField::constant(0.0);
    lp.max_stages = 1;
    lp.dt = 1e-4;
    lp.stage_horizon = 100.0;
    lp.seed = 2027;
    const auto ensemble = run_ladder_ensemble(RegimeLadder::Kind::Hitting, lp, 20000);
    const auto sp = step_probability(ensemble);
    CHECK(sp.resolved == 20000);
    // P(down) = 2/3, so p_up targets 1/3
    CHECK(std::abs(sp.interval.p_hat - 1.0 / 3.0) <= 0.02);
    CHECK(sp.verdict.find("vs 1/3: consistent") != std::string::npos);
}

TEST_CASE("zero-drift hitting stage reduces to the one-dimensional crossing, bit for bit") {
    LadderParams lp;
    lp.dimension = 3;
    lp.drift = DriftField::constant(0.0);
    lp.max_stages = 1;
    lp.dt = 1e-4;
    lp.stage_horizon = 100.0;
    lp.seed = 424242;
    for (std::uint64_t p = 0; p < 25; ++p) {
        lp.path_index = p;
        const auto ladder = hitting_ladder(lp);
        REQUIRE(ladder.stages.size() == 1);

        // reconstruct from the raw stream: rho(t) = |1 - B1(t)|
        const NoiseStream stream(lp.seed, p, 3);
        const double sd = std::sqrt(lp.dt);
        double b1 = 0.0;
        std::uint64_t k = 0;
        int x = 0;
        for (;; ++k) {
            b1 += sd * stream.gaussian(k, 0);
            const double rho = std::abs(b1 - 1.0);
            if (rho <= 0.5) {
                x = -1;
                break;
            }
            if (rho >= 2.0) {
                x = 1;
                break;
            }
        }
        CHECK(ladder.stages[0].x == x);
        CHECK(ladder.stages[0].b1_end == b1);
        CHECK(ladder.stages[0].tau == static_cast<double>(k + 1) * lp.dt);
        // static boundary: the vertical displacement is an exact zero
        CHECK(ladder.stages[0].displacement == 0.0);
    }
}

TEST_CASE("zero-drift not-hitting ladders agree with a tenfold-finer reference" * doctest::timeout(600)) {
    // with F = 0 the cavity cannot grow, so every resolved stage steps down;
    // the dt-consistency check thus compares two zeros
    LadderParams lp;
    lp.dimension = 2;
    lp.drift = DriftField::constant(0.0);
    lp.max_stages = 1;
    lp.dt = 1e-4;
    lp.stage_horizon = 50.0;
    lp.seed = 31;
    const auto coarse = run_ladder_ensemble(RegimeLadder::Kind::NotHitting, lp, 400);
    lp.dt = 1e-5;
    const auto fine = run_ladder_ensemble(RegimeLadder::Kind::NotHitting, lp, 150);
    const auto pc = step_probability(coarse);
    const auto pf = step_probability(fine);
    CHECK(pc.interval.p_hat == 0.0);
    CHECK(std::abs(pc.interval.p_hat - pf.interval.p_hat) <= 0.02);
}

TEST_CASE("stage restarts are memoryless for constant drift" * doctest::timeout(900)) {
    LadderParams lp;
    lp.dimension = 2;
    lp.drift = DriftField::constant(0.0);
    lp.max_stages = 2;
    lp.dt = 1e-4;
    lp.stage_horizon = 100.0;
    lp.seed = 909;
    const auto ensemble = run_ladder_ensemble(RegimeLadder::Kind::Hitting, lp, 10000);
    std::size_t n_uu = 0, n_ud = 0, n_du = 0, n_dd = 0;
    std::size_t first_up = 0, second_up = 0, both = 0;
    for (const auto& l : ensemble) {
        if (l.stages.size() < 2) continue;
        ++both;
        const bool u1 = l.stages[0].x == 1;
        const bool u2 = l.stages[1].x == 1;
        if (u1) ++first_up;
        if (u2) ++second_up;
        if (u1 && u2)
            ++n_uu;
        else if (u1)
            ++n_ud;
        else if (u2)
            ++n_du;
        else
            ++n_dd;
    }
    REQUIRE(both > 9000);
    // independence of (X1, X2) at the 5% level
    CHECK(chi2_2x2(n_uu, n_ud, n_du, n_dd) < 3.841);
    // marginals agree: two-proportion z-test at ~3 sigma
    const double p1 = static_cast<double>(first_up) / both;
    const double p2 = static_cast<double>(second_up) / both;
    const double pooled = 0.5 * (p1 + p2);
    const double se = std::sqrt(2.0 * pooled * (1.0 - pooled) / both);
    CHECK(std::abs(p1 - p2) <= 3.0 * se + 1e-12);
}

TEST_CASE("step probability preconditions and degenerate ensembles") {
    std::vector<RegimeLadder> tiny(5);
    CHECK_THROWS_AS(step_probability(tiny), std::invalid_argument);

    std::vector<RegimeLadder> ups(40);
    for (auto& l : ups) {
        l.kind = RegimeLadder::Kind::NotHitting;
        l.stages.push_back({0.1, 2.0, 1, 0.0, 0.0});
    }
    const auto sp = step_probability(ups);
    CHECK(sp.interval.p_hat == 1.0);
    CHECK(sp.interval.hi == 1.0);
    const auto pooled = pooled_step_probability(ups);
    CHECK(pooled.resolved == 40);
}

TEST_CASE("drift accumulators: zero drift gives exactly zero totals") {
    LadderParams lp;
    lp.dimension = 2;
    lp.drift = DriftField::constant(0.0);
    lp.dt = 1e-4;
    lp.stage_horizon = 100.0;
    lp.seed = 5151;
    const auto acc = drift_accumulators(lp, {1.0, 0.0});
    CHECK(acc.lateral_total == 0.0);
    CHECK(acc.vertical_total == 0.0);
    CHECK(acc.stage_resolved);
    CHECK_THROWS_AS(drift_accumulators(lp, {1.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("drift accumulators: far test point obeys the kernel bound, decomposition exact") {
    LadderParams lp;
    lp.dimension = 2;
    lp.drift = DriftField::constant(0.4);
    lp.dt = 1e-3;
    lp.stage_horizon = 50.0;
    lp.seed = 512;
    lp.budget = 32;
    // lateral part of the test point sits far beyond the outermost annulus
    const auto acc = drift_accumulators(lp, {1.0, 1000.0});
    REQUIRE(acc.stage_resolved);
    const double kinf = acc.k_infinity;
    const double hard = lp.drift.bound() * acc.tau1 * std::exp(-kinf);
    CHECK(acc.lateral_total <= hard);
    CHECK(acc.vertical_total <= acc.lateral_total);
    // all mass in the far bin
    for (int k = 0; k < acc.k_infinity; ++k) {
        CHECK(acc.lateral_by_annulus[static_cast<std::size_t>(k)] == 0.0);
        CHECK(acc.vertical_by_annulus[static_cast<std::size_t>(k)] == 0.0);
    }
    double lat = 0.0, vert = 0.0;
    for (std::size_t k = 0; k < acc.lateral_by_annulus.size(); ++k) {
        lat += acc.lateral_by_annulus[k];
        vert += acc.vertical_by_annulus[k];
    }
    CHECK(lat == acc.lateral_total);
    CHECK(vert == acc.vertical_total);
}

TEST_CASE("d-bound check on zero-drift ensembles") {
    LadderParams lp;
    lp.dimension = 2;
    lp.drift = DriftField::constant(0.0);
    lp.max_stages = 1;
    lp.dt = 1e-3;
    lp.stage_horizon = 100.0;
    lp.seed = 2222;
    const auto ensemble = run_ladder_ensemble(RegimeLadder::Kind::Hitting, lp, 200);
    // D = 0 exactly, so P(D < 1/4 - 2 delta) = 1 for small delta
    CHECK(d_bound_check(ensemble, 0.05).p_hat == 1.0);
    // boundary: threshold is 0 and D = 0 is not strictly below it
    CHECK(d_bound_check(ensemble, 0.125).p_hat == 0.0);
    CHECK_THROWS_AS(d_bound_check(ensemble, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(d_bound_check(ensemble, 0.0), std::invalid_argument);
}

TEST_CASE("near-simultaneous threshold crossings get the tenfold substep decision") {
    // a huge step size forces first-step displacements past both thresholds
    LadderParams lp;
    lp.dimension = 1;
    lp.drift = DriftField::constant(0.0);
    lp.max_stages = 1;
    lp.dt = 5.0;
    lp.stage_horizon = 500.0;
    lp.seed = 888;
    std::size_t refined = 0;
    for (std::uint64_t p = 0; p < 200; ++p) {
        lp.path_index = p;
        const auto ladder = hitting_ladder(lp);
        if (!ladder.tie_refined) continue;
        ++refined;
        REQUIRE(ladder.stages.size() == 1);
        const auto& s = ladder.stages[0];
        // the refined decision is consistent with the threshold it reports
        const double rho_at_end = std::abs(s.b1_end - 1.0);
        if (s.x == 1) CHECK(rho_at_end >= 2.0);
        if (s.x == -1) CHECK(rho_at_end <= 0.5);
    }
    CHECK(refined > 0);
}

TEST_CASE("ladder jsonl serialization") {
    LadderParams lp;
    lp.dimension = 2;
    lp.drift = DriftField::constant(0.0);
    lp.max_stages = 2;
    lp.dt = 1e-3;
    lp.seed = 3;
    const auto ensemble = run_ladder_ensemble(RegimeLadder::Kind::Hitting, lp, 5);
    const auto text = ladders_to_jsonl(ensemble);
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    CHECK(lines == 5);
    CHECK(text.find("\"kind\":\"hitting\"") != std::string::npos);
    CHECK(text.find("\"stages\"") != std::string::npos);
}
