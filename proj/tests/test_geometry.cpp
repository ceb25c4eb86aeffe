#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "flowlab/geometry.hpp"

using namespace flowlab;

TEST_CASE("unit_radial") {
    const PointN u = unit_radial({3.0, 4.0});
    CHECK(u[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(u[1] == doctest::Approx(0.8).epsilon(1e-15));

    const PointN z = unit_radial({0.0, 0.0});
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);

    const PointN a = unit_radial({0.0, 0.0, 5.0});
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 0.0);
    CHECK(a[2] == 1.0);

    CHECK_THROWS_AS(unit_radial({1.0, std::nan("")}), std::invalid_argument);
}

TEST_CASE("unit_radial properties: norm one and positive scale invariance") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> lam(0.1, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        PointN x(3);
        for (auto& v : x) v = g(rng);
        if (norm(x) == 0.0) continue;
        const PointN u = unit_radial(x);
        CHECK(norm(u) == doctest::Approx(1.0).epsilon(1e-12));
        PointN xs = x;
        const double l = lam(rng);
        for (auto& v : xs) v *= l;
        const PointN us = unit_radial(xs);
        for (int c = 0; c < 3; ++c) CHECK(us[c] == doctest::Approx(u[c]).epsilon(1e-12));
    }
}

TEST_CASE("truncated_drift formula cases") {
    const auto one = DriftField::constant(1.0);
    const PointN f1 = truncated_drift({2.0, 0.0}, one, 10.0);
    CHECK(f1[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(f1[1] == 0.0);

    const PointN f2 = truncated_drift({0.0, 0.0}, one, 10.0);
    CHECK(f2[0] == 0.0);
    CHECK(f2[1] == 0.0);

    const PointN f3 = truncated_drift({0.05, 0.0}, one, 10.0);
    CHECK(f3[0] == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(f3[1] == 0.0);

    CHECK_THROWS_AS(truncated_drift({1.0, 0.0}, one, 0.0), std::invalid_argument);
}

TEST_CASE("truncated_drift agreement and magnitude bound") {
    const auto field = DriftField::constant(2.0);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> scale(0.0, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        PointN x(3);
        for (auto& v : x) v = g(rng);
        const double r = norm(x);
        if (r == 0.0) continue;
        const double want = scale(rng);
        for (auto& v : x) v *= want / r;

        const PointN fa = truncated_drift(x, field, 10.0);
        const PointN fb = truncated_drift(x, field, 100.0);
        if (norm(x) >= 0.1) {
            // truncation inactive for both: identical results, bit for bit
            for (int c = 0; c < 3; ++c) CHECK(fa[c] == fb[c]);
        }
        CHECK(norm(fa) <= 10.0 * field.bound() + 1e-12);
        CHECK(norm(fb) <= 100.0 * field.bound() + 1e-12);
    }
}

TEST_CASE("radial projection bound") {
    CHECK(radial_projection_bound({0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(1.0));
    CHECK(radial_projection_bound({0.5, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(radial_projection_bound({0.6, 0.0}, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(radial_projection_bound({0.0, 0.0}, {0.5, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(radial_projection_bound({0.0, 0.0}, {3.0, 0.0}), std::invalid_argument);
}

TEST_CASE("radial projection bound stays >= 1/2 on random valid pairs") {
    // independent random-search oracle over the constraint set
    for (int n : {2, 3, 8}) {
        std::mt19937_64 rng(1000 + n);
        std::normal_distribution<double> g;
        std::uniform_real_distribution<double> ra(0.0, 0.5), rb(1.0, 2.5);
        double worst = 1e300;
        for (int trial = 0; trial < 100000; ++trial) {
            PointN a(n), b(n);
            double na = 0, nb = 0;
            for (int c = 0; c < n; ++c) {
                a[c] = g(rng);
                b[c] = g(rng);
                na += a[c] * a[c];
                nb += b[c] * b[c];
            }
            na = std::sqrt(na);
            nb = std::sqrt(nb);
            if (na == 0.0 || nb == 0.0) continue;
            const double wa = ra(rng) / na, wb = rb(rng) / nb;
            for (int c = 0; c < n; ++c) {
                a[c] *= wa;
                b[c] *= wb;
            }
            worst = std::min(worst, radial_projection_bound(a, b));
        }
        CHECK(worst >= 0.5 - 1e-9);
    }
}

TEST_CASE("drift field families and validation") {
    const auto c = DriftField::constant(3.0);
    CHECK(c(0.0) == 3.0);
    CHECK(c(100.0) == 3.0);
    CHECK(c.bound() == 3.0);
    CHECK(c.is_zero() == false);
    CHECK(DriftField::constant(0.0).is_zero());
    CHECK_THROWS_AS(DriftField::constant(-1.0), std::invalid_argument);

    const auto t = DriftField::table({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0}, 2.0, 2.0);
    CHECK(t(0.5) == doctest::Approx(1.0));
    CHECK(t(1.5) == doctest::Approx(1.0));
    CHECK(t(10.0) == doctest::Approx(0.0)); // constant extrapolation
    // value above the declared bound
    CHECK_THROWS_AS(DriftField::table({0.0, 1.0}, {0.0, 3.0}, 2.0, 5.0), std::invalid_argument);
    // slope above the declared Lipschitz constant
    CHECK_THROWS_AS(DriftField::table({0.0, 1.0}, {0.0, 2.0}, 2.0, 0.5), std::invalid_argument);

    const auto bump = DriftField::named("gaussian_bump",
                                        {{"amplitude", 1.0}, {"center", 2.0}, {"width", 0.5}},
                                        1.0, 3.0);
    CHECK(bump(2.0) == doctest::Approx(1.0));
    CHECK(bump(0.0) < 1e-5);
    CHECK_THROWS_AS(DriftField::named("no_such", {}, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("drift field rescaling evaluates F(lambda r)") {
    const auto t = DriftField::table({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0}, 2.0, 2.0);
    const auto s = t.rescaled(2.0);
    CHECK(s(0.5) == doctest::Approx(t(1.0)));
    CHECK(s(1.0) == doctest::Approx(t(2.0)));
    CHECK(s.lipschitz() == doctest::Approx(2.0 * t.lipschitz()));
    // constant fields are unchanged by rescaling
    const auto c = DriftField::constant(1.5).rescaled(7.0);
    CHECK(c(0.3) == 1.5);
}

TEST_CASE("regions and distance to origin") {
    const auto hs = Region::half_space(3, 2.0, 4.0);
    CHECK(hs.distance_to_origin() == doctest::Approx(2.0));

    const auto bc = Region::ball_complement(2, {0.0, 0.0}, 1.5);
    CHECK(bc.distance_to_origin() == doctest::Approx(1.5));
    const auto bc2 = Region::ball_complement(2, {1.0, 0.0}, 1.5);
    CHECK(bc2.distance_to_origin() == doctest::Approx(0.5));

    const auto disc = Region::lateral_disc(3, 1.0, 2.0);
    CHECK(disc.distance_to_origin() == doctest::Approx(1.0));
    const auto disc_off = Region::lateral_disc(3, 1.0, 1.0, {5.0, 0.0});
    CHECK(disc_off.distance_to_origin() == doctest::Approx(std::sqrt(1.0 + 16.0)));

    const auto cyl = Region::cylinder(3, {1.0, 0.0, 0.0}, 0.5);
    CHECK(cyl.distance_to_origin() == doctest::Approx(1.0));

    CHECK_THROWS_AS(Region::ball_complement(2, {0.0, 0.0}, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(Region::cylinder(2, {1.0, 0.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Region::ball_complement(3, {0.0, 0.0}, 1.0), std::invalid_argument);
}
