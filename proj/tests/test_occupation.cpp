#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "flowlab/occupation.hpp"
#include "flowlab/stats.hpp"

using namespace flowlab;

TEST_CASE("occupation of trivial paths") {
    BrownianPath inside;
    inside.dimension = 2;
    for (int k = 0; k <= 10; ++k) {
        inside.times.push_back(0.1 * k);
        inside.positions.push_back(0.1);
        inside.positions.push_back(0.0);
    }
    CHECK(occupation_time(inside, {0.0, 0.0}, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

    BrownianPath outside = inside;
    for (std::size_t i = 0; i < outside.positions.size(); i += 2) outside.positions[i] = 50.0;
    CHECK(occupation_time(outside, {0.0, 0.0}, 1.0) == 0.0);

    CHECK_THROWS_AS(occupation_time(inside, {0.0, 0.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(occupation_time(inside, {0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("annulus occupation is additive, exactly") {
    const NoiseStream s(21, 0, 3);
    const auto path = generate_path(s, std::vector<double>(5000, 1e-3));
    const PointN center{0.0, 0.0, 0.0};
    const auto bins = occupation_annuli(path, center, 3);
    REQUIRE(bins.size() == 4);
    double total = 0.0;
    for (double b : bins) total += b;
    // every step lands in exactly one bin: the sum telescopes to the horizon
    CHECK(total == doctest::Approx(path.times.back()).epsilon(1e-12));

    // the union of the annuli is the ball of radius 2e^3
    const double direct = occupation_time(path, center, 2.0 * std::exp(3.0));
    double first3 = bins[0] + bins[1] + bins[2];
    CHECK(std::abs(first3 - direct) <= 1e-12);
}

TEST_CASE("occupation is monotone in the horizon, per path") {
    const NoiseStream s(22, 1, 2);
    const auto path = generate_path(s, std::vector<double>(3000, 1e-3));
    double prev = 0.0;
    for (std::size_t cut = 500; cut <= 3000; cut += 500) {
        BrownianPath prefix;
        prefix.dimension = 2;
        prefix.times.assign(path.times.begin(), path.times.begin() + cut + 1);
        prefix.positions.assign(path.positions.begin(),
                                path.positions.begin() + 2 * (cut + 1));
        const double occ = occupation_time(prefix, {0.0, 0.0}, 0.8);
        CHECK(occ >= prev);
        prev = occ;
    }
}

TEST_CASE("total occupation sampler: mean of L_5 (five-dimensional ball)" * doctest::timeout(600)) {
    // E L_d(B_1) from the center is 1/(d-2); for d = 5 that is 1/3
    OccupationSampleSpec spec;
    spec.dimension = 5;
    spec.dt = 1e-4;
    std::vector<double> samples;
    std::size_t nonconv = 0;
    for (std::uint64_t p = 0; p < 3000; ++p) {
        const auto s = sample_total_occupation(spec, NoiseStream(303, p, 5));
        samples.push_back(s.occupation);
        if (!s.converged) ++nonconv;
    }
    CHECK(nonconv == 0);
    CHECK(std::abs(mean(samples) - 1.0 / 3.0) / (1.0 / 3.0) <= 0.05);
}

TEST_CASE("total occupation sampler flags truncation") {
    OccupationSampleSpec spec;
    spec.dimension = 3;
    spec.dt = 1e-3;
    spec.horizon = 0.05; // far too short to escape
    const auto s = sample_total_occupation(spec, NoiseStream(5, 0, 3));
    CHECK(!s.converged);
    CHECK_THROWS_AS(sample_total_occupation(OccupationSampleSpec{2, 1.0, 1e-3, 0.0, 0.0},
                                            NoiseStream(1, 0, 2)),
                    std::invalid_argument);
}

TEST_CASE("occupation tail: rejections and trivial survival") {
    CHECK_THROWS_AS(occupation_tail(3, 1.0, {1.0}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(occupation_tail(4, 1.0, {}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(occupation_tail(4, 1.0, {-1.0}, 10, 1), std::invalid_argument);

    // s far below every observed value: survival 1; far above: survival 0
    const auto curve = occupation_tail(5, 1.0, {1e-9, 1e9}, 60, 2, 1e-3);
    REQUIRE(curve.points.size() == 2);
    CHECK(curve.points[0].survival.p_hat == 1.0);
    CHECK(curve.points[0].in_paper_regime == false);
    CHECK(curve.points[1].survival.p_hat == 0.0);
    CHECK(curve.points[1].in_paper_regime == true);
    const auto csv = curve.to_csv();
    CHECK(csv.find("n,r,s,survival,lo,hi,exceedances,in_paper_regime") == 0);
}

TEST_CASE("occupation tail decay rate is positive in the paper regime for n=4" * doctest::timeout(600)) {
    const auto curve = occupation_tail(4, 1.0, {2.2, 2.6, 3.0, 3.4}, 3000, 31, 1e-3);
    CHECK(curve.rate_valid);
    CHECK(curve.fitted_rate > 0.0);
    // L_3 has the law of the exit time of the interval [-1, 1]: rate pi^2/8
    CHECK(curve.fitted_rate == doctest::Approx(std::numbers::pi * std::numbers::pi / 8.0)
                                   .epsilon(0.35));
    for (const auto& p : curve.points) CHECK(p.in_paper_regime);
}

TEST_CASE("uniform ball-occupation surrogate is self-consistent") {
    // calibrate rho so that rho * e^{2k} / n sits at the empirical 99.9th
    // percentile over paths and random centers, then check the coverage the
    // calibrated bound implies on the same ensemble
    const int flow_n = 5; // occupation runs in n-1 = 4 dimensions
    const int d = flow_n - 1;
    const int k = 1;
    const double radius = 2.0 * std::exp(static_cast<double>(k));
    const double bound_unit = std::exp(2.0 * k) / static_cast<double>(flow_n);
    std::vector<double> values;
    for (std::uint64_t p = 0; p < 150; ++p) {
        const NoiseStream s(606, p, d);
        const auto path = generate_path(s, std::vector<double>(2000, 1e-3));
        for (std::uint64_t c = 0; c < 20; ++c) {
            const NoiseStream cs(607, c, d);
            PointN center(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i)
                center[static_cast<std::size_t>(i)] = 2.0 * cs.gaussian(0, i);
            values.push_back(occupation_time(path, center, radius));
        }
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double calibrated =
        sorted[static_cast<std::size_t>(0.999 * (sorted.size() - 1))];
    const double rho_hat = calibrated / bound_unit;
    CHECK(rho_hat > 0.0);
    std::size_t ok = 0;
    for (double v : values)
        if (v <= calibrated) ++ok;
    CHECK(static_cast<double>(ok) / static_cast<double>(values.size()) >= 0.99);
}

TEST_CASE("Ciesielski-Taylor identity at reduced scale" * doctest::timeout(900)) {
    const auto res = ct_identity_check(2, 3000, 1e-4, 404);
    CHECK(res.nonconverged == 0);
    CHECK(std::abs(res.mean_exit - 0.5) / 0.5 <= 0.03);
    CHECK(std::abs(res.mean_occupation - 0.5) / 0.5 <= 0.03);
    CHECK(res.ks < 0.04);
    CHECK_THROWS_AS(ct_identity_check(0, 100, 1e-3, 1), std::invalid_argument);
}
