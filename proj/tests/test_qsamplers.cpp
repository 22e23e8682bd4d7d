#include <doctest.h>

#include <cmath>

#include "penal/parallel.hpp"
#include "penal/qsamplers.hpp"
#include "penal/stats.hpp"

using namespace penal;

TEST_CASE("taboo density and cdf") {
    const TabooParams p(1.0, 1.0);
    CHECK(taboo_cdf(p, 0.5) == doctest::Approx(0.9375));
    CHECK(taboo_cdf(p, -0.25) == doctest::Approx(0.2109375));
    CHECK(taboo_cdf(p, 0.0) == doctest::Approx(0.5));
    CHECK(taboo_density(p, 0.0) == doctest::Approx(1.5));
    CHECK(taboo_drift(p, 0.5) < 0.0);
    CHECK(taboo_drift(p, -0.5) > 0.0);
}

TEST_CASE("taboo steps never leave the interval") {
    const TabooParams p(1.0, 2.0);
    RngStream r(Seed{4}, StreamId{4});
    double y = 0.0;
    for (int k = 0; k < 200000; ++k) {
        y = taboo_step(p, y, 0x1.0p-8, 10.0 * 0x1.0p-4, r);
        REQUIRE(y < p.s);
        REQUIRE(y > -p.i);
    }
}

TEST_CASE("terminal pmf of the down-crossing family started at a") {
    const GSequence g = GSequence::geometric(0.5);
    for (int n = 0; n < 5; ++n) CHECK(downcross_terminal_pmf(g, Levels(0.0, 1.0), 0.0, n) == doctest::Approx(std::pow(0.5, n + 1)));
}

TEST_CASE("direct construction of the Azema-Yor Q-process gives S_inf ~ phi") {
    const DensityPhi phi = DensityPhi::exponential(1.0);
    QConfig cfg;
    cfg.dt = 0x1.0p-6;
    RngStream r(Seed{5}, StreamId{5});
    std::vector<double> s;
    for (int k = 0; k < 4000; ++k) {
        const QSample q = sample_q_phi_direct(phi, 0.0, cfg, r);
        REQUIRE(q.valid);
        s.push_back(*q.terminals.s_inf);
    }
    CHECK(ks_test(s, [](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x); }).p_value > 0.001);
}

TEST_CASE("routes are named") {
    CHECK(route_name(Route::direct) == "A");
    CHECK(route_name(Route::sde) == "B");
    CHECK(route_name(Route::weighted) == "C");
}

TEST_CASE("route C weights average to one") {
    const WeightSpec spec = SignedLocalFamily{SignWeights::build(parse_function("exp 1 1"), parse_function("exp 1 1"))};
    QConfig cfg;
    cfg.dt = 0x1.0p-7;
    cfg.observe = {0.5};
    RngStream r(Seed{6}, StreamId{6});
    MeanAccumulator m;
    for (int k = 0; k < 10000; ++k) m.add(sample_weighted(spec, 0.0, cfg, r).weights.back());
    CHECK(std::abs(m.estimate().mean - 1.0) < 4.0 * m.estimate().std_error);
}
