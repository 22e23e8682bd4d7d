#include <doctest.h>

#include <cmath>
#include <numbers>

#include "penal/verification.hpp"

using namespace penal;

TEST_CASE("event specs") {
    const EventSpec all = EventSpec::everything(1.0);
    PathState st{1.0, 5.0, 5.0, 0.0, 0.0, 0, Leg::up};
    CHECK(all.contains(st));
    const EventSpec ev(0.5, {{Functional::s, -INFINITY, 0.8}}, "S<=0.8");
    st.s = 0.8;
    CHECK(ev.contains(st));
    st.s = 0.81;
    CHECK_FALSE(ev.contains(st));
    CHECK_THROWS_AS(EventSpec(-1.0, {}), ConfigError);
    CHECK(event_battery(DownCrossFamily{GSequence::geometric(0.5), Levels(0.0, 1.0)}).size() == 3);
    CHECK(event_battery(PhiFamily{DensityPhi::exponential(1.0)}).size() == 2);
}

TEST_CASE("down-crossing counts from the passage-time law") {
    const Levels lv(0.0, 1.0);
    CHECK(downcross_at_least(0.0, Leg::up, lv, 4.0, 0) == 1.0);
    CHECK(downcross_at_least(0.0, Leg::up, lv, 4.0, 1) == doctest::Approx(0.31731050786291415).epsilon(1e-12));
    CHECK(downcross_at_least(0.0, Leg::up, lv, 4.0, 2) == doctest::Approx(0.045500263896358431).epsilon(1e-12));
}

TEST_CASE("down-crossing rate by exact sums") {
    const GSequence g = GSequence::geometric(0.5);
    const LemmaReport r = downcross_rate_check([&](int n) { return g.G(n); }, 2.0, 0.0, Levels(0.0, 1.0), 1e6);
    CHECK(r.lhs == doctest::Approx(3.1915105839039883).epsilon(1e-9));
    CHECK(r.rhs == doctest::Approx(3.1915382432114616).epsilon(1e-12));
}

TEST_CASE("maximum asymptote quadrature") {
    const LemmaReport r = maximum_asymptote_check(parse_function("exp 1 1"), 0.0, 0.0, 1.0);
    CHECK(r.lhs == doctest::Approx(0.52315658373024687).epsilon(1e-9));
    CHECK(r.rhs == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));
    for (const auto& b : r.bounds) CHECK(b.holds());
    const LemmaReport far = maximum_asymptote_check(parse_function("exp 1 1"), 0.0, 0.0, 1e4);
    CHECK(far.ratio() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("Kennedy asymptote quadrature") {
    const KennedyPsi psi = KennedyPsi::build(1.0, parse_function("const 2"));
    const LemmaReport r = kennedy_asymptote_check(psi, 0.0, 0.0, 1.0);
    CHECK(r.lhs == doctest::Approx(3.3653789842741721).epsilon(1e-8));
    for (const auto& b : r.bounds) CHECK(b.holds());
    CHECK(kennedy_asymptote_check(psi, 1.0, -1.0, 1e4).ratio() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("local-time asymptote") {
    const RunContext ctx{Seed{3}, 1, 1000};
    const LemmaReport r = local_time_asymptote_check(parse_function("exp 1 1"), 0.0, 0.0, 1e4, 100000, ctx);
    CHECK(std::abs(r.ratio() - 1.0) < 0.02);
}

TEST_CASE("bad inputs to the checkers") {
    CHECK_THROWS_AS(maximum_asymptote_check(parse_function("exp 1 1"), 0.0, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(downcross_rate_check([](int) { return 1.0; }, 1.0, 0.0, Levels(0.0, 1.0), -1.0), ConfigError);
    TabooConstantConfig cfg;
    cfg.times = {};
    CHECK_THROWS_AS(taboo_constant_check(1.0, 1.0, cfg, RunContext{}), ConfigError);
}

TEST_CASE("penalization ratio of the whole space is one") {
    PenalizationConfig cfg;
    cfg.dt = 0x1.0p-6;
    cfg.times = {4.0};
    cfg.n = 500;
    const WeightSpec spec = PhiFamily{DensityPhi::exponential(1.0)};
    const McEstimate r = penalization_ratio(spec, EventSpec::everything(0.5), 4.0, cfg, RunContext{Seed{1}, 1, 100});
    CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
}
