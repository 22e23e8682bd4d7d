#include <doctest.h>

#include <cmath>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "penal/martingale.hpp"
#include "penal/parallel.hpp"
#include "penal/stats.hpp"
#include "penal/verification.hpp"
#include "penal/weights.hpp"

using namespace penal;

namespace {

boost::property_tree::ptree block(const std::string& text) {
    boost::property_tree::ptree t;
    std::istringstream in(text);
    boost::property_tree::read_ini(in, t);
    return t;
}

}  // namespace

TEST_CASE("piecewise functions: parse, evaluate, integrate") {
    const PiecewiseExpPoly e = parse_function("exp 2 1");
    CHECK(e(0.0) == doctest::Approx(2.0));
    CHECK(e(1.0) == doctest::Approx(2.0 / std::exp(1.0)));
    CHECK(e(-0.1) == 0.0);
    CHECK(e.integral(0.0, INFINITY) == doctest::Approx(2.0));
    const PiecewiseExpPoly box = parse_function("box 3 0.5");
    CHECK(box.integral(0.0, 10.0) == doctest::Approx(1.5));
    const PiecewiseExpPoly again = parse_function(format_function(e));
    CHECK(again(0.7) == doctest::Approx(e(0.7)));
    CHECK_THROWS_AS(parse_function("wiggle 1"), ConfigError);
}

TEST_CASE("admissibility is checked with the condition named") {
    CHECK_THROWS_AS(DensityPhi::exponential(-1.0), AdmissibilityError);
    CHECK_THROWS_AS(KennedyPsi::build(1.0, parse_function("piece 0 inf 0 term -1 0 0")), std::invalid_argument);
    CHECK_THROWS_AS(GSequence::geometric(1.5), std::invalid_argument);
    try {
        DensityPhi::exponential(0.0);
        FAIL("expected an admissibility error");
    } catch (const AdmissibilityError& e) {
        CHECK_FALSE(e.condition().empty());
    }
}

TEST_CASE("family blocks round-trip") {
    const WeightSpec w = parse_family(block("kind = kennedy\nlambda = 1\npsi = const 2\n"));
    boost::property_tree::ptree out;
    write_family(w, out);
    const WeightSpec back = parse_family(out);
    const PathState st{0.3, 0.1, 0.5, 0.2, 0.0, 0, Leg::up};
    CHECK(martingale_value(back, st) == doctest::Approx(martingale_value(w, st)));
    CHECK(family_kind(back) == "kennedy");
    CHECK_THROWS_AS(parse_family(block("kind = nope\n")), ConfigError);
    const WeightSpec atoms = parse_family(block("kind = atoms\natoms = 1 1 0.3 ; 2 0.5 0.7\n"));
    CHECK(std::get<AtomFamily>(atoms).nu.atoms().size() == 2);
}

TEST_CASE("martingale values against hand-computed references") {
    CHECK(m_phi(1.0, 0.3, DensityPhi::exponential(1.0)) == doctest::Approx(0.62539504999145201).epsilon(1e-12));
    const KennedyPsi k = KennedyPsi::build(1.0, parse_function("const 2"));
    CHECK(m_kennedy(1.0, 0.5, 0.3, k) == doctest::Approx(1.9411133253542732).epsilon(1e-12));
    const SignWeights w = SignWeights::build(parse_function("exp 1 1"), parse_function("exp 1 1"));
    CHECK(m_signed_local(0.2, 0.0, 0.5, w) == doctest::Approx(0.72783679165516013).epsilon(1e-12));
    const AtomMeasure nu = AtomMeasure::build({{1.0, 1.0, 1.0}});
    CHECK(m_nu(0.5, 0.2, 0.3, 0.0, 0.4, nu) == doctest::Approx(1.0442772883488891).epsilon(1e-12));
    CHECK(m_nu(1.1, 0.2, 0.3, 0.0, 0.4, nu) == 0.0);
    CHECK(m_nu_star(0.5, 0.3, 0.4, nu) > 0.0);
}

TEST_CASE("initial martingale values") {
    CHECK(martingale_initial(PhiFamily{DensityPhi::exponential(1.0)}, 0.0) == doctest::Approx(1.0));
    CHECK(martingale_initial(KennedyFamily{KennedyPsi::build(1.0, parse_function("const 2"))}, 0.0) == doctest::Approx(2.0));
    CHECK(martingale_initial(DownCrossFamily{GSequence::geometric(0.5), Levels(0.0, 1.0)}, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("G sequences") {
    const GSequence g = GSequence::geometric(0.5);
    CHECK(g.G(0) == 1.0);
    CHECK(g.dG(2) == doctest::Approx(0.125));
    CHECK(g.index_at_least(0.3) == 1);
    CHECK(sequence_sum(g) == doctest::Approx(2.0));
    CHECK(sequence_sum(GSequence::power(2.0)) == doctest::Approx(1.6449340668482264));
    CHECK_THROWS(sequence_sum(GSequence::power(1.0)));
}

TEST_CASE("drift is the log-derivative of the martingale") {
    const WeightSpec spec = KennedyFamily{KennedyPsi::build(1.0, parse_function("const 2"))};
    PathState st{0.5, 0.2, 0.6, 0.1, 0.0, 0, Leg::up};
    const double h = 1e-6;
    PathState up = st, dn = st;
    up.x += h;
    dn.x -= h;
    const double fd = (std::log(martingale_value(spec, up)) - std::log(martingale_value(spec, dn))) / (2 * h);
    CHECK(drift_J(spec, st) == doctest::Approx(fd).epsilon(1e-5));
    const WeightSpec phi = PhiFamily{DensityPhi::uniform(1.0)};
    CHECK_THROWS_AS(drift_J(phi, PathState{0.5, -2.0, 2.0, 2.0, 0.0, 0, Leg::up}), AbsorbedError);
}

TEST_CASE("martingale property on a short horizon") {
    for (const WeightSpec& spec : {WeightSpec{PhiFamily{DensityPhi::exponential(1.0)}},
                                   WeightSpec{AtomFamily{AtomMeasure::build({{1.0, 1.0, 1.0}})}},
                                   WeightSpec{DownCrossFamily{GSequence::geometric(0.5), Levels(0.0, 1.0)}}}) {
        const WalkerConfig cfg = walker_config_for(spec, 0x1.0p-7);
        const RunContext ctx{Seed{21}, 1, 500};
        const McEstimate e =
            parallel_accumulate<MeanAccumulator>(ctx, stream_tag("unit/" + family_kind(spec)), 10000,
                                                 [&](RngStream& rng, std::size_t b, std::size_t en, MeanAccumulator& out) {
                                                     for (std::size_t j = b; j < en; ++j) {
                                                         BrownianWalker w(cfg, 0.0);
                                                         w.run_until(0.5, rng);
                                                         out.add(martingale_value(spec, w.state()));
                                                     }
                                                 })
                .estimate();
        CHECK(std::abs(e.mean - martingale_initial(spec, 0.0)) < 4.0 * e.std_error);
    }
}
