#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "penal/errors.hpp"
#include "penal/rng.hpp"
#include "penal/stats.hpp"

using namespace penal;

TEST_CASE("Kolmogorov survival against reference values") {
    CHECK(kolmogorov_survival(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-10));
    CHECK(kolmogorov_survival(0.5) == doctest::Approx(0.96394524366487511).epsilon(1e-10));
}

TEST_CASE("KS distance of a tiny sample") {
    // points 0.25, 0.75 against U(0,1): distance 0.25
    CHECK(ks_distance({0.75, 0.25}, [](double x) { return std::clamp(x, 0.0, 1.0); }) == doctest::Approx(0.25));
    CHECK(ks_two_sample_distance({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(ks_two_sample_distance({1.0, 2.0}, {3.0, 4.0}) == 1.0);
}

TEST_CASE("constant sample is rejected against a continuous law") {
    const std::vector<double> c(100, 0.5);
    const TestReport rep = ks_test(c, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK_FALSE(rep.pass);
}

TEST_CASE("chi-square accepts its own law and rejects a shifted one") {
    const std::vector<double> pmf{0.5, 0.25, 0.25};
    CHECK(chi2_test({500, 250, 250}, pmf).pass);
    CHECK_FALSE(chi2_test({250, 250, 500}, pmf).pass);
}

TEST_CASE("mc_mean with unit weights is the plain mean") {
    const std::vector<double> v{1, 2, 3, 4};
    const McEstimate a = mc_mean(v);
    const McEstimate b = mc_mean(v, {1, 1, 1, 1});
    CHECK(a.mean == doctest::Approx(2.5));
    CHECK(b.mean == doctest::Approx(2.5));
    CHECK(a.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK_THROWS(mc_mean({}));
}

TEST_CASE("ratio accumulator") {
    RatioAccumulator r;
    r.add(1.0, 2.0);
    r.add(3.0, 2.0);
    CHECK(r.estimate().mean == doctest::Approx(1.0));
    RatioAccumulator z;
    z.add(1.0, 0.0);
    CHECK_THROWS_AS(z.estimate(), ConfigError);
    CHECK(combined_se({0, 3, 1}, {0, 4, 1}) == doctest::Approx(5.0));
}

TEST_CASE("KS p-values are roughly uniform under the null") {
    RngStream r(Seed{2}, StreamId{2});
    int below = 0;
    const int reps = 400;
    for (int k = 0; k < reps; ++k) {
        std::vector<double> s(200);
        for (auto& x : s) x = r.uniform();
        if (ks_test(s, [](double x) { return x; }).p_value < 0.1) ++below;
    }
    CHECK(std::abs(below / static_cast<double>(reps) - 0.1) < 0.05);
}
