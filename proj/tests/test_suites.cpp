#include <doctest.h>

#include "penal/config.hpp"
#include "penal/errors.hpp"
#include "penal/suites.hpp"

using namespace penal;

TEST_CASE("suite catalog") {
    const auto names = suite_names();
    CHECK(names == std::vector<std::string>{"martingale", "penalization", "qlaws", "lemmas", "paths"});
    const std::string d = describe_suite("qlaws");
    CHECK(d.find("route A") != std::string::npos);
    CHECK(d.find("B (") != std::string::npos);
    CHECK(d.find("C (") != std::string::npos);
    try {
        describe_suite("qlaw");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("did you mean 'qlaws'") != std::string::npos);
    }
    CHECK(edit_distance("kitten", "sitting") == 3);
}

TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config(
        "[run]\nsuite = paths\nseed = 7\nworkers = 2\n[grid]\ndt = 0.0009765625\n[params]\npaths.n = 100\n"
        "[family.geo]\nkind = downcross\nG = geometric 0.25\na = 0\nb = 2\n");
    CHECK(c.suite == "paths");
    CHECK(*c.seed == 7);
    CHECK(*c.workers == 2);
    CHECK(c.params.at("paths.n") == 100);
    REQUIRE(c.families.size() == 1);
    CHECK(c.families[0].first == "geo");

    try {
        parse_config("[run]\nseed = 1\nthis line is broken\n");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    try {
        parse_config("[family.x]\nkind = phi\nphi = exponential -1\n");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("condition") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("[params]\npaths.m = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nseed = -3\n"), ConfigError);
    CHECK_THROWS_AS(suite_options(parse_config("[run]\nsuite = paths\n")), ConfigError);
}

TEST_CASE("csv rows") {
    ResultRow r;
    r.name = "a, b";
    r.t = 0.1;
    r.estimate = 1.0 / 3.0;
    r.pass = true;
    r.seed = 9;
    CHECK(csv_header() == "name,t,estimate,se,target,margin,pass,seed,wall_ms,invalid,reason");
    CHECK(csv_row(r) == "\"a, b\",0.10000000000000001,0.33333333333333331,0,0,0,1,9,0,0,");
}

TEST_CASE("suite rows are reproducible and independent of the worker count") {
    SuiteOptions opt;
    opt.ctx = RunContext{Seed{5}, 1, 100};
    opt.params["paths.n"] = 300;
    opt.dt = 0x1.0p-6;
    const auto a = run_suite("paths", opt);
    opt.ctx.workers = 3;
    const auto b = run_suite("paths", opt);
    REQUIRE(a.size() == b.size());
    REQUIRE(!a.empty());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(csv_row(a[k]) == csv_row(b[k]));
    opt.params["paths.nn"] = 1;
    CHECK_THROWS_AS(run_suite("paths", opt), ConfigError);
}
