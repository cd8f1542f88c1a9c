#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "henon/exponents.hpp"

using namespace henon;

TEST_SUITE("exponents") {

TEST_CASE("period one average by hand") {
    auto sys = fx::quad();
    const double disc = std::sqrt(1.3 * 1.3 + 24);
    double acc = 0;
    for (double y : {(1.3 - disc) / 2, (1.3 + disc) / 2}) {
        double tr = 2 * y, det = 0.3;
        double s = std::sqrt(tr * tr - 4 * det);
        acc += std::log(std::max(std::abs(tr + s), std::abs(tr - s)) / 2);
    }
    auto e = periodic_estimate(sys, 1);
    CHECK(e.fixed_points == 2);
    CHECK(e.lambda_plus == doctest::Approx(acc / 2).epsilon(1e-13));
}

TEST_CASE("periodic exponents sum to log|a|") {
    for (auto sys : {fx::quad(), fx::cubic()}) {
        auto e = periodic_estimate(sys, sys.degree() == 2 ? 9 : 5);
        CHECK(std::abs(e.lambda_plus + e.lambda_minus - std::log(std::abs(sys.jacobian_det()))) < 1e-12);
        CHECK(e.min_unstable_rate > std::log(double(sys.degree())) - 0.1);
    }
}

TEST_CASE("directional average approaches the top exponent") {
    auto sys = fx::quad();
    auto e = periodic_estimate(sys, 10);
    double l = directional_exponent(sys, {cplx(0.3), cplx(1.0)}, 10);
    CHECK(std::abs(l - e.lambda_plus) < 0.1);
    CHECK_THROWS_AS(directional_exponent(sys, {cplx(0), cplx(0)}, 4), Error);
}

TEST_CASE("formula tracks the periodic average at modest depth") {
    auto sys = fx::quad();
    auto saddle = periodic_orbit(sys, Itinerary{{1}});
    AtlasOptions o;
    o.reality = false;
    auto seq = bends_sequence(sys, saddle, 8, {}, o);
    REQUIRE(seq.rows.size() == 3);
    CHECK(seq.rows.back().depth == 8);
    auto f = lyapunov_formula(sys, seq.atlas);
    auto e = periodic_estimate(sys, 10);
    CHECK(std::abs(f.value - e.lambda_plus) < 1e-2);
    CHECK(f.value >= f.log_d);
}

TEST_CASE("minus formula from the inverse normal form") {
    auto sys = fx::quad();
    auto inv = sys.inverse_normal_form();
    CHECK(inv.degree() == 2);
    CHECK(std::abs(std::abs(inv.jacobian_det()) * std::abs(sys.jacobian_det()) - 1) < 1e-14);
    auto saddle = periodic_orbit(inv, Itinerary{{1}});
    AtlasOptions o;
    o.reality = false;
    RefineParams rp;
    auto seq = bends_sequence(inv, saddle, 8, rp, o);
    auto m = lyapunov_minus_formula(inv, seq.atlas);
    auto e = periodic_estimate(sys, 10);
    CHECK(std::abs(m.value - e.lambda_minus) < 1e-2);
}

TEST_CASE("report gates before any work") {
    auto weak = system_from_json(nlohmann::json::parse(R"({"factors":[{"degree":2,"tail":[0.1],"a":0.3}]})"));
    ReportSettings s;
    try {
        make_report(weak, s);
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::horseshoe_check_failed);
    }
}

}
