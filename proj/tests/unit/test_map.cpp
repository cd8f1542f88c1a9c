#include <cmath>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "henon/core.hpp"

using namespace henon;

TEST_SUITE("map") {

TEST_CASE("single factor matches the formula by hand") {
    auto f = fx::quad();
    PlanePoint z{0.7, -1.3};
    auto w = apply(f, z);
    CHECK(std::abs(w.x - cplx(-1.3)) == 0);
    CHECK(std::abs(w.y - cplx(1.69 - 6 - 0.3 * 0.7)) < 1e-15);
    auto b = apply_inverse(f, w);
    CHECK(std::abs(b.x - z.x) < 1e-14);
    CHECK(std::abs(b.y - z.y) < 1e-14);
}

TEST_CASE("composition applies factors[0] last") {
    auto j = nlohmann::json::parse(
        R"({"factors":[{"degree":2,"tail":[-6.0],"a":0.3},{"degree":3,"tail":[0.5,-1.0],"a":[0.2,0.1]}]})");
    auto sys = system_from_json(j);
    CHECK(sys.degree() == 6);
    PlanePoint z{cplx(0.3, 0.1), cplx(-0.4, 0.2)};
    auto w = sys.factors()[0].apply(sys.factors()[1].apply(z));
    auto v = apply(sys, z);
    CHECK(std::abs(v.x - w.x) < 1e-13);
    CHECK(std::abs(v.y - w.y) < 1e-13);
    CHECK(std::abs(sys.jacobian_det() - cplx(0.3) * cplx(0.2, 0.1)) < 1e-15);
    CHECK(std::abs(jacobian(sys, z).det() - sys.jacobian_det()) < 1e-13);
}

TEST_CASE("jacobian against central differences") {
    auto sys = fx::cubic();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    const double h = 1e-6;
    for (int k = 0; k < 20; ++k) {
        PlanePoint z{u(rng), u(rng)};
        auto J = jacobian(sys, z);
        auto px = apply(sys, {z.x + h, z.y}), mx = apply(sys, {z.x - h, z.y});
        auto py = apply(sys, {z.x, z.y + h}), my = apply(sys, {z.x, z.y - h});
        CHECK(std::abs((px.x - mx.x) / (2 * h) - J.a00) < 1e-7);
        CHECK(std::abs((px.y - mx.y) / (2 * h) - J.a10) < 1e-7);
        CHECK(std::abs((py.x - my.x) / (2 * h) - J.a01) < 1e-7);
        CHECK(std::abs((py.y - my.y) / (2 * h) - J.a11) < 1e-6);
    }
}

TEST_CASE("escape region membership is forward invariant") {
    auto sys = fx::quad();
    PlanePoint z{1.0, 3 * sys.escape_radius()};
    REQUIRE(classify(sys, z) == RegionTag::v_plus);
    auto tr = orbit_until_escape(sys, z, 10);
    REQUIRE(tr.escape_index.has_value());
    CHECK(*tr.escape_index == 0);
    CHECK(classify(sys, apply(sys, z)) == RegionTag::v_plus);
    CHECK(classify(sys, {0.1, -0.2}) == RegionTag::v_box);
}

TEST_CASE("bad map specs are config errors") {
    auto bad = [](const char* text) {
        try {
            system_from_json(nlohmann::json::parse(text));
        } catch (const Error& e) {
            return e.code() == ErrorCode::config;
        }
        return false;
    };
    CHECK(bad(R"({"factors":[]})"));
    CHECK(bad(R"({"factors":[{"degree":2,"tail":[-6.0],"a":0}]})"));
    CHECK(bad(R"({"factors":[{"degree":1,"tail":[],"a":1}]})"));
    CHECK(bad(R"({"factors":[{"degree":2,"tail":[-6.0,1.0],"a":0.3}]})"));
    CHECK(bad(R"({"nope":1})"));
}

TEST_CASE("json round trip") {
    auto sys = fx::cubic();
    auto again = system_from_json(system_to_json(sys));
    CHECK(again.degree() == 3);
    CHECK(again.escape_radius() == sys.escape_radius());
}

}
