#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "henon/critical.hpp"

using namespace henon;

TEST_SUITE("critical") {

TEST_CASE("bend atlas counts and weights") {
    for (auto sys : {fx::quad(), fx::cubic()}) {
        const int d = sys.degree();
        const int n = d == 2 ? 6 : 4;
        auto saddle = periodic_orbit(sys, Itinerary{{d - 1}});
        auto curve = grow_unstable_curve(sys, saddle, n);
        auto A = atlas_bends(sys, curve);
        const double per = std::pow(d, n - 1);
        REQUIRE(A.per_bend_count.size() == std::size_t(d - 1));
        double wsum = 0, isum = 0;
        for (auto& a : A.atoms) {
            wsum += a.weight;
            isum += a.weight * a.g_plus;
            CHECK(a.weight == doctest::Approx(std::pow(d, -n)).epsilon(1e-15));
        }
        for (int k : A.per_bend_count) CHECK(k == per);
        CHECK(A.total_mass == doctest::Approx(wsum).epsilon(1e-14));
        CHECK(A.integral == doctest::Approx(isum).epsilon(1e-14));
        CHECK(A.max_reality_dev < 1e-8);
    }
}

TEST_CASE("atoms are critical points of G+ along the curve") {
    auto sys = fx::quad();
    auto saddle = periodic_orbit(sys, Itinerary{{1}});
    auto curve = grow_unstable_curve(sys, saddle, 5);
    auto A = atlas_bends(sys, curve);
    const double h = 1e-4;
    int checked = 0;
    for (auto& a : A.atoms) {
        UnstableChart chart(sys, saddle, a.chart_word);
        auto p = chart.eval(a.xi + h, a.chart_steps), m = chart.eval(a.xi - h, a.chart_steps),
             c = chart.eval(a.xi, a.chart_steps);
        if (!p.ok || !m.ok || !c.ok) continue;
        double gp = green_plus(sys, p.point).value, gm = green_plus(sys, m.point).value,
               g0 = green_plus(sys, c.point).value;
        // first difference vanishes to O(h^3) while the second is O(h^2)
        CHECK(std::abs(gp - gm) < 1e-3 * std::abs(gp + gm - 2 * g0) + 1e-12);
        CHECK(std::abs(g0 - a.g_plus) < 1e-10 * std::max(1.0, g0));
        CHECK(std::abs(c.point.y) > curve.box_radius);
        ++checked;
    }
    CHECK(checked == int(A.atoms.size()));
}

TEST_CASE("every gap has one critical point") {
    auto sys = fx::cubic();
    auto saddle = periodic_orbit(sys, Itinerary{{2}});
    auto curve = grow_unstable_curve(sys, saddle, 3);
    auto gaps = find_gaps(sys, curve);
    GreenEngine engine(sys);
    int interior = 0;
    for (auto& g : gaps) {
        if (g.truncated) continue;
        ++interior;
        CHECK_NOTHROW(gap_critical_point(sys, saddle, g, engine));
    }
    // 3^3 crossings leave 3^3 - 1 gaps between them
    CHECK(interior == 26);
}

TEST_CASE("level band agrees with bends and is t invariant") {
    auto sys = fx::quad();
    auto saddle = periodic_orbit(sys, Itinerary{{1}});
    auto curve = grow_unstable_curve(sys, saddle, 7);
    AtlasOptions o;
    o.reality = false;
    auto B = atlas_bends(sys, curve, o);
    auto L1 = atlas_level(sys, curve, 1.0, o);
    auto L8 = atlas_level(sys, curve, 0.8, o);
    auto L12 = atlas_level(sys, curve, 1.2, o);
    CHECK(std::abs(B.integral - L1.integral) < 1e-3);
    CHECK(std::abs(L8.integral - L12.integral) < 1e-3);
    for (auto& a : L8.atoms) {
        CHECK(a.g_plus >= 0.8 * (1 - 1e-9));
        CHECK(a.g_plus < 1.6 * (1 + 1e-9));
    }
}

TEST_CASE("reality check from both half planes") {
    auto sys = fx::quad();
    auto saddle = periodic_orbit(sys, Itinerary{{1}});
    auto curve = grow_unstable_curve(sys, saddle, 3);
    AtlasOptions o;
    o.reality = false;
    auto A = atlas_bends(sys, curve, o);
    GreenEngine engine(sys);
    for (auto& a : A.atoms) {
        auto r = reality_check(sys, saddle, a, engine);
        CHECK(r.converged);
        CHECK(r.deviation < 1e-8);
    }
}

}
