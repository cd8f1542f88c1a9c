#include <cmath>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "henon/checks.hpp"
#include "henon/extended.hpp"
#include "henon/green.hpp"

using namespace henon;

namespace {

std::vector<PlanePoint> escaping(const HenonSystem& sys, int n, std::uint64_t seed, bool complex_pts) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-6, 6);
    std::vector<PlanePoint> out;
    while (int(out.size()) < n) {
        PlanePoint z = complex_pts ? PlanePoint{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))} : PlanePoint{u(rng), u(rng)};
        auto g = green_plus(sys, z);
        if (g.escaped && g.value > 0.05) out.push_back(z);
    }
    return out;
}

}  // namespace

TEST_SUITE("green") {

TEST_CASE("G+ against the extended-precision direct limit") {
    for (auto sys : {fx::quad(), fx::cubic()}) {
        const int n = sys.degree() == 2 ? 40 : 26;
        for (auto& z : escaping(sys, 25, 11, true)) {
            auto g = green_plus(sys, z);
            double ref = green_direct_extended(sys, z, n, true);
            CHECK(std::abs(g.value - ref) < 1e-9 * std::max(1.0, ref));
            CHECK(std::abs(g.value - ref) <= g.error_bound + 1e-10);
        }
    }
}

TEST_CASE("G- against the extended-precision direct limit") {
    auto sys = fx::quad();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-8, 8);
    int seen = 0;
    while (seen < 20) {
        PlanePoint z{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
        auto g = green_minus(sys, z);
        if (!g.escaped || g.value < 0.05) continue;
        ++seen;
        double ref = green_direct_extended(sys, z, 40, false);
        CHECK(std::abs(g.value - ref) < 1e-8 * std::max(1.0, ref));
    }
}

TEST_CASE("asymptotics far out in V+") {
    auto sys = fx::quad();
    // G+(x, y) = log|y| + O(1/|y|) with |y| >> |x|
    for (double y : {1e3, 1e5, 1e7}) {
        auto g = green_plus(sys, {1.0, y});
        CHECK(std::abs(g.value - std::log(y)) < 20.0 / y);
    }
}

TEST_CASE("functional equations") {
    auto sys = fx::cubic();
    const double d = sys.degree();
    for (auto& z : escaping(sys, 30, 2, true)) {
        auto fz = apply(sys, z);
        double g0 = green_plus(sys, z).value, g1 = green_plus(sys, fz).value;
        CHECK(std::abs(g1 - d * g0) < 1e-9 * g1);
        if (classify(sys, z) != RegionTag::v_plus) continue;
        BottcherValue b0;
        try {
            b0 = bottcher_plus(sys, z);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::domain);
            continue;
        }
        {
            auto b1 = bottcher_plus(sys, fz);
            CHECK(std::abs(b1.value - std::pow(b0.value, 3)) < 1e-9 * std::abs(b1.value));
            CHECK(std::abs(std::log(std::abs(b0.value)) - g0) < 1e-9 * std::max(1.0, g0));
        }
    }
}

TEST_CASE("gradient against central differences") {
    auto sys = fx::quad();
    const double h = 1e-6;
    for (auto& z : escaping(sys, 20, 8, false)) {
        auto g = grad_green_plus(sys, z);
        if (g.value < 0.5) continue;
        // real point: d/dRe x G = 2 Re(dG/dx)
        double gx = (green_plus(sys, {z.x + h, z.y}).value - green_plus(sys, {z.x - h, z.y}).value) / (2 * h);
        double gy = (green_plus(sys, {z.x, z.y + h}).value - green_plus(sys, {z.x, z.y - h}).value) / (2 * h);
        CHECK(std::abs(gx - 2 * g.gradient.bx.real()) < 1e-6 * std::max(1.0, std::abs(gx)));
        CHECK(std::abs(gy - 2 * g.gradient.by.real()) < 1e-6 * std::max(1.0, std::abs(gy)));
    }
}

TEST_CASE("G+ is tiny at a saddle") {
    auto sys = fx::quad();
    // fixed point on the diagonal: y^2 - 1.3 y - 6 = 0
    double y = (1.3 + std::sqrt(1.69 + 24)) / 2;
    auto g = green_plus(sys, {y, y});
    // rounding pushes the orbit off the saddle, so it leaves after many steps
    CHECK(g.value < 1e-5);
    CHECK(g.escape_index > 10);
}

TEST_CASE("projective distance is phase blind") {
    auto a = make_direction({cplx(1, 2), cplx(-0.5, 0.3)});
    auto b = make_direction({cplx(1, 2) * std::polar(3.0, 1.1), cplx(-0.5, 0.3) * std::polar(3.0, 1.1)});
    CHECK(projective_distance(a, b) < 1e-15);
    auto c = make_direction({cplx(0), cplx(1)});
    auto e = make_direction({cplx(1), cplx(0)});
    CHECK(std::abs(projective_distance(c, e) - 1.0) < 1e-15);
}

TEST_CASE("tangency determinant on the diagonal") {
    auto sys = fx::quad();
    CHECK(std::abs(tangency_diagonal_error(sys, 1e4)) < 1e-3);
    CHECK(std::abs(tangency_diagonal_error(sys, 1e5)) < std::abs(tangency_diagonal_error(sys, 1e3)));
}

}
