#include <cmath>
#include <complex>
#include <random>
#include <set>

#include <doctest.h>

#include "fixtures.hpp"
#include "henon/horseshoe.hpp"

using namespace henon;

TEST_SUITE("horseshoe") {

TEST_CASE("fixed points of the quadratic map in closed form") {
    auto sys = fx::quad();
    // y = x and y^2 - 6 - 0.3 y = y
    const double disc = std::sqrt(1.3 * 1.3 + 24);
    std::set<double> want = {(1.3 - disc) / 2, (1.3 + disc) / 2};
    auto orbits = all_periodic_orbits(sys, 1);
    REQUIRE(orbits.size() == 2);
    for (auto& o : orbits) {
        double y = o.ys[0];
        double best = INFINITY;
        for (double w : want) best = std::min(best, std::abs(w - y));
        CHECK(best < 1e-13);
        // eigenvalues of [[0,1],[-a,2y]]
        cplx tr = 2 * y, det = 0.3;
        cplx s = std::sqrt(tr * tr - 4.0 * det);
        double lu = std::max(std::abs((tr + s) / 2.0), std::abs((tr - s) / 2.0));
        double ls = std::min(std::abs((tr + s) / 2.0), std::abs((tr - s) / 2.0));
        CHECK(std::abs(std::abs(o.unstable_eigenvalue) - lu) < 1e-11 * lu);
        CHECK(std::abs(std::abs(o.stable_eigenvalue) - ls) < 1e-11);
    }
}

TEST_CASE("every itinerary gives a genuine period-n point") {
    for (auto sys : {fx::quad(), fx::cubic()}) {
        const int d = sys.degree();
        const int n = d == 2 ? 7 : 4;
        std::set<std::pair<long long, long long>> seen;
        for (std::uint64_t idx = 0; idx < std::uint64_t(std::pow(d, n)); ++idx) {
            auto it = Itinerary::from_index(idx, n, d);
            auto s = periodic_orbit(sys, it);
            PlanePoint z = s.orbit[0];
            for (int k = 0; k < n; ++k) z = apply(sys, z);
            CHECK(std::abs(z.x - s.orbit[0].x) + std::abs(z.y - s.orbit[0].y) < 1e-7);
            CHECK(s.residual < 1e-12);
            // identity from the determinant: lu * ls = a^n
            CHECK(std::abs(s.log_abs_unstable + s.log_abs_stable - n * std::log(std::abs(sys.jacobian_det()))) < 1e-10);
            seen.insert({std::llround(s.orbit[0].x.real() * 1e9), std::llround(s.orbit[0].y.real() * 1e9)});
        }
        CHECK(seen.size() == std::size_t(std::pow(d, n)));
    }
}

TEST_CASE("dedupe keeps the point count") {
    auto sys = fx::quad();
    for (int n = 1; n <= 10; ++n) {
        long pts = 0;
        auto orbits = all_periodic_orbits(sys, n, true);
        for (auto& o : orbits) pts += o.multiplicity;
        CHECK(pts == (1L << n));
    }
    // necklace count for n = 6: (64 + 8 + 4 + 2 + 2 + 2) / 6 ... cycles of f^6 = 14 = sum over divisors
    CHECK(all_periodic_orbits(sys, 6, true).size() == 14);
}

TEST_CASE("branch solver inverts each monotone piece") {
    auto sys = fx::cubic();
    BranchSolver bs(sys.factors()[0].poly);
    REQUIRE(bs.pieces() == 3);
    for (int piece = 0; piece < 3; ++piece)
        for (double v : {-20.0, -3.0, 0.0, 2.5, 40.0}) {
            double u = bs.root(piece, v);
            if (std::isnan(u)) continue;
            CHECK(std::abs(bs.eval(u) - v) < 1e-11 * std::max(1.0, std::abs(v)));
            CHECK(bs.piece_of(u) == piece);
        }
}

TEST_CASE("gate accepts the bundled maps and rejects a shallow one") {
    CHECK(check_horseshoe(fx::quad()).ok);
    CHECK(check_horseshoe(fx::cubic()).ok);
    auto weak = system_from_json(nlohmann::json::parse(R"({"factors":[{"degree":2,"tail":[0.1],"a":0.3}]})"));
    auto r = check_horseshoe(weak);
    CHECK_FALSE(r.ok);
    CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("tridiagonal solve against a dense residual") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    const int n = 12;
    std::vector<double> sub(n), diag(n), sup(n), rhs(n);
    for (int i = 0; i < n; ++i) {
        sub[i] = u(rng);
        sup[i] = u(rng);
        diag[i] = 4 + u(rng);
        rhs[i] = u(rng);
    }
    auto s0 = sub, d0 = diag, u0 = sup, r0 = rhs;
    solve_tridiagonal(sub, diag, sup, rhs);
    for (int i = 0; i < n; ++i) {
        double acc = d0[i] * rhs[i];
        if (i > 0) acc += s0[i] * rhs[i - 1];
        if (i + 1 < n) acc += u0[i] * rhs[i + 1];
        CHECK(std::abs(acc - r0[i]) < 1e-13);
    }
}

}
