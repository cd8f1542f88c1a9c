#include "henon/horseshoe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "henon/util.hpp"

namespace henon {

namespace {

using poly_t = std::vector<double>;  // ascending coefficients

double peval(const poly_t& c, double u) {
    double acc = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
    return acc;
}

poly_t pderiv(const poly_t& c) {
    poly_t out;
    for (std::size_t j = 1; j < c.size(); ++j) out.push_back(double(j) * c[j]);
    return out;
}

// monotone root of c on [lo, hi] given a sign change
double monotone_root(const poly_t& c, const poly_t& dc, double shift, double lo, double hi) {
    double flo = peval(c, lo) - shift, fhi = peval(c, hi) - shift;
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double fu = peval(c, u) - shift;
        if (fu == 0) return u;
        if ((fu < 0) == (flo < 0)) {
            lo = u;
            flo = fu;
        } else {
            hi = u;
        }
        double du = peval(dc, u);
        double nu = du != 0 ? u - fu / du : 0.5 * (lo + hi);
        if (!(nu > lo && nu < hi)) nu = 0.5 * (lo + hi);
        if (std::abs(nu - u) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u)) ||
            hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u)))
            return nu;
        u = nu;
    }
    return u;
}

std::vector<double> real_roots(const poly_t& c) {
    int n = int(c.size()) - 1;
    while (n > 0 && c[n] == 0) --n;
    if (n <= 0) return {};
    if (n == 1) return {-c[0] / c[1]};
    poly_t cc(c.begin(), c.begin() + n + 1);
    double B = 1;
    for (int j = 0; j < n; ++j) B = std::max(B, 1 + std::abs(cc[j] / cc[n]));
    std::vector<double> knots{-B};
    for (double r : real_roots(pderiv(cc)))
        if (r > -B && r < B) knots.push_back(r);
    knots.push_back(B);
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        double fa = peval(cc, knots[i]), fb = peval(cc, knots[i + 1]);
        if (fa == 0) {
            if (out.empty() || out.back() != knots[i]) out.push_back(knots[i]);
        } else if ((fa < 0) != (fb < 0) && fb != 0) {
            out.push_back(monotone_root(cc, pderiv(cc), 0.0, knots[i], knots[i + 1]));
        }
    }
    return out;
}

poly_t coeffs_of(const PolynomialSpec& p) {
    poly_t c;
    for (auto q : p.tail()) c.push_back(q.real());
    c.push_back(0.0);
    c.push_back(1.0);
    return c;
}

// Dense or Sherman-Morrison cyclic tridiagonal solve for the periodic-orbit Newton step.
std::vector<double> solve_cyclic(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                                 double top_right, double bottom_left, std::vector<double> rhs) {
    const int n = int(diag.size());
    if (n == 1) return {rhs[0] / (diag[0] + top_right + sup[0])};
    if (n == 2) {
        double a = diag[0], b = sup[0] + top_right, c = sub[1] + bottom_left, d = diag[1];
        double det = a * d - b * c;
        return {(d * rhs[0] - b * rhs[1]) / det, (a * rhs[1] - c * rhs[0]) / det};
    }
    double gamma = -diag[0];
    std::vector<double> d2 = diag;
    d2[0] -= gamma;
    d2[n - 1] -= bottom_left * top_right / gamma;
    std::vector<double> s1 = sub, dd = d2, p1 = sup, x = rhs;
    solve_tridiagonal(s1, dd, p1, x);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = bottom_left;
    s1 = sub;
    dd = d2;
    p1 = sup;
    solve_tridiagonal(s1, dd, p1, u);
    double fact = (x[0] + top_right * x[n - 1] / gamma) / (1.0 + u[0] + top_right * u[n - 1] / gamma);
    for (int i = 0; i < n; ++i) x[i] -= fact * u[i];
    return x;
}

struct Cocycle {
    double a;
    std::vector<double> dp;  // p'(y_k)
};

// dominant direction and log growth of the forward (or inverse) period product
std::pair<std::array<double, 2>, double> power_cycle(const Cocycle& c, bool inverse, double& sign) {
    const int n = int(c.dp.size());
    std::array<double, 2> v{1.0, 0.37};
    double nv = std::hypot(v[0], v[1]);
    v = {v[0] / nv, v[1] / nv};
    double logs = 0;
    for (int cyc = 0; cyc < 400; ++cyc) {
        std::array<double, 2> w = v;
        logs = 0;
        for (int j = 0; j < n; ++j) {
            int k = inverse ? n - 1 - j : j;
            std::array<double, 2> nw;
            if (!inverse)
                nw = {w[1], -c.a * w[0] + c.dp[k] * w[1]};
            else
                nw = {(c.dp[k] * w[0] - w[1]) / c.a, w[0]};
            double s = std::hypot(nw[0], nw[1]);
            logs += std::log(s);
            w = {nw[0] / s, nw[1] / s};
        }
        double dot = w[0] * v[0] + w[1] * v[1];
        sign = dot < 0 ? -1.0 : 1.0;
        double dist = std::abs(w[0] * v[1] - w[1] * v[0]);
        v = w;
        if (dist < 1e-15 && cyc > 2) break;
    }
    return {v, logs};
}

}  // namespace

template <class T>
void solve_tridiagonal(std::vector<T>& sub, std::vector<T>& diag, std::vector<T>& sup, std::vector<T>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        T w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

template void solve_tridiagonal<double>(std::vector<double>&, std::vector<double>&, std::vector<double>&,
                                        std::vector<double>&);
template void solve_tridiagonal<cplx>(std::vector<cplx>&, std::vector<cplx>&, std::vector<cplx>&, std::vector<cplx>&);

BranchSolver::BranchSolver(const PolynomialSpec& p) : p_(p) {
    if (!p.is_real()) throw Error(ErrorCode::argument, "branch solver needs a real polynomial");
    c_ = coeffs_of(p);
    dc_ = pderiv(c_);
    crit_ = real_roots(dc_);
    bound_ = 1.0;
    for (auto q : p.tail()) bound_ += std::abs(q);
}

int BranchSolver::piece_of(double u) const {
    return int(std::upper_bound(crit_.begin(), crit_.end(), u) - crit_.begin());
}

double BranchSolver::root(int piece, double v) const {
    const int np = pieces();
    if (piece < 0 || piece >= np) return std::numeric_limits<double>::quiet_NaN();
    if (p_.degree() == 2) {
        double w = v - c_[0];
        if (w < 0) return std::numeric_limits<double>::quiet_NaN();
        return piece == 0 ? -std::sqrt(w) : std::sqrt(w);
    }
    double lo, hi;
    double span = bound_ + std::pow(std::abs(v), 1.0 / p_.degree()) + 1.0;
    lo = piece == 0 ? (crit_.empty() ? -span : std::min(crit_.front(), 0.0) - span) : crit_[piece - 1];
    hi = piece == np - 1 ? (crit_.empty() ? span : std::max(crit_.back(), 0.0) + span) : crit_[piece];
    double flo = peval(c_, lo) - v, fhi = peval(c_, hi) - v;
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo < 0) == (fhi < 0)) return std::numeric_limits<double>::quiet_NaN();
    return monotone_root(c_, dc_, v, lo, hi);
}

double BranchSolver::root_near(int piece, double v, double guess) const {
    if (p_.degree() == 2) return root(piece, v);
    const int np = pieces();
    if (piece < 0 || piece >= np || !std::isfinite(guess)) return root(piece, v);
    double lo = piece == 0 ? -INFINITY : crit_[piece - 1];
    double hi = piece == np - 1 ? INFINITY : crit_[piece];
    double u = guess;
    if (!(u > lo && u < hi)) return root(piece, v);
    for (int it = 0; it < 8; ++it) {
        double du = peval(dc_, u);
        double nu = u - (peval(c_, u) - v) / du;
        if (!(nu > lo && nu < hi) || !std::isfinite(nu)) return root(piece, v);
        if (std::abs(nu - u) <= 1e-15 * std::max(1.0, std::abs(u))) return nu;
        u = nu;
    }
    return root(piece, v);
}

std::string Itinerary::str() const {
    std::string s;
    for (int k : symbols) s += char('0' + k);
    return s;
}

Itinerary Itinerary::from_index(std::uint64_t idx, int n, int d) {
    Itinerary it;
    it.symbols.assign(n, 0);
    for (int k = n - 1; k >= 0; --k) {
        it.symbols[k] = int(idx % d);
        idx /= d;
    }
    return it;
}

SaddleData periodic_orbit(const HenonSystem& sys, const Itinerary& itin, double tol) {
    if (!sys.single_real()) throw Error(ErrorCode::argument, "periodic orbits need a single real factor");
    const auto& f = sys.factors()[0];
    const int d = f.poly.degree(), n = itin.period();
    if (n < 1) throw Error(ErrorCode::argument, "empty itinerary");
    const double a = f.a.real();
    BranchSolver bs(f.poly);
    auto fail = [&](const std::string& why) {
        return Error(ErrorCode::no_orbit, "itinerary " + itin.str() + ": " + why);
    };
    if (bs.pieces() != d) throw fail("polynomial lacks d-1 real critical points");
    for (int s : itin.symbols)
        if (s < 0 || s >= d) throw Error(ErrorCode::argument, "symbol outside alphabet");

    std::vector<double> y(n);
    for (int k = 0; k < n; ++k) {
        double r = bs.root(itin.symbols[k], 0.0);
        y[k] = std::isfinite(r) ? r : 0.0;
    }
    auto at = [&](int k) { return y[((k % n) + n) % n]; };
    for (int sweep = 0; sweep < 300; ++sweep) {
        double change = 0;
        for (int k = 0; k < n; ++k) {
            double r = bs.root(itin.symbols[k], at(k + 1) + a * at(k - 1));
            if (!std::isfinite(r)) throw fail("branch inverse left its range");
            change = std::max(change, std::abs(r - y[k]) / (1 + std::abs(r)));
            y[k] = r;
        }
        if (change < 1e-14) break;
    }
    auto resid = [&](std::vector<double>& F) {
        double m = 0;
        for (int k = 0; k < n; ++k) {
            F[k] = at(k + 1) + a * at(k - 1) - bs.eval(y[k]);
            m = std::max(m, std::abs(F[k]));
        }
        return m;
    };
    std::vector<double> F(n);
    double r = resid(F);
    double scale = 1;
    for (double v : y) scale = std::max(scale, std::pow(std::abs(v), d));
    for (int it = 0; it < 30 && r > 0.1 * tol * scale; ++it) {
        std::vector<double> sub(n, a), diag(n), sup(n, 1.0), rhs(n);
        for (int k = 0; k < n; ++k) {
            diag[k] = -bs.derivative(y[k]);
            rhs[k] = -F[k];
        }
        auto dy = solve_cyclic(sub, diag, sup, a, 1.0, rhs);
        double lam = 1.0;
        std::vector<double> y0 = y;
        for (int tries = 0; tries < 20; ++tries) {
            for (int k = 0; k < n; ++k) y[k] = y0[k] + lam * dy[k];
            double nr = resid(F);
            if (nr < r || tries == 19) {
                r = nr;
                break;
            }
            lam *= 0.5;
        }
    }
    if (!(r <= tol * scale)) throw fail("Newton residual " + fmt17(r) + " above tolerance");
    for (int k = 0; k < n; ++k)
        if (bs.piece_of(y[k]) != itin.symbols[k]) throw fail("solution left its branch");

    SaddleData s;
    s.itinerary = itin;
    s.ys = y;
    s.residual = r;
    for (int k = 0; k < n; ++k) s.orbit.push_back({at(k - 1), y[k]});
    s.minimal_period = n;
    for (int p = 1; p < n; ++p) {
        if (n % p) continue;
        bool ok = true;
        for (int k = 0; k < n && ok; ++k) ok = itin.symbols[k] == itin.symbols[k % p];
        if (ok) {
            s.minimal_period = p;
            break;
        }
    }

    Cocycle c{a, {}};
    for (int k = 0; k < n; ++k) c.dp.push_back(bs.derivative(y[k]));
    double su = 1, ss = 1;
    auto [vu, lu] = power_cycle(c, false, su);
    auto [vs, lsinv] = power_cycle(c, true, ss);
    s.log_abs_unstable = lu;
    s.log_abs_stable = -lsinv;
    s.unstable_eigenvalue = su * std::exp(lu);
    s.stable_eigenvalue = ss * std::exp(-lsinv);
    s.unstable_eigenvector = {vu[0], vu[1]};
    s.stable_eigenvector = {vs[0], vs[1]};
    return s;
}

std::vector<SaddleData> all_periodic_orbits(const HenonSystem& sys, int n, bool dedupe) {
    if (n < 1) throw Error(ErrorCode::argument, "period must be >= 1");
    const int d = sys.degree();
    std::uint64_t count = 1;
    for (int k = 0; k < n; ++k) count *= d;
    std::vector<Itinerary> its;
    for (std::uint64_t i = 0; i < count; ++i) {
        Itinerary it = Itinerary::from_index(i, n, d);
        if (dedupe) {
            bool minimal = true;
            for (int r = 1; r < n && minimal; ++r) {
                std::vector<int> rot(it.symbols.begin() + r, it.symbols.end());
                rot.insert(rot.end(), it.symbols.begin(), it.symbols.begin() + r);
                if (rot < it.symbols) minimal = false;
            }
            if (!minimal) continue;
        }
        its.push_back(std::move(it));
    }
    std::vector<SaddleData> out(its.size());
    parallel_for(its.size(), [&](std::size_t i) { out[i] = periodic_orbit(sys, its[i]); });
    if (dedupe)
        for (auto& s : out) s.multiplicity = s.minimal_period;
    return out;
}

double horseshoe_box_radius(const HenonSystem& sys) {
    const auto& f = sys.factors().at(0);
    const double a = std::abs(f.a);
    auto g = [&](double r) {
        return std::min(std::abs(f.poly.eval(cplx(r))), std::abs(f.poly.eval(cplx(-r)))) - (1 + a) * r;
    };
    double B = 2 * (1 + f.poly.tail_abs_sum() + a) + 2;
    const int steps = 8000;
    double hi = B, lo = B;
    for (int i = steps; i >= 0; --i) {
        double r = B * i / steps;
        if (g(r) <= 0) {
            lo = r;
            break;
        }
        hi = r;
    }
    if (lo == hi) return B;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (g(mid) <= 0 ? lo : hi) = mid;
    }
    return hi * (1 + 1e-3);
}

HorseshoeReport check_horseshoe(const HenonSystem& sys, std::uint64_t seed) {
    HorseshoeReport rep;
    if (!sys.single_real()) {
        rep.diagnostic = "horseshoe check needs a single real factor";
        return rep;
    }
    const auto& f = sys.factors()[0];
    const int d = f.poly.degree();
    const double a = std::abs(f.a);
    BranchSolver bs(f.poly);
    rep.box_radius = horseshoe_box_radius(sys);
    rep.critical_points = bs.critical_points();
    for (double c : rep.critical_points) rep.critical_values.push_back(bs.eval(c));
    std::ostringstream diag;
    if (int(rep.critical_points.size()) != d - 1) {
        diag << "p has " << rep.critical_points.size() << " real critical points, need " << d - 1;
        rep.diagnostic = diag.str();
        return rep;
    }
    const double r = rep.box_radius, band = (1 + a) * r;
    // the image of each horizontal line crosses the box once per monotone piece when every
    // critical value clears the band and consecutive ones alternate
    int crossings = 1;
    for (std::size_t i = 0; i < rep.critical_points.size(); ++i) {
        double c = rep.critical_points[i], v = rep.critical_values[i];
        if (std::abs(c) >= r) {
            diag << "critical point " << fmt17(c) << " lies outside the box";
            break;
        }
        if (std::abs(v) <= band) {
            diag << "critical value " << fmt17(v) << " at " << fmt17(c) << " does not clear the band " << fmt17(band);
            break;
        }
        if (i > 0 && (v > 0) == (rep.critical_values[i - 1] > 0)) {
            diag << "critical values " << i - 1 << " and " << i << " do not alternate";
            break;
        }
        ++crossings;
    }
    rep.crossings = crossings;
    if (crossings != d) {
        rep.diagnostic = diag.str();
        return rep;
    }
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 16; ++t) {
        int n = 1 + int(rng() % 8);
        Itinerary it;
        for (int k = 0; k < n; ++k) it.symbols.push_back(int(rng() % d));
        try {
            auto s = periodic_orbit(sys, it);
            for (double y : s.ys)
                if (std::abs(y) > r) throw Error(ErrorCode::no_orbit, "orbit " + it.str() + " leaves the box");
        } catch (const Error& e) {
            rep.diagnostic = std::string("branch solver failed: ") + e.what();
            return rep;
        }
    }
    rep.ok = true;
    rep.diagnostic = "ok";
    return rep;
}

}  // namespace henon
