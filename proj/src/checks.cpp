#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "henon/checks.hpp"
#include "henon/extended.hpp"
#include "henon/util.hpp"

namespace henon {

namespace {

const double nan_v = std::numeric_limits<double>::quiet_NaN();

cplx det_at(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o) {
    GreenEngine e(sys, o);
    auto gp = e.plus(z);
    if (!gp.escaped) return {nan_v, nan_v};
    GreenValue gm;
    try {
        gm = grad_green_minus(sys, z, o);
    } catch (const Error& err) {
        if (err.code() != ErrorCode::not_escaped) throw;
        return {nan_v, nan_v};
    }
    return gp.gradient.bx * gm.gradient.by - gp.gradient.by * gm.gradient.bx;
}

struct Sampler {
    std::mt19937_64 rng;
    explicit Sampler(std::uint64_t seed) : rng(seed) {}
    double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    cplx disk(double r) { return {uni(-r, r), uni(-r, r)}; }
    PlanePoint box(double r) { return {disk(r), disk(r)}; }
};

// points with lo <= G+ <= hi, drawn from a square of half-width r
std::vector<PlanePoint> level_points(const HenonSystem& sys, Sampler& S, int n, double lo, double hi, double r,
                                     const GreenOptions& o) {
    std::vector<PlanePoint> out;
    for (int tries = 0; int(out.size()) < n && tries < 200000; ++tries) {
        auto z = S.box(r);
        auto g = green_plus(sys, z, o);
        if (g.escaped && g.value >= lo && g.value <= hi) out.push_back(z);
    }
    if (int(out.size()) < n) throw Error(ErrorCode::argument, "could not sample points in the requested G+ range");
    return out;
}

CheckResult make(const std::string& name, double value, double threshold, int samples, bool extra = true,
                 const std::string& detail = "") {
    CheckResult c;
    c.name = name;
    c.value = value;
    c.threshold = threshold;
    c.samples = samples;
    c.pass = extra && std::isfinite(value) && value < threshold;
    c.detail = detail;
    return c;
}

}  // namespace

TangencyScan tangency_scan(const HenonSystem& sys, double x0, double x1, double y0, double y1, int nx, int ny,
                           const GreenOptions& o, double zero_tol) {
    if (nx < 2 || ny < 1) throw Error(ErrorCode::argument, "grid too small");
    TangencyScan sc;
    for (int i = 0; i < nx; ++i) sc.xs.push_back(x0 + (x1 - x0) * i / (nx - 1));
    for (int j = 0; j < ny; ++j) sc.ys.push_back(ny == 1 ? y0 : y0 + (y1 - y0) * j / (ny - 1));
    sc.det.assign(std::size_t(nx) * ny, {});
    parallel_for(sc.det.size(), [&](std::size_t k) {
        sc.det[k] = det_at(sys, {sc.xs[k % nx], sc.ys[k / nx]}, o);
    });
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            double a = sc.det[j * nx + i].real(), b = sc.det[j * nx + i + 1].real();
            if (std::isfinite(a) && std::isfinite(b) && a != 0 && b != 0 && (a > 0) != (b > 0))
                sc.seeds.push_back({i, j, sc.xs[i], sc.xs[i + 1], sc.ys[j]});
        }
    sc.zeros.resize(sc.seeds.size());
    parallel_for(sc.seeds.size(), [&](std::size_t k) {
        const auto& s = sc.seeds[k];
        double lo = s.x0, hi = s.x1;
        double flo = det_at(sys, {lo, s.y}, o).real();
        for (int it = 0; it < 100 && hi - lo > 4e-16 * std::max(1.0, std::abs(lo)); ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = det_at(sys, {mid, s.y}, o).real();
            if (!std::isfinite(fm)) break;
            if ((fm > 0) == (flo > 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        double xm = 0.5 * (lo + hi);
        TangencyZero z;
        z.z = {xm, s.y};
        z.det = det_at(sys, z.z, o);
        z.accepted = std::abs(z.det) < zero_tol;
        sc.zeros[k] = z;
    });
    return sc;
}

double tangency_diagonal_error(const HenonSystem& sys, double s, const GreenOptions& o) {
    cplx det = tangency_determinant(sys, {s, s}, o);
    cplx ref = -1.0 / (4.0 * s * s);
    return std::abs(det / ref - 1.0);
}

double tangency_cone_deviation(const HenonSystem& sys, double radius, int n, const GreenOptions& o) {
    std::vector<double> dev(std::size_t(n) * n);
    parallel_for(dev.size(), [&](std::size_t k) {
        int i = int(k % n), j = int(k / n);
        // |x| log-spaced over four decades above radius; |y|/|x| strictly inside (1/2, 2)
        double ax = radius * std::pow(1e4, (i + 0.5) / n);
        double ratio = std::pow(2.0, -1.0 + 2.0 * (j + 0.5) / n);
        double thx = 2 * M_PI * std::fmod(0.6180339887498949 * (k + 1), 1.0);
        double thy = 2 * M_PI * std::fmod(0.7548776662466927 * (k + 1), 1.0);
        cplx x = std::polar(ax, thx), y = std::polar(ax * ratio, thy);
        cplx det = det_at(sys, {x, y}, o);
        dev[k] = std::abs(4.0 * x * y * det + 1.0);
    });
    double m = 0;
    for (double v : dev) m = std::isfinite(v) ? std::max(m, v) : INFINITY;
    return m;
}

std::vector<CheckResult> lemma_checks(const HenonSystem& sys, const LemmaSettings& s) {
    std::vector<CheckResult> out;
    Sampler S(s.seed);
    const GreenOptions& o = s.green;
    const int d = sys.degree();
    const double R = sys.escape_radius();

    {  // G+ o f = d G+
        double worst = 0;
        int bound_fail = 0, n = 0;
        while (n < s.functional_samples) {
            auto z = S.box(6.0);
            auto g0 = green_plus(sys, z, o);
            if (!g0.escaped || g0.value < 1e-3) continue;
            auto g1 = green_plus(sys, apply(sys, z), o);
            double diff = std::abs(g1.value - d * g0.value);
            worst = std::max(worst, diff / (d * g0.value));
            if (diff > g1.error_bound + d * g0.error_bound + 1e-14 * g1.value) ++bound_fail;
            ++n;
        }
        out.push_back(make("green_plus_functional", worst, 1e-9, n, bound_fail == 0,
                           std::to_string(bound_fail) + " outside combined bounds"));
    }
    {  // G- o f^-1 = d G-
        double worst = 0;
        int bound_fail = 0, n = 0;
        while (n < s.functional_samples) {
            auto z = S.box(6.0);
            auto g0 = green_minus(sys, z, o);
            if (!g0.escaped || g0.value < 1e-3) continue;
            auto g1 = green_minus(sys, apply_inverse(sys, z), o);
            double diff = std::abs(g1.value - d * g0.value);
            worst = std::max(worst, diff / (d * g0.value));
            if (diff > g1.error_bound + d * g0.error_bound + 1e-14 * g1.value) ++bound_fail;
            ++n;
        }
        out.push_back(make("green_minus_functional", worst, 1e-9, n, bound_fail == 0,
                           std::to_string(bound_fail) + " outside combined bounds"));
    }
    {  // phi+ o f = (phi+)^d and log|phi+| = G+
        double worst = 0, worst_log = 0;
        int bound_fail = 0;
        for (int n = 0; n < s.functional_samples; ++n) {
            double ay = S.uni(R, 10 * R);
            cplx y = std::polar(ay, S.uni(0, 2 * M_PI));
            cplx x = std::polar(S.uni(0, ay), S.uni(0, 2 * M_PI));
            PlanePoint z{x, y};
            auto b0 = bottcher_plus(sys, z, o);
            auto b1 = bottcher_plus(sys, apply(sys, z), o);
            cplx pw = std::pow(b0.value, d);
            worst = std::max(worst, std::abs(b1.value - pw) / std::abs(pw));
            auto g = green_plus(sys, z, o);
            double gap = std::abs(b0.log_value.real() - g.value);
            worst_log = std::max(worst_log, gap);
            if (gap > b0.error_bound / std::abs(b0.value) + g.error_bound + 1e-14 * g.value) ++bound_fail;
        }
        out.push_back(make("bottcher_functional", worst, 1e-9, s.functional_samples));
        out.push_back(make("bottcher_log_modulus", worst_log, 1e-9, s.functional_samples, bound_fail == 0,
                           std::to_string(bound_fail) + " outside combined bounds"));
    }
    auto pts = level_points(sys, S, std::max(s.gradient_samples, s.direction_samples), 0.5, 3.0, 4.0, o);
    {  // gradient vs central differences
        const double h = 1e-5;
        double worst = 0;
        for (int k = 0; k < s.gradient_samples; ++k) {
            const auto& z = pts[k];
            auto g = grad_green_plus(sys, z, o);
            auto G = [&](cplx dx, cplx dy) { return green_plus(sys, {z.x + dx, z.y + dy}, o).value; };
            cplx fx = 0.5 * ((G(h, 0) - G(-h, 0)) / (2 * h) - cplx(0, 1) * (G(cplx(0, h), 0) - G(cplx(0, -h), 0)) / (2 * h));
            cplx fy = 0.5 * ((G(0, h) - G(0, -h)) / (2 * h) - cplx(0, 1) * (G(0, cplx(0, h)) - G(0, cplx(0, -h))) / (2 * h));
            double err = std::hypot(std::abs(fx - g.gradient.bx), std::abs(fy - g.gradient.by)) / norm(g.gradient);
            worst = std::max(worst, err);
        }
        out.push_back(make("gradient_finite_difference", worst, 1e-6, s.gradient_samples));
    }
    {  // error-bound honesty: horizon H vs 2H, and the extended-precision oracle
        GreenOptions shortH = o;
        shortH.horizon = 8;
        GreenOptions longH = o;
        longH.horizon = 16;
        std::vector<double> excess(s.honesty_samples, 0.0);
        std::vector<PlanePoint> zs(s.honesty_samples);
        for (auto& z : zs) z = S.box(5.0);
        parallel_for(zs.size(), [&](std::size_t k) {
            auto a = green_plus(sys, zs[k], shortH);
            auto b = green_plus(sys, zs[k], longH);
            double e = std::abs(a.value - b.value) - a.error_bound;
            if (a.escaped && a.escape_index <= 6) {
                double ref = green_direct_extended(sys, zs[k], 24, true);
                e = std::max(e, std::abs(a.value - ref) - a.error_bound - 4e-16 * (1 + a.value));
            }
            excess[k] = e;
        });
        double worst = *std::max_element(excess.begin(), excess.end());
        out.push_back(make("error_bound_honesty", worst, 0, s.honesty_samples, true,
                           "max of |G_H - G_ref| - bound_H"));
        out.back().pass = worst <= 0;
    }
    {  // tau_n -> tau+, invariance of tau+, decay along tau+, growth bound
        double worst8 = 0, worst_inv = 0, worst_decay = -INFINITY, worst_l12 = -INFINITY;
        int nonmono = 0;
        for (int k = 0; k < s.direction_samples; ++k) {
            const auto& z = pts[k];
            auto tp = tau_plus(sys, z, o);
            double prev = INFINITY;
            for (int n = 1; n <= 8; ++n) {
                double dist = projective_distance(smallest_growth_direction(sys, z, n).dir, tp);
                if (dist > prev * 1.0000001 + 1e-15) ++nonmono;
                prev = dist;
                if (n == 8) worst8 = std::max(worst8, dist);
            }
            auto fz = apply(sys, z);
            auto v = jacobian(sys, z) * tp.v;
            worst_inv = std::max(worst_inv, projective_distance(make_direction(v), tau_plus(sys, fz, o)));
            auto growth = critical_direction_log_growth(sys, z, 40, o);
            double best = INFINITY;
            PlanePoint w = z;
            for (std::size_t n = 0; n < growth.size(); ++n) {
                best = std::min(best, growth[n] / double(n + 1));
                auto r = apply_checked(sys, w);
                if (r.saturated()) continue;
                w = r.point;
                worst_l12 = std::max(worst_l12, growth[n] + std::log(norm(w)));
            }
            worst_decay = std::max(worst_decay, best);
        }
        out.push_back(make("growth_direction_convergence", worst8, 1e-8, s.direction_samples, true,
                           std::to_string(nonmono) + " non-monotone steps"));
        out.push_back(make("tau_plus_invariance", worst_inv, 1e-8, s.direction_samples));
        out.push_back(make("critical_direction_decay", worst_decay, -20, s.direction_samples, true,
                           "max over points of min_n (1/n) log|Df^n tau+|"));
        out.push_back(make("critical_direction_bound", worst_l12, 10, s.direction_samples, true,
                           "max log(|Df^n tau+| |f^n|)"));
    }
    {  // pulled-back kernels
        double worst = 0, scale_dev = 0;
        for (int k = 0; k < s.direction_samples; ++k)
            for (int b = 0; b < s.beta_samples; ++b) {
                Covector beta{S.disk(1.0), S.disk(1.0)};
                double dist = projective_kernel_distance(sys, pts[k], beta, 10, o);
                worst = std::max(worst, dist);
                if (b == 0) {
                    cplx c = S.disk(3.0) + 0.1;
                    double d2 = projective_kernel_distance(sys, pts[k], {c * beta.bx, c * beta.by}, 10, o);
                    scale_dev = std::max(scale_dev, std::abs(d2 - dist));
                }
            }
        out.push_back(make("kernel_convergence", worst, 1e-6, s.direction_samples * s.beta_samples, scale_dev < 1e-12,
                           "scale invariance deviation " + fmt17(scale_dev)));
    }
    out.push_back(make("tangency_diagonal", tangency_diagonal_error(sys, 1e4, o), 1e-3, 1));
    out.push_back(make("tangency_cone", tangency_cone_deviation(sys, 10 * R, 100, o), 0.5, 10000));
    if (sys.single_real()) {
        auto sc = tangency_scan(sys, -s.tangency_extent, s.tangency_extent, -s.tangency_extent, s.tangency_extent,
                                s.tangency_grid, s.tangency_grid, o);
        double best = INFINITY;
        int accepted = 0;
        const TangencyZero* first = nullptr;
        for (auto& z : sc.zeros) {
            best = std::min(best, std::abs(z.det));
            accepted += z.accepted;
            if (z.accepted && !first) first = &z;
        }
        std::ostringstream os;
        os << sc.seeds.size() << " sign changes, " << accepted << " zeros";
        if (first) os << ", first at (" << fmt17(first->z.x.real()) << ", " << fmt17(first->z.y.real()) << ")";
        out.push_back(make("tangency_exists", best, 1e-10, int(sc.det.size()), accepted > 0, os.str()));
    }
    return out;
}

}  // namespace henon
