#include "henon/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace henon {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

bool in_trap(cplx x, cplx y, double R) { return std::abs(y) >= R && std::abs(y) >= std::abs(x); }

void check_options(const GreenOptions& o) {
    if (!(o.tol > 0)) throw Error(ErrorCode::argument, "tol must be positive");
    if (o.horizon < 1) throw Error(ErrorCode::argument, "horizon must be >= 1");
}

// Escape-rate potential of the recurrence y_{s+1} = lead_s p_s(y_s) - back_s y_{s-1},
// started from (y_{-1}, y_0) = (z.x, z.y).
GreenValue escape_potential(const std::vector<EscapeStep>& steps, double R, const PlanePoint& z,
                            const GreenOptions& o, bool want_grad) {
    check_options(o);
    const int m = int(steps.size());
    double Cmax = 0, logDfull = 0;
    for (auto& st : steps) {
        Cmax = std::max(Cmax, step_tail_constant(st));
        logDfull += std::log(double(st.poly.degree()));
    }

    cplx x = z.x, y = z.y;
    cplx px = 1, py = 0, cx = 0, cy = 1;  // d y_{s-1}, d y_s, both scaled by exp(-L)
    double L = 0, logD = 0;
    int s = 0;
    const long max_s = long(o.horizon) * m;

    auto advance_grad = [&](const EscapeStep& st, cplx yv) {
        cplx dp = st.lead * st.poly.derivative(yv);
        cplx nx = dp * cx - st.back * px, ny = dp * cy - st.back * py;
        px = cx;
        py = cy;
        cx = nx;
        cy = ny;
        double sc = std::max(std::abs(cx), std::abs(cy));
        if (sc > 1e50 || (sc < 1e-50 && sc > 0)) {
            px /= sc;
            py /= sc;
            cx /= sc;
            cy /= sc;
            L += std::log(sc);
        }
    };

    GreenValue g;
    while (!in_trap(x, y, R)) {
        if (s >= max_s) {
            double rho = std::max({R, std::abs(x), std::abs(y)});
            g.value = 0;
            g.escaped = false;
            g.iterations_used = s;
            g.error_bound = std::exp(-logD) * (std::log(2 * rho) + 1.0);
            g.low_confidence = true;
            return g;
        }
        const EscapeStep& st = steps[s % m];
        if (want_grad) advance_grad(st, y);
        cplx ny = st.lead * st.poly.eval(y) - st.back * x;
        x = y;
        y = ny;
        logD += std::log(double(st.poly.degree()));
        ++s;
        if (!std::isfinite(std::abs(y)) || !std::isfinite(std::abs(x)))
            throw Error(ErrorCode::domain, "orbit overflowed before reaching the trapping region");
    }
    g.escaped = true;
    g.escape_index = s / m;

    const double head = std::log(std::abs(y)) * std::exp(-logD);

    // log|lead| contributions form an exact geometric series
    double per = 0, ld = logD;
    for (int j = 0; j < m; ++j) {
        const EscapeStep& st = steps[(s + j) % m];
        ld += std::log(double(st.poly.degree()));
        per += std::log(std::abs(st.lead)) * std::exp(-ld);
    }
    const double lead_tail = per / (1.0 - std::exp(-logDfull));

    double sum = 0, abs_sum = 0, tail = 0;
    const double y_target = 1e20 * (1.0 + Cmax);
    for (int extra = 0;; ++extra) {
        const EscapeStep& st = steps[s % m];
        const int d = st.poly.degree();
        tail = (8.0 / 3.0) * Cmax * std::exp(-(logD + std::log(double(d)))) / std::abs(y);
        double ay = std::abs(y);
        bool room = d * std::log(ay) + std::log(std::abs(st.lead)) < 690.0;
        if (ay > overflow_threshold || !room || extra > 200) break;
        if (tail < 1e-3 * o.tol && ay > y_target) break;

        cplx inv = 1.0 / y;
        cplx rho = st.poly.tail_over_power(y) - (st.back / st.lead) * (x * inv) * std::pow(inv, d - 1);
        double l1 = 0.5 * std::log1p(2.0 * rho.real() + std::norm(rho));
        double logDn = logD + std::log(double(d));
        double term = l1 * std::exp(-logDn);
        sum += term;
        abs_sum += std::abs(term);

        if (want_grad) advance_grad(st, y);
        cplx ny = st.lead * std::pow(y, d) * (1.0 + rho);
        x = y;
        y = ny;
        logD = logDn;
        ++s;
    }

    g.value = head + sum + lead_tail;
    g.iterations_used = s;
    g.error_bound = tail + 8 * eps * (std::abs(head) + abs_sum + std::abs(lead_tail) + std::abs(g.value));
    g.low_confidence = g.value < 1e-3;
    if (want_grad) {
        cplx f = std::exp(L - logD) / (2.0 * y);
        g.gradient = {cx * f, cy * f};
        g.gradient_error = norm(g.gradient) * (4.0 * Cmax / std::abs(y) + 1e-15 * (s + 10));
    }
    return g;
}

PlanePoint swap(const PlanePoint& z) { return {z.y, z.x}; }

GreenValue minus_impl(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o, bool grad) {
    GreenValue g = escape_potential(sys.backward_steps(), sys.escape_radius_minus(), swap(z), o, grad);
    std::swap(g.gradient.bx, g.gradient.by);
    return g;
}

}  // namespace

Direction make_direction(const TangentVector& v) {
    double n = norm(v);
    if (!(n > 0)) throw Error(ErrorCode::argument, "zero vector has no direction");
    cplx big = std::abs(v.vx) >= std::abs(v.vy) ? v.vx : v.vy;
    cplx ph = std::conj(big) / std::abs(big);
    return {{v.vx * ph / n, v.vy * ph / n}};
}

Direction kernel_direction(const Covector& b) { return make_direction({-b.by, b.bx}); }

double projective_distance(const Direction& a, const Direction& b) {
    return std::abs(a.v.vx * b.v.vy - a.v.vy * b.v.vx) / (norm(a.v) * norm(b.v));
}

double projective_distance(const Covector& a, const Covector& b) {
    return std::abs(a.bx * b.by - a.by * b.bx) / (norm(a) * norm(b));
}

GreenValue green_plus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o) {
    return escape_potential(sys.forward_steps(), sys.escape_radius(), z, o, false);
}

GreenValue grad_green_plus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o) {
    GreenValue g = escape_potential(sys.forward_steps(), sys.escape_radius(), z, o, true);
    if (!g.escaped) throw Error(ErrorCode::not_escaped, "point does not escape forward within the horizon");
    return g;
}

GreenValue green_minus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o) {
    return minus_impl(sys, z, o, false);
}

GreenValue grad_green_minus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o) {
    GreenValue g = minus_impl(sys, z, o, true);
    if (!g.escaped) throw Error(ErrorCode::not_escaped, "point does not escape backward within the horizon");
    return g;
}

GreenValue GreenEngine::grad_green_plus_unchecked(const PlanePoint& z) const {
    return escape_potential(sys_->forward_steps(), sys_->escape_radius(), z, o_, true);
}

BottcherValue bottcher_plus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o) {
    check_options(o);
    const double R = sys.escape_radius();
    if (!in_trap(z.x, z.y, R)) throw Error(ErrorCode::domain, "bottcher coordinate is defined on the trapping region only");
    const auto& steps = sys.forward_steps();
    const int m = int(steps.size());
    double Cmax = 0;
    for (auto& st : steps) Cmax = std::max(Cmax, step_tail_constant(st));

    cplx x = z.x, y = z.y, acc = std::log(y);
    double logD = 0, tail = 0, abs_sum = std::abs(acc);
    for (int s = 0; s < 400; ++s) {
        const EscapeStep& st = steps[s % m];
        const int d = st.poly.degree();
        double ay = std::abs(y);
        tail = (8.0 / 3.0) * Cmax * std::exp(-(logD + std::log(double(d)))) / ay;
        if (tail < 1e-3 * o.tol || ay > overflow_threshold || d * std::log(ay) > 690.0) break;
        cplx inv = 1.0 / y;
        cplx rho = st.poly.tail_over_power(y) - st.back * (x * inv) * std::pow(inv, d - 1);
        logD += std::log(double(d));
        cplx term = std::log(1.0 + rho) * std::exp(-logD);
        acc += term;
        abs_sum += std::abs(term);
        cplx ny = std::pow(y, d) * (1.0 + rho);
        x = y;
        y = ny;
    }
    BottcherValue b;
    b.log_value = acc;
    b.value = std::exp(acc);
    b.error_bound = std::abs(b.value) * (tail + 8 * eps * abs_sum);
    return b;
}

Direction tau_plus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o) {
    return kernel_direction(grad_green_plus(sys, z, o).gradient);
}

Direction tau_minus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o) {
    return kernel_direction(grad_green_minus(sys, z, o).gradient);
}

GrowthDirection smallest_growth_direction(const HenonSystem& sys, const PlanePoint& z, int n) {
    if (n < 1) throw Error(ErrorCode::argument, "n must be >= 1");
    GrowthDirection out;
    Mat2 M;
    PlanePoint w = z;
    for (int k = 0; k < n; ++k) {
        Mat2 J = jacobian(sys, w);
        auto r = apply_checked(sys, w);
        M = J * M;
        double s = M.max_abs();
        M = {M.a00 / s, M.a01 / s, M.a10 / s, M.a11 / s};
        ++out.steps;
        if (r.saturated() || !std::isfinite(s)) {
            out.saturated = true;
            break;
        }
        w = r.point;
    }
    // top eigenvector of the Hermitian M*M, then its orthogonal complement
    double h00 = std::norm(M.a00) + std::norm(M.a10);
    double h11 = std::norm(M.a01) + std::norm(M.a11);
    cplx h01 = std::conj(M.a00) * M.a01 + std::conj(M.a10) * M.a11;
    double half = 0.5 * (h00 - h11);
    double lam = 0.5 * (h00 + h11) + std::hypot(half, std::abs(h01));
    TangentVector v1{h01, lam - h00}, v2{lam - h11, std::conj(h01)};
    TangentVector top = norm(v1) >= norm(v2) ? v1 : v2;
    if (!(norm(top) > 0)) top = {1.0, 0.0};
    out.dir = make_direction({-std::conj(top.vy), std::conj(top.vx)});
    return out;
}

cplx tangency_determinant(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o) {
    Covector gp = grad_green_plus(sys, z, o).gradient;
    Covector gm = grad_green_minus(sys, z, o).gradient;
    return gp.bx * gm.by - gp.by * gm.bx;
}

double projective_kernel_distance(const HenonSystem& sys, const PlanePoint& z, const Covector& beta, int k,
                                  const GreenOptions& o) {
    if (!(norm(beta) > 0)) throw Error(ErrorCode::argument, "beta must be nonzero");
    Covector g = grad_green_plus(sys, z, o).gradient;
    Mat2 M;
    PlanePoint w = z;
    for (int j = 0; j < k; ++j) {
        M = jacobian(sys, w) * M;
        double s = M.max_abs();
        M = {M.a00 / s, M.a01 / s, M.a10 / s, M.a11 / s};
        w = apply(sys, w);
    }
    return projective_distance(pullback(beta, M), g);
}

std::vector<double> critical_direction_log_growth(const HenonSystem& sys, const PlanePoint& z, int n,
                                                  const GreenOptions& o) {
    std::vector<double> out;
    double b0 = std::log(norm(grad_green_plus(sys, z, o).gradient));
    double per = std::log(std::abs(sys.jacobian_det())) - std::log(double(sys.degree()));
    PlanePoint w = z;
    int k = 1;
    for (; k <= n; ++k) {
        auto r = apply_checked(sys, w);
        if (r.saturated()) break;
        w = r.point;
        GreenValue g = grad_green_plus(sys, w, o);
        out.push_back(k * per + std::log(norm(g.gradient)) - b0);
    }
    // past the overflow guard: log|y| multiplies by d and dG+ = (0, 1/(2y)) to relative 1e-100
    double ly = std::log(std::abs(w.y));
    if (k <= n && ly > std::log(overflow_threshold) / sys.degree()) {
        for (; k <= n && std::isfinite(ly); ++k) {
            ly *= sys.degree();
            out.push_back(k * per - std::log(2.0) - ly - b0);
        }
    }
    return out;
}

}  // namespace henon
