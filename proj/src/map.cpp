#include "henon/core.hpp"

#include <algorithm>
#include <cmath>

namespace henon {

const char* error_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::argument: return "ARGUMENT";
        case ErrorCode::config: return "CONFIG";
        case ErrorCode::not_escaped: return "NOT_ESCAPED";
        case ErrorCode::domain: return "DOMAIN";
        case ErrorCode::no_orbit: return "NO_ORBIT";
        case ErrorCode::nonunique_critical: return "NONUNIQUE_CRITICAL";
        case ErrorCode::structure_mismatch: return "STRUCTURE_MISMATCH";
        case ErrorCode::horseshoe_check_failed: return "HORSESHOE_CHECK_FAILED";
        case ErrorCode::tolerance: return "TOLERANCE";
    }
    return "UNKNOWN";
}

const char* region_name(RegionTag t) {
    switch (t) {
        case RegionTag::v_plus: return "V_PLUS";
        case RegionTag::v_minus: return "V_MINUS";
        case RegionTag::v_box: return "V_BOX";
        default: return "UNRESOLVED";
    }
}

double Mat2::max_abs() const {
    return std::max({std::abs(a00), std::abs(a01), std::abs(a10), std::abs(a11)});
}

Covector pullback(const Covector& b, const Mat2& m) {
    return {b.bx * m.a00 + b.by * m.a10, b.bx * m.a01 + b.by * m.a11};
}

double norm(const PlanePoint& z) { return std::hypot(std::abs(z.x), std::abs(z.y)); }
double norm(const TangentVector& v) { return std::hypot(std::abs(v.vx), std::abs(v.vy)); }
double norm(const Covector& b) { return std::hypot(std::abs(b.bx), std::abs(b.by)); }
bool finite(const PlanePoint& z) {
    return std::isfinite(z.x.real()) && std::isfinite(z.x.imag()) && std::isfinite(z.y.real()) &&
           std::isfinite(z.y.imag());
}

PolynomialSpec::PolynomialSpec(int degree, std::vector<cplx> tail) : d_(degree), q_(std::move(tail)) {
    if (d_ < 2) throw Error(ErrorCode::argument, "polynomial degree must be >= 2");
    if (int(q_.size()) != d_ - 1)
        throw Error(ErrorCode::argument, "tail must hold exactly degree-1 coefficients");
    for (auto& c : q_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw Error(ErrorCode::argument, "non-finite polynomial coefficient");
}

bool PolynomialSpec::is_real() const {
    return std::all_of(q_.begin(), q_.end(), [](cplx c) { return c.imag() == 0.0; });
}

double PolynomialSpec::tail_abs_sum() const {
    double s = 0;
    for (auto& c : q_) s += std::abs(c);
    return s;
}

cplx PolynomialSpec::tail_over_power(cplx y) const {
    cplx inv = 1.0 / y, acc = 0.0;
    for (int j = 0; j <= d_ - 2; ++j) acc = acc * inv + q_[j];
    return acc * inv * inv;
}

HenonFactor::HenonFactor(PolynomialSpec p, cplx a_) : poly(std::move(p)), a(a_) {
    if (a == 0.0 || !std::isfinite(std::abs(a))) throw Error(ErrorCode::argument, "Jacobian parameter a must be nonzero");
}

double step_tail_constant(const EscapeStep& s) { return s.poly.tail_abs_sum() + std::abs(s.back / s.lead); }

double step_radius(const EscapeStep& s) {
    double r = std::max(3.0, 2.0 * (1.0 + step_tail_constant(s)));
    double c = std::abs(s.lead);
    int d = s.poly.degree();
    auto ok = [&](double R) { return c * std::pow(R, d - 2) * (R / 2 + 1) >= 2.0; };
    while (!ok(r)) r *= 1.25;
    return r;
}

HenonSystem::HenonSystem(std::vector<HenonFactor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw Error(ErrorCode::argument, "a system needs at least one factor");
    degree_ = 1;
    for (auto& f : factors_) {
        degree_ *= f.poly.degree();
        det_ *= f.a;
    }
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) fwd_.push_back({it->poly, 1.0, it->a});
    for (auto& f : factors_) bwd_.push_back({f.poly, 1.0 / f.a, 1.0 / f.a});
    for (auto& s : fwd_) radius_ = std::max(radius_, step_radius(s));
    for (auto& s : bwd_) radius_minus_ = std::max(radius_minus_, step_radius(s));
}

bool HenonSystem::single_real() const {
    return factors_.size() == 1 && factors_[0].poly.is_real() && factors_[0].a.imag() == 0.0;
}

HenonSystem HenonSystem::inverse_normal_form() const {
    if (factors_.size() != 1) throw Error(ErrorCode::argument, "inverse normal form needs a single factor");
    const auto& f = factors_[0];
    int d = f.poly.degree();
    cplx lam;
    if (f.a.imag() == 0.0 && (f.a.real() > 0 || (d - 1) % 2 == 1))
        lam = std::copysign(std::pow(std::abs(f.a.real()), 1.0 / (d - 1)), f.a.real());
    else
        lam = std::pow(f.a, 1.0 / (d - 1));
    std::vector<cplx> q(d - 1);
    for (int j = 0; j <= d - 2; ++j) {
        q[j] = f.poly.tail()[j] * std::pow(lam, j - 1) / f.a;
        if (f.poly.tail()[j].imag() == 0.0 && lam.imag() == 0.0 && f.a.imag() == 0.0) q[j] = q[j].real();
    }
    return HenonSystem({HenonFactor(PolynomialSpec(d, q), 1.0 / f.a)});
}

PlanePoint apply(const HenonSystem& sys, const PlanePoint& z) {
    PlanePoint w = z;
    for (auto it = sys.factors().rbegin(); it != sys.factors().rend(); ++it) w = it->apply(w);
    return w;
}

MapResult apply_checked(const HenonSystem& sys, const PlanePoint& z) {
    MapResult r{z};
    int k = 0;
    for (auto it = sys.factors().rbegin(); it != sys.factors().rend(); ++it, ++k) {
        r.point = it->apply(r.point);
        if (!finite(r.point) || std::abs(r.point.x) > overflow_threshold || std::abs(r.point.y) > overflow_threshold) {
            r.overflow_factor = k;
            return r;
        }
    }
    return r;
}

PlanePoint apply_inverse(const HenonSystem& sys, const PlanePoint& z) {
    PlanePoint w = z;
    for (auto& f : sys.factors()) w = f.apply_inverse(w);
    return w;
}

Mat2 jacobian(const HenonSystem& sys, const PlanePoint& z) {
    Mat2 m;
    PlanePoint w = z;
    for (auto it = sys.factors().rbegin(); it != sys.factors().rend(); ++it) {
        m = it->jacobian(w) * m;
        w = it->apply(w);
    }
    return m;
}

RegionTag classify(const HenonSystem& sys, const PlanePoint& z) {
    double ax = std::abs(z.x), ay = std::abs(z.y), R = sys.escape_radius();
    if (!finite(z)) return RegionTag::unresolved;
    if (ay >= R && ay >= ax) return RegionTag::v_plus;
    if (ax >= R && ax > ay) return RegionTag::v_minus;
    return RegionTag::v_box;
}

OrbitTrace orbit_until_escape(const HenonSystem& sys, const PlanePoint& z, int horizon) {
    if (horizon < 1) throw Error(ErrorCode::argument, "horizon must be >= 1");
    OrbitTrace t;
    t.points.push_back(z);
    PlanePoint w = z;
    for (int n = 0;; ++n) {
        if (classify(sys, w) == RegionTag::v_plus) {
            t.escape_index = n;
            return t;
        }
        if (n == horizon) return t;
        auto r = apply_checked(sys, w);
        if (r.saturated()) {
            t.overflowed = true;
            t.escape_index = n + 1;
            return t;
        }
        w = r.point;
        t.points.push_back(w);
    }
}

}  // namespace henon
