#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace henon {

using cplx = std::complex<double>;

enum class ErrorCode {
    argument,
    config,
    not_escaped,
    domain,
    no_orbit,
    nonunique_critical,
    structure_mismatch,
    horseshoe_check_failed,
    tolerance
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

struct PlanePoint {
    cplx x, y;
};

struct TangentVector {
    cplx vx, vy;
};

struct Covector {
    cplx bx, by;
    cplx operator()(const TangentVector& v) const { return bx * v.vx + by * v.vy; }
};

struct Mat2 {
    cplx a00{1}, a01{0}, a10{0}, a11{1};

    cplx det() const { return a00 * a11 - a01 * a10; }
    TangentVector operator*(const TangentVector& v) const {
        return {a00 * v.vx + a01 * v.vy, a10 * v.vx + a11 * v.vy};
    }
    Mat2 operator*(const Mat2& o) const {
        return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
                a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
    }
    double max_abs() const;
};

// beta . M, i.e. the pulled-back covector
Covector pullback(const Covector& beta, const Mat2& m);

double norm(const PlanePoint& z);
double norm(const TangentVector& v);
double norm(const Covector& b);
bool finite(const PlanePoint& z);

enum class RegionTag { v_plus, v_minus, v_box, unresolved };
const char* region_name(RegionTag t);

class PolynomialSpec {
public:
    PolynomialSpec(int degree, std::vector<cplx> tail);

    int degree() const { return d_; }
    const std::vector<cplx>& tail() const { return q_; }
    bool is_real() const;
    double tail_abs_sum() const;

    // q(y) = sum q_j y^j  (no leading term)
    template <class T>
    T tail_eval(const T& y) const {
        T acc = T(0);
        for (int j = d_ - 2; j >= 0; --j) acc = acc * y + T(q_[j].real()) + cimag_part<T>(q_[j]);
        return acc;
    }
    template <class T>
    T eval(const T& y) const {
        T lead = y;
        for (int j = 1; j < d_; ++j) lead *= y;
        return lead + tail_eval(y);
    }
    template <class T>
    T derivative(const T& y) const {
        T lead = T(double(d_));
        for (int j = 1; j < d_; ++j) lead *= y;
        T acc = T(0);
        for (int j = d_ - 2; j >= 1; --j)
            acc = acc * y + T(double(j) * q_[j].real()) + cimag_part<T>(double(j) * q_[j]);
        return lead + acc;
    }
    // sum q_j y^{j-d}, stable for large |y|
    cplx tail_over_power(cplx y) const;

private:
    template <class T>
    static T cimag_part(cplx c) {
        if constexpr (std::is_same_v<T, double>) {
            return 0.0;
        } else {
            return T(0) + T(typename T::value_type(0), typename T::value_type(c.imag()));
        }
    }

    int d_;
    std::vector<cplx> q_;
};

struct HenonFactor {
    PolynomialSpec poly;
    cplx a;

    HenonFactor(PolynomialSpec p, cplx a_);
    PlanePoint apply(const PlanePoint& z) const { return {z.y, poly.eval(z.y) - a * z.x}; }
    PlanePoint apply_inverse(const PlanePoint& z) const { return {(poly.eval(z.x) - z.y) / a, z.x}; }
    Mat2 jacobian(const PlanePoint& z) const { return {0.0, 1.0, -a, poly.derivative(z.y)}; }
};

// One substep of the escape recurrence  y' = lead * p(y) - back * x.
struct EscapeStep {
    PolynomialSpec poly;
    cplx lead;
    cplx back;
};

class HenonSystem {
public:
    // factors[0] is f_1 in f = f_1 o ... o f_m, so it is applied last.
    explicit HenonSystem(std::vector<HenonFactor> factors);

    const std::vector<HenonFactor>& factors() const { return factors_; }
    int degree() const { return degree_; }
    double escape_radius() const { return radius_; }
    double escape_radius_minus() const { return radius_minus_; }
    cplx jacobian_det() const { return det_; }
    bool single_real() const;

    const std::vector<EscapeStep>& forward_steps() const { return fwd_; }
    const std::vector<EscapeStep>& backward_steps() const { return bwd_; }

    // Normal form of f^{-1}: a single monic factor conjugate to f^{-1} by a swap and a real scaling.
    HenonSystem inverse_normal_form() const;

private:
    std::vector<HenonFactor> factors_;
    std::vector<EscapeStep> fwd_, bwd_;
    int degree_ = 0;
    double radius_ = 0, radius_minus_ = 0;
    cplx det_{1};
};

double step_radius(const EscapeStep& s);
double step_tail_constant(const EscapeStep& s);

struct MapResult {
    PlanePoint point;
    int overflow_factor = -1;  // index of the factor application that overflowed
    bool saturated() const { return overflow_factor >= 0; }
};

constexpr double overflow_threshold = 1e100;

PlanePoint apply(const HenonSystem& sys, const PlanePoint& z);
MapResult apply_checked(const HenonSystem& sys, const PlanePoint& z);
PlanePoint apply_inverse(const HenonSystem& sys, const PlanePoint& z);
Mat2 jacobian(const HenonSystem& sys, const PlanePoint& z);
RegionTag classify(const HenonSystem& sys, const PlanePoint& z);

struct OrbitTrace {
    std::vector<PlanePoint> points;
    std::optional<int> escape_index;
    bool overflowed = false;
};
OrbitTrace orbit_until_escape(const HenonSystem& sys, const PlanePoint& z, int horizon);

}  // namespace henon
