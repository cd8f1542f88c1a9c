#pragma once

#include <vector>

#include "henon/core.hpp"

namespace henon {

struct GreenOptions {
    double tol = 1e-12;
    int horizon = 2000;
};

struct GreenValue {
    double value = 0;
    Covector gradient{0, 0};
    bool escaped = false;
    bool low_confidence = false;
    int escape_index = -1;    // full iterations before entering the trapping region
    int iterations_used = 0;  // substeps taken in total
    double error_bound = 0;
    double gradient_error = 0;
};

struct BottcherValue {
    cplx value;
    cplx log_value;
    double error_bound = 0;
};

// Unit vector, compared up to phase.
struct Direction {
    TangentVector v;
};

Direction make_direction(const TangentVector& v);
Direction kernel_direction(const Covector& b);
double projective_distance(const Direction& a, const Direction& b);
double projective_distance(const Covector& a, const Covector& b);

GreenValue green_plus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o = {});
GreenValue grad_green_plus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o = {});
GreenValue green_minus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o = {});
GreenValue grad_green_minus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o = {});

BottcherValue bottcher_plus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o = {});

Direction tau_plus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o = {});
Direction tau_minus(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o = {});

struct GrowthDirection {
    Direction dir;
    bool saturated = false;
    int steps = 0;
};
GrowthDirection smallest_growth_direction(const HenonSystem& sys, const PlanePoint& z, int n);

cplx tangency_determinant(const HenonSystem& sys, const PlanePoint& z, const GreenOptions& o = {});

double projective_kernel_distance(const HenonSystem& sys, const PlanePoint& z, const Covector& beta, int k,
                                  const GreenOptions& o = {});

// log|Df^k tau+(z)| for k = 1..n via |Df tau+| = |det Df| |dG+(fz)| / (d |dG+(z)|).
// Past the overflow guard the sequence continues in log scale from the asymptotic form of dG+.
std::vector<double> critical_direction_log_growth(const HenonSystem& sys, const PlanePoint& z, int n,
                                                  const GreenOptions& o = {});

// Shared evaluator handle; cheap to copy.
class GreenEngine {
public:
    GreenEngine(const HenonSystem& sys, GreenOptions o = {}) : sys_(&sys), o_(o) {}
    GreenValue plus(const PlanePoint& z) const { return grad_green_plus_unchecked(z); }
    GreenValue minus(const PlanePoint& z) const { return green_minus(*sys_, z, o_); }
    const HenonSystem& system() const { return *sys_; }
    const GreenOptions& options() const { return o_; }

private:
    GreenValue grad_green_plus_unchecked(const PlanePoint& z) const;
    const HenonSystem* sys_;
    GreenOptions o_;
};

}  // namespace henon
