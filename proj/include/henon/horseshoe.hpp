#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "henon/core.hpp"

namespace henon {

// Real roots of p(u) = v restricted to the monotone pieces of a real polynomial p.
// Piece i lies between the i-th and (i+1)-th real critical points (ordered left to right).
class BranchSolver {
public:
    explicit BranchSolver(const PolynomialSpec& p);

    int pieces() const { return int(crit_.size()) + 1; }
    const std::vector<double>& critical_points() const { return crit_; }
    // NaN when v lies outside the range of a bounded piece
    double root(int piece, double v) const;
    double root_near(int piece, double v, double guess) const;
    int piece_of(double u) const;
    double eval(double u) const { return p_.eval(u); }
    double derivative(double u) const { return p_.derivative(u); }
    const PolynomialSpec& poly() const { return p_; }

private:
    PolynomialSpec p_;
    std::vector<double> c_, dc_, crit_;
    double bound_;
};

struct Itinerary {
    std::vector<int> symbols;
    int period() const { return int(symbols.size()); }
    std::string str() const;
    static Itinerary from_index(std::uint64_t idx, int n, int d);
};

struct SaddleData {
    Itinerary itinerary;
    std::vector<PlanePoint> orbit;  // orbit[k] = (y_{k-1}, y_k)
    std::vector<double> ys;         // y_0 .. y_{n-1}
    cplx unstable_eigenvalue, stable_eigenvalue;
    double log_abs_unstable = 0, log_abs_stable = 0;
    TangentVector unstable_eigenvector, stable_eigenvector;
    double residual = 0;       // max cyclic residual |y_{k+1} + a y_{k-1} - p(y_k)|
    int minimal_period = 0;
    int multiplicity = 1;      // cyclic rotations represented by this entry
};

SaddleData periodic_orbit(const HenonSystem& sys, const Itinerary& itin, double tol = 1e-13);
std::vector<SaddleData> all_periodic_orbits(const HenonSystem& sys, int n, bool dedupe = false);

struct HorseshoeReport {
    bool ok = false;
    double box_radius = 0;
    std::vector<double> critical_points;
    std::vector<double> critical_values;
    int crossings = 0;
    std::string diagnostic;
};

// Box half-width used for the horseshoe square: just outside the outermost real fixed point.
double horseshoe_box_radius(const HenonSystem& sys);
HorseshoeReport check_horseshoe(const HenonSystem& sys, std::uint64_t seed = 7);

// Solves sub/diag/sup tridiagonal (non-cyclic) in place; T is double or complex.
template <class T>
void solve_tridiagonal(std::vector<T>& sub, std::vector<T>& diag, std::vector<T>& sup, std::vector<T>& rhs);

}  // namespace henon
