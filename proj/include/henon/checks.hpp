#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "henon/green.hpp"

namespace henon {

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0;      // worst observed statistic
    double threshold = 0;
    int samples = 0;
    std::string detail;
};

struct TangencySeed {
    int i = 0, j = 0;  // cell (i, j)-(i+1, j) on the grid, x index i
    double x0 = 0, x1 = 0, y = 0;
};

struct TangencyZero {
    PlanePoint z;
    cplx det;
    bool accepted = false;  // |det| below the zero tolerance after bisection
};

struct TangencyScan {
    std::vector<double> xs, ys;
    std::vector<cplx> det;  // row-major [j * xs.size() + i]; NaN where a Green function is zero
    std::vector<TangencySeed> seeds;
    std::vector<TangencyZero> zeros;
};

// Real grid scan of the tangency determinant with sign changes along x refined by bisection.
TangencyScan tangency_scan(const HenonSystem& sys, double x0, double x1, double y0, double y1, int nx, int ny,
                           const GreenOptions& o = {}, double zero_tol = 1e-10);

// det / (-1/(4xy)) - 1 at (s, s)
double tangency_diagonal_error(const HenonSystem& sys, double s, const GreenOptions& o = {});
// max |4xy det + 1| over an n x n grid on the cone 1/2 |x| < |y| < 2 |x|, |x| > radius
double tangency_cone_deviation(const HenonSystem& sys, double radius, int n, const GreenOptions& o = {});

struct LemmaSettings {
    std::uint64_t seed = 1;
    GreenOptions green;
    int functional_samples = 100;
    int gradient_samples = 50;
    int honesty_samples = 1000;
    int direction_samples = 20;
    int beta_samples = 20;
    int tangency_grid = 161;
    double tangency_extent = 20;
};

std::vector<CheckResult> lemma_checks(const HenonSystem& sys, const LemmaSettings& s = {});

}  // namespace henon
