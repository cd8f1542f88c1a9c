#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "henon/critical.hpp"

namespace henon {

struct PeriodicEstimate {
    int period = 0;
    double lambda_plus = 0, lambda_minus = 0;
    std::uint64_t fixed_points = 0;  // counted with rotations
    std::size_t orbits = 0;          // distinct cycles solved
    double max_identity_error = 0;   // |log|lu| + log|ls| - n log|a||
    double min_unstable_rate = 0;    // min log|lu| / n
    double max_residual = 0;
};

PeriodicEstimate periodic_estimate(const HenonSystem& sys, int n);
// periods max(1, n-2) .. n
std::vector<PeriodicEstimate> lyapunov_periodic(const HenonSystem& sys, int n);

struct FormulaEstimate {
    double value = 0;
    double log_d = 0;
    double integral = 0;
    bool degraded = false;
};

FormulaEstimate lyapunov_formula(const HenonSystem& sys, const CriticalAtlas& atlas);
// atlas built on the inverse normal form
FormulaEstimate lyapunov_minus_formula(const HenonSystem& sys, const CriticalAtlas& inverse_atlas);

// Average over the fixed points of f^n of (1/n) log|Df^n alpha|.
double directional_exponent(const HenonSystem& sys, const TangentVector& alpha, int n);

struct DepthRow {
    int depth = 0;
    std::size_t atoms = 0;
    double integral = 0, total_mass = 0, min_g = 0, max_g = 0;
};

struct AtlasSequence {
    std::vector<DepthRow> rows;
    UnstableCurve curve;
    CriticalAtlas atlas;  // bends atlas at the final depth
};

// Bends atlases at the last `rows` depths up to `depth`, sharing one growing curve.
AtlasSequence bends_sequence(const HenonSystem& sys, const SaddleData& saddle, int depth, const RefineParams& refine,
                             const AtlasOptions& o, int rows = 3);

struct ReportSettings {
    int period = 12;
    int depth = 12;
    double band_t = 1.0;
    RefineParams refine;
    AtlasOptions atlas;
    double cross_tol = 1e-2;
    double converge_tol = 5e-4;
    double identity_tol = 1e-10;
    bool level_check = true;
    bool inverse = true;
};

struct ExponentReport {
    double lambda_plus_orbits = 0, lambda_plus_formula = 0;
    double lambda_minus_orbits = 0, lambda_minus_formula = 0;
    double log_d = 0, log_abs_det = 0;
    double integral_term_plus = 0, integral_term_minus = 0;
    double residual_cross = 0, residual_jacobian = 0;
    double a4_lower = 0, a4_upper = 0;                  // atlas mass times min / max G+
    double a4_lower_unit = 0, a4_upper_unit = 0;        // (d-1) times min / max G+
    double level_integral = 0, level_t = 0;
    int depth = 0, period = 0;
    double max_identity_error = 0;
    std::vector<PeriodicEstimate> periodic_rows;
    std::vector<DepthRow> formula_rows, minus_rows;
    std::vector<std::pair<std::string, bool>> verdicts;
    std::vector<std::string> diagnostics;

    bool ok() const;
};

ExponentReport make_report(const HenonSystem& sys, const ReportSettings& s);

}  // namespace henon
