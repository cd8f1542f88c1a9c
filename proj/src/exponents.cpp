#include <algorithm>
#include <cmath>

#include "henon/exponents.hpp"
#include "henon/util.hpp"

namespace henon {

PeriodicEstimate periodic_estimate(const HenonSystem& sys, int n) {
    auto orbits = all_periodic_orbits(sys, n, true);
    const int d = sys.degree();
    const double loga = std::log(std::abs(sys.jacobian_det()));
    PeriodicEstimate e;
    e.period = n;
    e.orbits = orbits.size();
    e.min_unstable_rate = INFINITY;
    double su = 0, ss = 0;
    for (auto& o : orbits) {
        e.fixed_points += std::uint64_t(o.multiplicity);
        su += o.multiplicity * o.log_abs_unstable;
        ss += o.multiplicity * o.log_abs_stable;
        e.max_identity_error =
            std::max(e.max_identity_error, std::abs(o.log_abs_unstable + o.log_abs_stable - n * loga));
        e.min_unstable_rate = std::min(e.min_unstable_rate, o.log_abs_unstable / n);
        e.max_residual = std::max(e.max_residual, o.residual);
    }
    const double norm = n * std::pow(double(d), n);
    e.lambda_plus = su / norm;
    e.lambda_minus = ss / norm;
    if (double(e.fixed_points) != std::pow(double(d), n))
        throw Error(ErrorCode::structure_mismatch, "period " + std::to_string(n) + ": " +
                                                       std::to_string(e.fixed_points) + " fixed points");
    return e;
}

std::vector<PeriodicEstimate> lyapunov_periodic(const HenonSystem& sys, int n) {
    if (n < 1) throw Error(ErrorCode::argument, "period must be >= 1");
    std::vector<PeriodicEstimate> out;
    for (int k = std::max(1, n - 2); k <= n; ++k) out.push_back(periodic_estimate(sys, k));
    return out;
}

FormulaEstimate lyapunov_formula(const HenonSystem& sys, const CriticalAtlas& atlas) {
    FormulaEstimate f;
    f.log_d = std::log(double(sys.degree()));
    f.integral = atlas.integral;
    f.value = f.log_d + f.integral;
    f.degraded = !atlas.warnings.empty();
    return f;
}

FormulaEstimate lyapunov_minus_formula(const HenonSystem& sys, const CriticalAtlas& inverse_atlas) {
    FormulaEstimate f = lyapunov_formula(sys, inverse_atlas);
    f.value = -f.value;
    return f;
}

double directional_exponent(const HenonSystem& sys, const TangentVector& alpha, int n) {
    if (!(norm(alpha) > 0)) throw Error(ErrorCode::argument, "direction must be nonzero");
    auto orbits = all_periodic_orbits(sys, n, true);
    std::vector<double> sums(orbits.size(), 0.0);
    parallel_for(orbits.size(), [&](std::size_t i) {
        const auto& o = orbits[i];
        for (int k = 0; k < o.multiplicity; ++k) {
            const double na = norm(alpha);
            TangentVector v{alpha.vx / na, alpha.vy / na};
            double acc = 0;
            PlanePoint z = o.orbit[k];
            for (int j = 0; j < n; ++j) {
                v = jacobian(sys, z) * v;
                z = apply(sys, z);
                double nv = norm(v);
                acc += std::log(nv);
                v = {v.vx / nv, v.vy / nv};
            }
            sums[i] += acc / n;
        }
    });
    double total = 0;
    for (double s : sums) total += s;
    return total / std::pow(double(sys.degree()), n);
}

AtlasSequence bends_sequence(const HenonSystem& sys, const SaddleData& saddle, int depth, const RefineParams& refine,
                             const AtlasOptions& o, int rows) {
    if (depth < 2) throw Error(ErrorCode::argument, "atlas depth must be >= 2");
    CurveGrower g(sys, saddle, refine);
    AtlasSequence seq;
    const int first = std::max(1, depth - rows + 1);
    AtlasOptions quick = o;
    quick.reality = false;
    for (int k = 1; k <= depth; ++k) {
        g.step();
        if (k < first) continue;
        auto A = atlas_bends(sys, g.current(), k == depth ? o : quick);
        seq.rows.push_back({k, A.atoms.size(), A.integral, A.total_mass, A.min_g, A.max_g});
        if (k == depth) seq.atlas = std::move(A);
    }
    seq.curve = g.current();
    return seq;
}

bool ExponentReport::ok() const {
    for (auto& v : verdicts)
        if (!v.second) return false;
    return true;
}

ExponentReport make_report(const HenonSystem& sys, const ReportSettings& s) {
    auto gate = check_horseshoe(sys);
    if (!gate.ok) throw Error(ErrorCode::horseshoe_check_failed, gate.diagnostic);
    const int d = sys.degree();
    ExponentReport r;
    r.depth = s.depth;
    r.period = s.period;
    r.log_d = std::log(double(d));
    r.log_abs_det = std::log(std::abs(sys.jacobian_det()));

    r.periodic_rows = lyapunov_periodic(sys, s.period);
    const auto& last = r.periodic_rows.back();
    r.lambda_plus_orbits = last.lambda_plus;
    r.lambda_minus_orbits = last.lambda_minus;
    for (int n = 1; n <= s.period; ++n) {
        double e = n >= std::max(1, s.period - 2) ? r.periodic_rows[n - std::max(1, s.period - 2)].max_identity_error
                                                  : periodic_estimate(sys, n).max_identity_error;
        r.max_identity_error = std::max(r.max_identity_error, e);
    }

    auto saddle = periodic_orbit(sys, Itinerary{{d - 1}});
    auto seq = bends_sequence(sys, saddle, s.depth, s.refine, s.atlas);
    r.formula_rows = seq.rows;
    auto plus = lyapunov_formula(sys, seq.atlas);
    r.integral_term_plus = plus.integral;
    r.lambda_plus_formula = plus.value;
    r.residual_cross = std::abs(r.lambda_plus_orbits - r.lambda_plus_formula);
    r.a4_lower = seq.atlas.total_mass * seq.atlas.min_g;
    r.a4_upper = seq.atlas.total_mass * seq.atlas.max_g;
    r.a4_lower_unit = (d - 1) * seq.atlas.min_g;
    r.a4_upper_unit = (d - 1) * seq.atlas.max_g;

    auto add = [&](const std::string& name, bool ok) { r.verdicts.push_back({name, ok}); };
    add("identity_per_orbit", r.max_identity_error < s.identity_tol);
    add("orbit_floor", last.min_unstable_rate >= r.log_d - 0.1 && r.lambda_plus_orbits >= r.log_d - s.cross_tol);
    if (r.periodic_rows.size() >= 2) {
        auto& prev = r.periodic_rows[r.periodic_rows.size() - 2];
        add("orbits_converged", std::abs(last.lambda_plus - prev.lambda_plus) < s.converge_tol);
    }
    if (r.formula_rows.size() >= 2) {
        auto& a = r.formula_rows[r.formula_rows.size() - 2];
        add("formula_converged", std::abs(r.formula_rows.back().integral - a.integral) < s.converge_tol);
    }
    add("residual_cross", r.residual_cross < s.cross_tol);
    add("a4_sandwich", r.a4_lower < r.lambda_plus_orbits - r.log_d && r.lambda_plus_orbits - r.log_d < r.a4_upper);
    add("formula_floor", r.lambda_plus_formula >= r.log_d);
    add("atoms_real", seq.atlas.max_reality_dev < 1e-8);
    if (plus.degraded) r.diagnostics.push_back("plus atlas carries warnings");
    if (!(r.a4_lower_unit < r.lambda_plus_orbits - r.log_d && r.lambda_plus_orbits - r.log_d < r.a4_upper_unit))
        r.diagnostics.push_back("unit-mass a4 bounds (d-1)*[min,max] G+ = [" + fmt17(r.a4_lower_unit) + ", " +
                                fmt17(r.a4_upper_unit) + "] exclude lambda+ - log d = " +
                                fmt17(r.lambda_plus_orbits - r.log_d));

    if (s.level_check) {
        auto L = atlas_level(sys, seq.curve, s.band_t, s.atlas);
        r.level_t = s.band_t;
        r.level_integral = L.integral;
        add("level_vs_bends", std::abs(L.integral - seq.atlas.integral) < 1e-3);
        for (auto& w : L.warnings) r.diagnostics.push_back(w);
    }

    if (s.inverse) {
        auto inv = sys.inverse_normal_form();
        auto ig = check_horseshoe(inv);
        if (!ig.ok) throw Error(ErrorCode::horseshoe_check_failed, "inverse: " + ig.diagnostic);
        auto isad = periodic_orbit(inv, Itinerary{{d - 1}});
        RefineParams ir = s.refine;
        if (ir.max_segment > 0) ir.max_segment *= inv.escape_radius() / sys.escape_radius();
        auto iseq = bends_sequence(inv, isad, s.depth, ir, s.atlas);
        r.minus_rows = iseq.rows;
        auto minus = lyapunov_minus_formula(inv, iseq.atlas);
        r.integral_term_minus = minus.integral;
        r.lambda_minus_formula = minus.value;
        r.residual_jacobian = std::abs(r.lambda_plus_formula + r.lambda_minus_formula - r.log_abs_det);
        add("residual_jacobian", r.residual_jacobian < s.cross_tol);
        add("minus_cross", std::abs(r.lambda_minus_orbits - r.lambda_minus_formula) < s.cross_tol);
        add("minus_ceiling", r.lambda_minus_formula <= -r.log_d + s.cross_tol);
    }
    return r;
}

}  // namespace henon
