#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "henon/critical.hpp"
#include "henon/util.hpp"

namespace henon {

namespace {

const double nan_v = std::numeric_limits<double>::quiet_NaN();

std::string word_str(const std::vector<int>& w) {
    std::string s;
    for (int c : w) s += char('0' + c);
    return s.empty() ? "-" : s;
}

// dG+/ds along the chart image at steps m, unit tangent
double slope(const UnstableChart& ch, const GreenEngine& engine, double xi, int m) {
    auto e = ch.eval(xi, m);
    if (!e.ok) return nan_v;
    auto g = engine.plus(e.point);
    if (!g.escaped) return nan_v;
    double tn = norm(e.tangent);
    if (!(tn > 0) || !std::isfinite(tn)) return nan_v;
    return 2.0 * std::real(g.gradient(e.tangent)) / tn;
}

struct Root {
    double xi;
    double residual;
};

// Single sign change of h on [lo, hi] from a uniform sample, then Illinois refinement.
bool unique_root(const std::function<double(double)>& h, double lo, double hi, int samples, Root& out,
                 std::string& why) {
    std::vector<double> xs(samples), hs(samples);
    for (int j = 0; j < samples; ++j) {
        xs[j] = lo + (hi - lo) * j / (samples - 1);
        hs[j] = h(xs[j]);
        if (!std::isfinite(hs[j])) {
            why = "slope unavailable";
            return false;
        }
    }
    int changes = 0, at = -1, last = -1;
    for (int j = 0; j < samples; ++j) {
        if (hs[j] == 0) continue;
        if (last >= 0 && (hs[j] > 0) != (hs[last] > 0)) {
            ++changes;
            at = last;
        }
        last = j;
    }
    if (changes != 1) {
        why = std::to_string(changes) + " sign changes";
        return false;
    }
    int b = at + 1;
    while (hs[b] == 0) ++b;
    double xa = xs[at], xb = xs[b], ha = hs[at], hb = hs[b];
    int side = 0;
    for (int it = 0; it < 200; ++it) {
        double xc = (xa * hb - xb * ha) / (hb - ha);
        if (!(xc > std::min(xa, xb) && xc < std::max(xa, xb))) xc = 0.5 * (xa + xb);
        double hc = h(xc);
        if (!std::isfinite(hc)) {
            why = "slope unavailable";
            return false;
        }
        if (hc == 0) {
            xa = xb = xc;
            break;
        }
        if ((hc > 0) == (ha > 0)) {
            xa = xc;
            ha = hc;
            if (side == -1) hb *= 0.5;
            side = -1;
        } else {
            xb = xc;
            hb = hc;
            if (side == 1) ha *= 0.5;
            side = 1;
        }
        if (std::abs(xb - xa) <= 4e-16 * (1 + std::abs(xc))) break;
    }
    out.xi = std::abs(ha) < std::abs(hb) ? xa : xb;
    out.residual = std::abs(h(out.xi));
    return true;
}

void finish(CriticalAtlas& A) {
    A.min_g = INFINITY;
    A.max_g = -INFINITY;
    A.total_mass = A.integral = A.max_residual = A.max_reality_dev = 0;
    for (auto& a : A.atoms) {
        A.total_mass += a.weight;
        A.integral += a.weight * a.g_plus;
        A.min_g = std::min(A.min_g, a.g_plus);
        A.max_g = std::max(A.max_g, a.g_plus);
        A.max_residual = std::max(A.max_residual, a.residual);
        A.max_reality_dev = std::max(A.max_reality_dev, a.reality_dev);
    }
    if (A.atoms.empty()) A.min_g = A.max_g = 0;
}

void run_reality(const HenonSystem& sys, const SaddleData& saddle, std::vector<CriticalAtom>& atoms,
                 const GreenEngine& engine) {
    parallel_for(atoms.size(), [&](std::size_t i) {
        auto r = reality_check(sys, saddle, atoms[i], engine);
        atoms[i].reality_dev = r.deviation;
        atoms[i].reality_converged = r.converged;
    });
}

}  // namespace

std::vector<GapInterval> find_gaps(const HenonSystem& sys, const UnstableCurve& curve) {
    if (curve.depth < 1) throw Error(ErrorCode::argument, "gaps need depth >= 1");
    const double r = curve.box_radius;
    std::vector<std::vector<GapInterval>> per(curve.pieces.size());
    parallel_for(curve.pieces.size(), [&](std::size_t i) {
        const auto& P = curve.pieces[i];
        UnstableChart ch(sys, curve.saddle, P.word);
        for (auto& b : piece_bends(ch, P, r)) {
            GapInterval g;
            g.generation = 1;
            g.bend = b.bend;
            g.chart_word = P.word;
            g.xi_lo = b.lo;
            g.xi_hi = b.hi;
            g.piece = int(i);
            per[i].push_back(g);
        }
    });
    std::vector<GapInterval> out;
    for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
    for (std::size_t i = 0; i < curve.links.size(); ++i) {
        const auto& L = curve.links[i];
        GapInterval g;
        g.generation = L.generation;
        g.bend = L.ancestor_bend;
        g.chart_word = L.ancestor_word;
        g.chart_steps = L.generation;
        g.xi_lo = L.ancestor_lo;
        g.xi_hi = L.ancestor_hi;
        g.excursion = true;
        g.piece = int(i);
        out.push_back(g);
    }
    // open ends of the curve
    for (int end = 0; end < 2 && !curve.pieces.empty(); ++end) {
        const auto& P = end == 0 ? curve.pieces.front() : curve.pieces.back();
        bool low = (end == 0) == (P.orientation > 0);
        const auto& n = P.nodes;
        int k = low ? 0 : int(n.size()) - 1, step = low ? 1 : -1;
        while (k >= 0 && k < int(n.size()) && !(std::abs(n[k].x) <= r && std::abs(n[k].y) <= r)) k += step;
        GapInterval g;
        g.truncated = true;
        g.chart_word = P.word;
        g.piece = end == 0 ? 0 : int(curve.pieces.size()) - 1;
        double a = n[low ? 0 : n.size() - 1].xi;
        double b = (k >= 0 && k < int(n.size())) ? n[k].xi : a;
        g.xi_lo = std::min(a, b);
        g.xi_hi = std::max(a, b);
        out.push_back(g);
    }
    return out;
}

CriticalAtom gap_critical_point(const HenonSystem& sys, const SaddleData& saddle, const GapInterval& gap,
                                const GreenEngine& engine, int samples) {
    if (gap.truncated) throw Error(ErrorCode::argument, "truncated gap has no full excursion");
    UnstableChart ch(sys, saddle, gap.chart_word);
    const int d = sys.degree();
    CriticalAtom a;
    a.generation = gap.generation;
    a.bend = gap.bend;
    a.chart_word = gap.chart_word;
    Root root{};
    std::string why;
    int m = gap.chart_steps;
    auto h = [&](double xi) { return slope(ch, engine, xi, m); };
    bool ok = unique_root(h, gap.xi_lo, gap.xi_hi, samples, root, why);
    if (!ok && why == "slope unavailable" && m != 1) {
        m = 1;
        a.reduced = true;
        ok = unique_root(h, gap.xi_lo, gap.xi_hi, samples, root, why);
    }
    if (!ok) {
        std::ostringstream os;
        os << "gap gen " << gap.generation << " bend " << gap.bend << " word " << word_str(gap.chart_word) << ": "
           << why;
        throw Error(ErrorCode::nonunique_critical, os.str());
    }
    a.chart_steps = m;
    a.xi = root.xi;
    a.residual = root.residual;
    auto e = ch.eval(root.xi, m);
    a.location = e.point;
    double g = engine.plus(e.point).value;
    a.g_plus = a.reduced ? std::pow(double(d), gap.generation - 1) * g : g;
    return a;
}

RealityResult reality_check(const HenonSystem& sys, const SaddleData& saddle, const CriticalAtom& atom,
                            const GreenEngine& engine) {
    UnstableChart ch(sys, saddle, atom.chart_word);
    const int m = 1;
    auto F = [&](cplx xi, bool& ok) -> cplx {
        auto e = ch.eval(xi, m);
        ok = e.ok;
        if (!ok) return 0;
        auto g = engine.plus(e.point);
        ok = g.escaped;
        return g.gradient(e.tangent);
    };
    RealityResult res;
    res.deviation = 0;
    res.converged = true;
    for (double s : {1.0, -1.0}) {
        cplx xi(atom.xi, s * 1e-3);
        bool conv = false;
        int it = 0;
        for (; it < 60 && !conv; ++it) {
            bool ok0, ok1, ok2;
            const double h = 1e-6;
            cplx f0 = F(xi, ok0);
            cplx df = (F(xi + h, ok1) - F(xi - h, ok2)) / (2 * h);
            if (!(ok0 && ok1 && ok2) || df == cplx(0)) break;
            cplx dxi = f0 / df;
            xi -= dxi;
            conv = std::abs(dxi) <= 1e-14 * (1 + std::abs(xi));
        }
        res.iterations += it;
        res.converged = res.converged && conv;
        res.deviation = std::max(res.deviation, conv ? std::abs(xi.imag()) : INFINITY);
    }
    return res;
}

CriticalAtlas atlas_bends(const HenonSystem& sys, const UnstableCurve& curve, const AtlasOptions& o) {
    const int d = sys.degree(), n = curve.depth;
    GreenEngine engine(sys, o.green);
    auto gaps = find_gaps(sys, curve);
    std::vector<GapInterval> bends;
    CriticalAtlas A;
    A.mode = AtlasMode::bends;
    A.depth = n;
    A.degree = d;
    for (auto& g : gaps) {
        if (!g.truncated) ++A.gap_count;
        if (!g.truncated && !g.excursion) bends.push_back(g);
    }
    A.atoms.resize(bends.size());
    parallel_for(bends.size(), [&](std::size_t i) {
        A.atoms[i] = gap_critical_point(sys, curve.saddle, bends[i], engine, o.samples);
    });
    if (o.reality) run_reality(sys, curve.saddle, A.atoms, engine);
    const double w = std::pow(double(d), -n);
    A.per_bend_count.assign(d - 1, 0);
    A.per_bend_mass.assign(d - 1, 0.0);
    for (auto& a : A.atoms) {
        a.weight = w;
        if (a.bend < 1 || a.bend > d - 1) throw Error(ErrorCode::structure_mismatch, "bend label out of range");
        A.per_bend_count[a.bend - 1] += 1;
        A.per_bend_mass[a.bend - 1] += w;
    }
    const long expect = std::lround(std::pow(double(d), n - 1));
    for (int b = 0; b < d - 1; ++b)
        if (A.per_bend_count[b] != expect)
            throw Error(ErrorCode::structure_mismatch, "bend " + std::to_string(b + 1) + " has " +
                                                           std::to_string(A.per_bend_count[b]) + " atoms, expected " +
                                                           std::to_string(expect));
    finish(A);
    return A;
}

CriticalAtlas atlas_level(const HenonSystem& sys, const UnstableCurve& curve, double t, const AtlasOptions& o) {
    if (!(t > 0)) throw Error(ErrorCode::argument, "level t must be positive");
    const int d = sys.degree(), n = curve.depth;
    const double top = t * d;
    GreenEngine engine(sys, o.green);
    auto gaps = find_gaps(sys, curve);
    std::vector<GapInterval> todo;
    CriticalAtlas A;
    A.mode = AtlasMode::level;
    A.depth = n;
    A.degree = d;
    A.band_t = t;
    for (auto& g : gaps)
        if (!g.truncated) todo.push_back(g);
    A.gap_count = int(todo.size());
    std::vector<CriticalAtom> solved(todo.size());
    parallel_for(todo.size(), [&](std::size_t i) {
        solved[i] = gap_critical_point(sys, curve.saddle, todo[i], engine, o.samples);
    });
    double gmax1 = 0;
    for (auto& a : solved)
        if (a.generation == 1) gmax1 = std::max(gmax1, a.g_plus);

    std::vector<CriticalAtom> kept;
    for (auto& a : solved)
        if (a.g_plus >= t && a.g_plus < top) kept.push_back(a);

    const double r = curve.box_radius;
    int g = 0;
    A.generations_used = 1;
    for (; std::pow(double(d), g - 1) * gmax1 * 1.05 >= t; --g) {
        const int L = n - g;
        if (L > 40) throw Error(ErrorCode::argument, "level band too low for this depth");
        const std::uint64_t count = std::uint64_t(std::llround(std::pow(double(d), L)));
        std::vector<std::vector<CriticalAtom>> per(count);
        parallel_for(count, [&](std::size_t idx) {
            auto word = Itinerary::from_index(idx, L, d).symbols;
            UnstableChart ch(sys, curve.saddle, word);
            for (auto& b : scan_bends(ch, r)) {
                GapInterval gap;
                gap.generation = 1;
                gap.bend = b.bend;
                gap.chart_word = word;
                gap.xi_lo = b.lo;
                gap.xi_hi = b.hi;
                auto a = gap_critical_point(sys, curve.saddle, gap, engine, o.samples);
                double v = std::pow(double(d), g - 1) * a.g_plus;
                if (!(v >= t && v < top)) continue;
                auto e = ch.eval(a.xi, g);
                if (!e.ok) continue;
                a.generation = g;
                a.chart_steps = 1;
                a.location = e.point;
                a.g_plus = engine.plus(e.point).value;
                per[idx].push_back(a);
            }
        });
        for (auto& v : per) kept.insert(kept.end(), v.begin(), v.end());
        A.generations_used = g;
    }
    if (o.reality) run_reality(sys, curve.saddle, kept, engine);
    const double w = std::pow(double(d), -n);
    for (auto& a : kept) {
        a.weight = w;
        if (std::abs(a.g_plus - t) < o.edge_tol || std::abs(a.g_plus - top) < o.edge_tol)
            A.warnings.push_back("atom near band edge: gen " + std::to_string(a.generation) + " word " +
                                 word_str(a.chart_word) + " G " + fmt17(a.g_plus));
    }
    A.atoms = std::move(kept);
    finish(A);
    return A;
}

CriticalAtlas build_atlas(const HenonSystem& sys, const SaddleData& saddle, int depth, AtlasMode mode, double t,
                          const RefineParams& refine, const AtlasOptions& o) {
    if (depth < 1) throw Error(ErrorCode::argument, "atlas depth must be >= 1");
    auto curve = grow_unstable_curve(sys, saddle, depth, refine);
    return mode == AtlasMode::bends ? atlas_bends(sys, curve, o) : atlas_level(sys, curve, t, o);
}

}  // namespace henon
