#pragma once

#include <string>
#include <vector>

#include "henon/green.hpp"
#include "henon/manifold.hpp"

namespace henon {

// An outside-the-box stretch of the unstable curve, parametrized by a chart.
struct GapInterval {
    int generation = 1;
    int bend = 0;                 // bend label in the chart at m = 1
    std::vector<int> chart_word;
    int chart_steps = 1;          // the gap is the chart image at this m
    double xi_lo = 0, xi_hi = 0;
    bool truncated = false;       // curve ends inside this gap
    bool excursion = false;       // lies between two pieces
    int piece = -1;
};

struct CriticalAtom {
    PlanePoint location;
    double g_plus = 0;
    double weight = 0;
    int generation = 1;
    int bend = 0;
    std::vector<int> chart_word;
    int chart_steps = 1;   // m actually used by the root solve
    bool reduced = false;  // solved at m = 1 because the gap overflows at its own generation
    double xi = 0;
    double residual = 0;   // |dG+/ds| at the root, unit tangent
    double reality_dev = -1;
    bool reality_converged = false;
    int multiplicity = 1;
};

struct RealityResult {
    double deviation = -1;  // max |Im xi| over both seeds
    bool converged = false;
    int iterations = 0;
};

enum class AtlasMode { bends, level };

struct AtlasOptions {
    GreenOptions green;
    int samples = 64;
    bool reality = true;
    double edge_tol = 1e-6;  // band-edge warning distance
};

struct CriticalAtlas {
    AtlasMode mode = AtlasMode::bends;
    int depth = 0;
    int degree = 2;
    double band_t = 0;
    std::vector<CriticalAtom> atoms;
    std::vector<double> per_bend_mass;  // index bend-1, bends mode only
    std::vector<int> per_bend_count;
    double total_mass = 0;
    double integral = 0;  // sum of weight * G+
    double min_g = 0, max_g = 0;
    double max_residual = 0;
    double max_reality_dev = 0;
    int gap_count = 0;
    int generations_used = 0;  // level mode: lowest generation visited
    std::vector<std::string> warnings;
};

// Bend, excursion and truncated-end gaps of a grown curve (depth >= 1).
std::vector<GapInterval> find_gaps(const HenonSystem& sys, const UnstableCurve& curve);

// Unique interior critical point of G+ along the gap; NONUNIQUE_CRITICAL otherwise.
CriticalAtom gap_critical_point(const HenonSystem& sys, const SaddleData& saddle, const GapInterval& gap,
                                const GreenEngine& engine, int samples = 64);

// Complex Newton on dG+(gamma) gamma' from xi_c +- 1e-3 i.
RealityResult reality_check(const HenonSystem& sys, const SaddleData& saddle, const CriticalAtom& atom,
                            const GreenEngine& engine);

CriticalAtlas atlas_bends(const HenonSystem& sys, const UnstableCurve& curve, const AtlasOptions& o = {});
CriticalAtlas atlas_level(const HenonSystem& sys, const UnstableCurve& curve, double t, const AtlasOptions& o = {});

CriticalAtlas build_atlas(const HenonSystem& sys, const SaddleData& saddle, int depth, AtlasMode mode, double t,
                          const RefineParams& refine, const AtlasOptions& o = {});

}  // namespace henon
