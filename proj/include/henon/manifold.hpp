#pragma once

#include <cstddef>
#include <vector>

#include "henon/core.hpp"
#include "henon/horseshoe.hpp"

namespace henon {

// Chart of an unstable arc by backward symbolic history.
// A point is (u_1, xi) with u_k = y_{-k}; word[k] is the strip symbol of u_{k+1}. After the word,
// the history follows the saddle's backward itinerary and is pinned to it after tail_len terms.
// eval(xi, m) returns (y_{m-1}, y_m) of the orbit through that point; m may be negative.
class UnstableChart {
public:
    UnstableChart(const HenonSystem& sys, const SaddleData& saddle, std::vector<int> word, int tail_len = 30);

    template <class T>
    struct Sample {
        PlanePoint point;
        TangentVector tangent;  // d/dxi
        bool ok = false;
    };

    Sample<double> eval(double xi, int m) const;
    Sample<cplx> eval(cplx xi, int m) const;

    const std::vector<int>& word() const { return word_; }
    int length() const { return int(sym_.size()); }

    // backward history u_1..u_K and its xi-derivative
    bool solve(double xi, std::vector<double>& u, std::vector<double>& du) const;
    bool solve(cplx xi, std::vector<cplx>& u, std::vector<cplx>& du) const;

private:
    const HenonSystem* sys_;
    BranchSolver bs_;
    double a_re_;
    cplx a_;
    bool real_map_;
    std::vector<int> word_;
    std::vector<int> sym_;  // symbols of u_1..u_K
    std::vector<double> pin_init_;
    double pin_;            // u_{K+1}
};

struct RefineParams {
    double max_segment = 0;  // 0 selects 1e-3 R
    double max_turn = 0.2;
    std::size_t node_cap = 5000000;
};

struct CurveNode {
    double xi, x, y;
};

struct CurvePiece {
    std::vector<int> word;
    int orientation = 1;  // +1 when the curve traverses the piece with increasing xi
    std::vector<CurveNode> nodes;  // ascending xi
};

// Excursion joining consecutive pieces: the image of a generation-1 bend of an ancestor piece.
struct CurveLink {
    int generation = 2;
    std::vector<int> ancestor_word;
    int ancestor_bend = 0;
    double ancestor_lo = 0, ancestor_hi = 0;  // bend interval in the ancestor chart (m = 1)
};

struct UnstableCurve {
    SaddleData saddle;
    int depth = 0;
    int chart_steps = 0;  // 0 at depth 0, 1 afterwards
    double box_radius = 0;
    RefineParams params;
    std::vector<CurvePiece> pieces;
    std::vector<CurveLink> links;  // links[i] joins pieces[i] and pieces[i+1]

    std::size_t node_count = 0;
    double max_segment_seen = 0, max_turn_seen = 0;
    bool truncated = false;
    int bad_crossings = 0;

    double seed_length = 0;
    double seed_residual_ratio = 0;  // r(eps)/r(eps/2) of the linearization residual
    double seed_consistency = 0;     // chart vs pushed seed, max |dx|
    int warmup_steps = 0;
    double push_consistency = 0;     // pushed nodes vs chart at the next depth

    int full_crossings() const;
    std::vector<PlanePoint> polyline() const;  // nodes in traversal order
};

class CurveGrower {
public:
    CurveGrower(const HenonSystem& sys, const SaddleData& saddle, RefineParams params);
    const UnstableCurve& current() const { return curve_; }
    void step();  // depth -> depth + 1

private:
    void seed();
    void refine(CurvePiece& piece, int steps);

    const HenonSystem* sys_;
    BranchSolver bs_;
    UnstableCurve curve_;
};

UnstableCurve grow_unstable_curve(const HenonSystem& sys, const SaddleData& saddle, int depth, RefineParams params = {});

struct BendInterval {
    int bend;  // 1..d-1 by increasing xi
    double lo, hi;
};
// Generation-1 bends of the chart's image piece (m = 1), located by scanning xi over the box.
std::vector<BendInterval> scan_bends(const UnstableChart& chart, double box_radius);

// xi where the chart point (steps m) crosses |y| = r, bracketed by an inside and an outside xi.
double box_edge(const UnstableChart& chart, double xi_in, double xi_out, double r, int m);

// Bends of a depth >= 1 piece from its nodes, edges polished on the chart.
std::vector<BendInterval> piece_bends(const UnstableChart& chart, const CurvePiece& piece, double r);

}  // namespace henon
