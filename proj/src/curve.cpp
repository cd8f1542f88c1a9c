#include <algorithm>
#include <atomic>
#include <cmath>

#include "henon/manifold.hpp"
#include "henon/util.hpp"

namespace henon {

namespace {

bool inside(double x, double y, double r) { return std::abs(x) <= r && std::abs(y) <= r; }

double turn_angle(const CurveNode& a, const CurveNode& b, const CurveNode& c) {
    double ux = b.x - a.x, uy = b.y - a.y, vx = c.x - b.x, vy = c.y - b.y;
    return std::abs(std::atan2(ux * vy - uy * vx, ux * vx + uy * vy));
}

struct Run {
    int lo, hi;  // inclusive node indices inside the box
};

std::vector<Run> inside_runs(const std::vector<CurveNode>& nodes, double r) {
    std::vector<Run> runs;
    int start = -1;
    for (int i = 0; i < int(nodes.size()); ++i) {
        bool in = inside(nodes[i].x, nodes[i].y, r);
        if (in && start < 0) start = i;
        if (!in && start >= 0) {
            runs.push_back({start, i - 1});
            start = -1;
        }
    }
    if (start >= 0) runs.push_back({start, int(nodes.size()) - 1});
    return runs;
}

bool full_crossing(const std::vector<CurveNode>& nodes, const Run& run, double r) {
    if (run.lo == 0 || run.hi + 1 >= int(nodes.size())) return false;
    double y0 = nodes[run.lo - 1].y, y1 = nodes[run.hi + 1].y;
    return std::abs(y0) > r && std::abs(y1) > r && (y0 > 0) != (y1 > 0);
}

}  // namespace

int UnstableCurve::full_crossings() const {
    int n = 0;
    for (auto& p : pieces)
        for (auto& run : inside_runs(p.nodes, box_radius))
            if (full_crossing(p.nodes, run, box_radius)) ++n;
    return n;
}

std::vector<PlanePoint> UnstableCurve::polyline() const {
    std::vector<PlanePoint> out;
    for (auto& p : pieces) {
        if (p.orientation > 0)
            for (auto& n : p.nodes) out.push_back({n.x, n.y});
        else
            for (auto it = p.nodes.rbegin(); it != p.nodes.rend(); ++it) out.push_back({it->x, it->y});
    }
    return out;
}

CurveGrower::CurveGrower(const HenonSystem& sys, const SaddleData& saddle, RefineParams params)
    : sys_(&sys), bs_(sys.factors().at(0).poly) {
    if (!sys.single_real()) throw Error(ErrorCode::argument, "curve growing needs a single real factor");
    curve_.saddle = saddle;
    curve_.box_radius = horseshoe_box_radius(sys);
    if (params.max_segment <= 0) params.max_segment = 1e-3 * sys.escape_radius();
    if (!(params.max_turn > 0) || params.node_cap < 16) throw Error(ErrorCode::argument, "bad refinement parameters");
    curve_.params = params;
    seed();
}

void CurveGrower::seed() {
    const auto& s = curve_.saddle;
    const int np = int(s.ys.size());
    const double r = curve_.box_radius;
    const double px = s.orbit[0].x.real(), py = s.orbit[0].y.real();
    const double vx = s.unstable_eigenvector.vx.real(), vy = s.unstable_eigenvector.vy.real();
    const double lam = s.unstable_eigenvalue.real();
    const double eps = 1e-6 * (2.0 + sys_->factors()[0].poly.tail_abs_sum());
    curve_.seed_length = eps;

    auto push = [&](double t, int k) {
        PlanePoint z{px + t * vx, py + t * vy};
        for (int i = 0; i < k * np; ++i) z = apply(*sys_, z);
        return z;
    };
    auto lin_res = [&](double t) {
        PlanePoint z = push(t, 1);
        return std::hypot(z.x.real() - (px + lam * t * vx), z.y.real() - (py + lam * t * vy));
    };
    double r1 = lin_res(eps), r2 = lin_res(eps / 2);
    curve_.seed_residual_ratio = r2 > 0 ? r1 / r2 : 4.0;

    struct SeedNode {
        double t, x, y;
    };
    std::vector<SeedNode> nodes;
    const int N = 64;
    for (int i = 0; i <= N; ++i) nodes.push_back({-eps + 2 * eps * i / N, 0, 0});
    int k = 0, lo = -1, hi = -1;
    for (k = 1; k <= 80; ++k) {
        for (auto& n : nodes) {
            PlanePoint z = push(n.t, k);
            n.x = z.x.real();
            n.y = z.y.real();
        }
        for (int pass = 0; pass < 40 && nodes.size() < 200000; ++pass) {
            std::vector<SeedNode> out;
            bool any = false;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                out.push_back(nodes[i]);
                if (i + 1 < nodes.size() &&
                    std::hypot(nodes[i + 1].x - nodes[i].x, nodes[i + 1].y - nodes[i].y) > 0.05 * r) {
                    double t = 0.5 * (nodes[i].t + nodes[i + 1].t);
                    PlanePoint z = push(t, k);
                    out.push_back({t, z.x.real(), z.y.real()});
                    any = true;
                }
            }
            nodes.swap(out);
            if (!any) break;
        }
        int c = int(std::min_element(nodes.begin(), nodes.end(), [](auto& a, auto& b) {
                        return std::abs(a.t) < std::abs(b.t);
                    }) - nodes.begin());
        lo = hi = -1;
        for (int i = c; i < int(nodes.size()); ++i)
            if (!inside(nodes[i].x, nodes[i].y, r)) {
                hi = i;
                break;
            }
        for (int i = c; i >= 0; --i)
            if (!inside(nodes[i].x, nodes[i].y, r)) {
                lo = i;
                break;
            }
        if (lo >= 0 && hi >= 0) break;
    }
    curve_.warmup_steps = k;
    if (lo < 0 || hi < 0)
        throw Error(ErrorCode::structure_mismatch, "seed segment never spans the box");
    if (std::abs(nodes[lo].y) <= r || std::abs(nodes[hi].y) <= r)
        throw Error(ErrorCode::structure_mismatch, "seed segment leaves the box through a side");

    UnstableChart ch(*sys_, s, {});
    CurvePiece piece;
    double cons = 0;
    for (int i = lo; i <= hi; ++i) {
        auto e = ch.eval(nodes[i].y, 0);
        if (!e.ok) continue;
        cons = std::max(cons, std::abs(e.point.x.real() - nodes[i].x));
        piece.nodes.push_back({nodes[i].y, e.point.x.real(), e.point.y.real()});
    }
    std::sort(piece.nodes.begin(), piece.nodes.end(), [](auto& a, auto& b) { return a.xi < b.xi; });
    curve_.seed_consistency = cons;
    refine(piece, 0);
    curve_.pieces = {piece};
    curve_.depth = 0;
    curve_.chart_steps = 0;
    curve_.node_count = piece.nodes.size();
}

void CurveGrower::refine(CurvePiece& piece, int steps) {
    UnstableChart ch(*sys_, curve_.saddle, piece.word);
    const auto& P = curve_.params;
    auto& nodes = piece.nodes;
    for (int pass = 0; pass < 60; ++pass) {
        const int n = int(nodes.size());
        std::vector<char> split(std::max(0, n - 1), 0);
        for (int i = 0; i + 1 < n; ++i)
            if (std::hypot(nodes[i + 1].x - nodes[i].x, nodes[i + 1].y - nodes[i].y) > P.max_segment) split[i] = 1;
        for (int i = 1; i + 1 < n; ++i)
            if (turn_angle(nodes[i - 1], nodes[i], nodes[i + 1]) > P.max_turn) split[i - 1] = split[i] = 1;
        bool any = false;
        std::vector<CurveNode> out;
        for (int i = 0; i < n; ++i) {
            out.push_back(nodes[i]);
            if (i + 1 < n && split[i] && nodes[i + 1].xi - nodes[i].xi > 1e-12 * (1 + std::abs(nodes[i].xi))) {
                double xi = 0.5 * (nodes[i].xi + nodes[i + 1].xi);
                auto e = ch.eval(xi, steps);
                if (e.ok) {
                    out.push_back({xi, e.point.x.real(), e.point.y.real()});
                    any = true;
                }
            }
        }
        nodes.swap(out);
        if (!any || nodes.size() > P.node_cap) break;
    }
}

void CurveGrower::step() {
    const double r = curve_.box_radius;
    const auto& f = sys_->factors()[0];
    const double a = f.a.real();
    const bool from_seed = curve_.depth == 0;

    std::vector<CurvePiece> children;
    std::vector<CurveLink> links;
    int bad = 0;
    for (std::size_t pi = 0; pi < curve_.pieces.size(); ++pi) {
        const CurvePiece& P = curve_.pieces[pi];
        std::vector<Run> runs;
        for (auto& run : inside_runs(P.nodes, r)) {
            if (full_crossing(P.nodes, run, r))
                runs.push_back(run);
            else if (!(run.lo == 0 || run.hi + 1 == int(P.nodes.size())))
                ++bad;
        }
        std::vector<int> order(runs.size());
        for (std::size_t c = 0; c < runs.size(); ++c) order[c] = int(c);
        if (P.orientation < 0) std::reverse(order.begin(), order.end());
        bool first = true;
        int prev_c = -1;
        for (int c : order) {
            const Run& run = runs[c];
            CurvePiece ch;
            ch.word = P.word;
            if (!from_seed) ch.word.insert(ch.word.begin(), bs_.piece_of(P.nodes[(run.lo + run.hi) / 2].xi));
            for (int i = run.lo - 1; i <= run.hi + 1; ++i) {
                double x = P.nodes[i].x, y = P.nodes[i].y;
                ch.nodes.push_back({y, y, f.poly.eval(y) - a * x});
            }
            double dy = P.nodes[run.hi + 1].y - P.nodes[run.lo - 1].y;
            ch.orientation = (dy > 0 ? 1 : -1) * P.orientation;
            if (ch.nodes.front().xi > ch.nodes.back().xi) std::reverse(ch.nodes.begin(), ch.nodes.end());
            if (!children.empty()) {
                if (!first) {
                    int bend = std::max(c, prev_c);
                    const Run &left = runs[bend - 1], &right = runs[bend];
                    UnstableChart pc(*sys_, curve_.saddle, P.word);
                    double lo = box_edge(pc, P.nodes[left.hi].xi, P.nodes[left.hi + 1].xi, r, 1);
                    double hi = box_edge(pc, P.nodes[right.lo].xi, P.nodes[right.lo - 1].xi, r, 1);
                    links.push_back({2, P.word, bend, lo, hi});
                } else {
                    CurveLink l = curve_.links.at(pi - 1);
                    ++l.generation;
                    links.push_back(l);
                }
            }
            children.push_back(std::move(ch));
            first = false;
            prev_c = c;
        }
        if (runs.empty() && pi > 0 && !children.empty()) {
            // a parent without crossings would merge two excursions; not expected for horseshoes
            ++bad;
        }
    }

    std::vector<double> cons(children.size(), 0.0);
    std::atomic<std::size_t> total{0};
    const std::size_t cap = curve_.params.node_cap;
    std::atomic<bool> truncated{false};
    parallel_for(children.size(), [&](std::size_t i) {
        CurvePiece& c = children[i];
        UnstableChart ch(*sys_, curve_.saddle, c.word);
        const CurveNode& mid = c.nodes[c.nodes.size() / 2];
        auto e = ch.eval(mid.xi, 1);
        cons[i] = e.ok ? std::hypot(e.point.x.real() - mid.x, e.point.y.real() - mid.y) : INFINITY;
        if (total.load() > cap) {
            truncated = true;
        } else {
            refine(c, 1);
        }
        total += c.nodes.size();
    });

    curve_.pieces = std::move(children);
    curve_.links = std::move(links);
    curve_.depth += 1;
    curve_.chart_steps = 1;
    curve_.bad_crossings = bad;
    curve_.truncated = curve_.truncated || truncated || total.load() > cap;
    curve_.node_count = total.load();
    curve_.push_consistency = cons.empty() ? 0.0 : *std::max_element(cons.begin(), cons.end());
    double ms = 0, mt = 0;
    for (auto& p : curve_.pieces)
        for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
            ms = std::max(ms, std::hypot(p.nodes[i + 1].x - p.nodes[i].x, p.nodes[i + 1].y - p.nodes[i].y));
            if (i > 0) mt = std::max(mt, turn_angle(p.nodes[i - 1], p.nodes[i], p.nodes[i + 1]));
        }
    curve_.max_segment_seen = ms;
    curve_.max_turn_seen = mt;
}

UnstableCurve grow_unstable_curve(const HenonSystem& sys, const SaddleData& saddle, int depth, RefineParams params) {
    if (depth < 0) throw Error(ErrorCode::argument, "depth must be >= 0");
    CurveGrower g(sys, saddle, params);
    for (int k = 0; k < depth; ++k) g.step();
    return g.current();
}

double box_edge(const UnstableChart& chart, double xi_in, double xi_out, double r, int m) {
    for (int it = 0; it < 70; ++it) {
        double mid = 0.5 * (xi_in + xi_out);
        auto e = chart.eval(mid, m);
        bool in = e.ok && std::abs(e.point.y.real()) <= r;
        (in ? xi_in : xi_out) = mid;
        if (std::abs(xi_out - xi_in) <= 1e-15 * (1 + std::abs(mid))) break;
    }
    return 0.5 * (xi_in + xi_out);
}

std::vector<BendInterval> piece_bends(const UnstableChart& chart, const CurvePiece& piece, double r) {
    std::vector<Run> runs;
    for (auto& run : inside_runs(piece.nodes, r))
        if (full_crossing(piece.nodes, run, r)) runs.push_back(run);
    std::vector<BendInterval> out;
    for (std::size_t c = 1; c < runs.size(); ++c) {
        double lo = box_edge(chart, piece.nodes[runs[c - 1].hi].xi, piece.nodes[runs[c - 1].hi + 1].xi, r, 1);
        double hi = box_edge(chart, piece.nodes[runs[c].lo].xi, piece.nodes[runs[c].lo - 1].xi, r, 1);
        out.push_back({int(c), lo, hi});
    }
    return out;
}

std::vector<BendInterval> scan_bends(const UnstableChart& chart, double r) {
    const int N = 81;
    std::vector<double> xs(N);
    std::vector<int> state(N);  // 1 inside, 0 outside, -1 failed
    auto outside = [&](double xi) {
        auto e = chart.eval(xi, 1);
        if (!e.ok) return -1;
        return std::abs(e.point.y.real()) > r ? 1 : 0;
    };
    for (int i = 0; i < N; ++i) {
        xs[i] = -1.02 * r + 2.04 * r * i / (N - 1);
        int o = outside(xs[i]);
        state[i] = o < 0 ? -1 : (o ? 0 : 1);
    }
    std::vector<BendInterval> out;
    int last_in = -1;
    for (int i = 0; i < N; ++i) {
        if (state[i] != 1) continue;
        if (last_in >= 0 && i > last_in + 1) {
            bool all_out = true;
            for (int j = last_in + 1; j < i; ++j) all_out = all_out && state[j] == 0;
            if (all_out) {
                double lo = box_edge(chart, xs[last_in], xs[last_in + 1], r, 1);
                double hi = box_edge(chart, xs[i], xs[i - 1], r, 1);
                out.push_back({int(out.size()) + 1, lo, hi});
            }
        }
        last_in = i;
    }
    return out;
}

}  // namespace henon
