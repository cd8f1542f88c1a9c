#include <algorithm>
#include <cmath>

#include "henon/manifold.hpp"

namespace henon {

namespace {

PolynomialSpec real_part(const PolynomialSpec& p) {
    std::vector<cplx> q;
    for (auto c : p.tail()) q.push_back(c.real());
    return PolynomialSpec(p.degree(), q);
}

int wrap(int k, int n) { return ((k % n) + n) % n; }

}  // namespace

UnstableChart::UnstableChart(const HenonSystem& sys, const SaddleData& saddle, std::vector<int> word, int tail_len)
    : sys_(&sys),
      bs_(real_part(sys.factors().at(0).poly)),
      a_re_(sys.factors()[0].a.real()),
      a_(sys.factors()[0].a),
      real_map_(sys.single_real()),
      word_(std::move(word)) {
    if (sys.factors().size() != 1) throw Error(ErrorCode::argument, "charts need a single factor");
    const int L = int(word_.size()), K = L + tail_len;
    const int np = int(saddle.ys.size());
    if (np == 0) throw Error(ErrorCode::argument, "saddle has no orbit");
    for (int k = 1; k <= K; ++k) {
        if (k <= L) {
            sym_.push_back(word_[k - 1]);
            double r = bs_.root(word_[k - 1], 0.0);
            pin_init_.push_back(std::isfinite(r) ? r : 0.0);
        } else {
            int j = wrap(-(k - L), np);
            sym_.push_back(saddle.itinerary.symbols[j]);
            pin_init_.push_back(saddle.ys[j]);
        }
    }
    pin_ = saddle.ys[wrap(-(K + 1 - L), np)];
}

bool UnstableChart::solve(double xi, std::vector<double>& u, std::vector<double>& du) const {
    const int K = int(sym_.size());
    const double a = a_re_;
    u.assign(K + 2, 0.0);
    u[0] = xi;
    u[K + 1] = pin_;
    for (int k = 1; k <= K; ++k) u[k] = pin_init_[k - 1];

    std::vector<double> sub(K), diag(K), sup(K), rhs(K);
    auto sweeps = [&](int n) {
        for (int s = 0; s < n; ++s)
            for (int k = 1; k <= K; ++k) {
                double r = bs_.root_near(sym_[k - 1], u[k - 1] + a * u[k + 1], u[k]);
                if (!std::isfinite(r)) return false;
                u[k] = r;
            }
        return true;
    };
    auto newton = [&]() {
        for (int it = 0; it < 12; ++it) {
            double scale = 1;
            for (int k = 1; k <= K; ++k) {
                sub[k - 1] = -1.0;
                sup[k - 1] = -a;
                diag[k - 1] = bs_.derivative(u[k]);
                rhs[k - 1] = -(bs_.eval(u[k]) - u[k - 1] - a * u[k + 1]);
                scale = std::max(scale, std::abs(u[k]));
            }
            solve_tridiagonal(sub, diag, sup, rhs);
            double step = 0;
            for (int k = 1; k <= K; ++k) {
                u[k] += rhs[k - 1];
                step = std::max(step, std::abs(rhs[k - 1]));
            }
            if (!std::isfinite(step)) return false;
            if (step <= 1e-15 * scale) return true;
        }
        return false;
    };
    if (!sweeps(1)) return false;
    if (!newton()) {
        if (!sweeps(40) || !newton()) return false;
    }
    for (int k = 1; k <= K; ++k)
        if (bs_.piece_of(u[k]) != sym_[k - 1]) return false;

    for (int k = 1; k <= K; ++k) {
        sub[k - 1] = -1.0;
        sup[k - 1] = -a;
        diag[k - 1] = bs_.derivative(u[k]);
        rhs[k - 1] = k == 1 ? 1.0 : 0.0;
    }
    solve_tridiagonal(sub, diag, sup, rhs);
    du.assign(K + 2, 0.0);
    du[0] = 1.0;
    for (int k = 1; k <= K; ++k) du[k] = rhs[k - 1];
    return true;
}

bool UnstableChart::solve(cplx xi, std::vector<cplx>& u, std::vector<cplx>& du) const {
    std::vector<double> ur, dur;
    if (!solve(xi.real(), ur, dur)) return false;
    const int K = int(sym_.size());
    const auto& p = sys_->factors()[0].poly;
    const cplx a = a_;
    u.assign(ur.begin(), ur.end());
    u[0] = xi;
    std::vector<cplx> sub(K), diag(K), sup(K), rhs(K);
    bool conv = false;
    for (int it = 0; it < 40 && !conv; ++it) {
        double scale = 1;
        for (int k = 1; k <= K; ++k) {
            sub[k - 1] = -1.0;
            sup[k - 1] = -a;
            diag[k - 1] = p.derivative(u[k]);
            rhs[k - 1] = -(p.eval(u[k]) - u[k - 1] - a * u[k + 1]);
            scale = std::max(scale, std::abs(u[k]));
        }
        solve_tridiagonal(sub, diag, sup, rhs);
        double step = 0;
        for (int k = 1; k <= K; ++k) {
            u[k] += rhs[k - 1];
            step = std::max(step, std::abs(rhs[k - 1]));
        }
        if (!std::isfinite(step)) return false;
        conv = step <= 1e-15 * scale;
    }
    if (!conv) return false;
    for (int k = 1; k <= K; ++k) {
        sub[k - 1] = -1.0;
        sup[k - 1] = -a;
        diag[k - 1] = p.derivative(u[k]);
        rhs[k - 1] = k == 1 ? 1.0 : 0.0;
    }
    solve_tridiagonal(sub, diag, sup, rhs);
    du.assign(K + 2, 0.0);
    du[0] = 1.0;
    for (int k = 1; k <= K; ++k) du[k] = rhs[k - 1];
    return true;
}

namespace {

template <class T, class Chart>
UnstableChart::Sample<T> eval_impl(const Chart& ch, const HenonSystem& sys, T xi, int m) {
    UnstableChart::Sample<T> s;
    std::vector<T> u, du;
    if (!ch.solve(xi, u, du)) return s;
    const int K = int(u.size()) - 2;
    if (m <= 0) {
        int ix = 1 - m, iy = -m;
        if (ix > K) return s;
        s.point = {cplx(u[ix]), cplx(u[iy])};
        s.tangent = {cplx(du[ix]), cplx(du[iy])};
        s.ok = true;
        return s;
    }
    const auto& f = sys.factors()[0];
    cplx x = u[1], y = u[0], tx = du[1], ty = du[0];
    for (int i = 0; i < m; ++i) {
        cplx ny = f.poly.eval(y) - f.a * x;
        cplx nty = f.poly.derivative(y) * ty - f.a * tx;
        x = y;
        y = ny;
        tx = ty;
        ty = nty;
        if (!(std::abs(y) < overflow_threshold) || !(std::abs(ty) < 1e300)) return s;
    }
    if constexpr (std::is_same_v<T, double>) {
        s.point = {x.real(), y.real()};
        s.tangent = {tx.real(), ty.real()};
    } else {
        s.point = {x, y};
        s.tangent = {tx, ty};
    }
    s.ok = true;
    return s;
}

}  // namespace

UnstableChart::Sample<double> UnstableChart::eval(double xi, int m) const {
    if (!real_map_) {
        auto c = eval(cplx(xi), m);
        return {c.point, c.tangent, c.ok};
    }
    return eval_impl<double>(*this, *sys_, xi, m);
}

UnstableChart::Sample<cplx> UnstableChart::eval(cplx xi, int m) const {
    auto s = eval_impl<cplx>(*this, *sys_, xi, m);
    return {s.point, s.tangent, s.ok};
}

}  // namespace henon
