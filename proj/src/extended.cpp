#include "henon/extended.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cstdint>

namespace henon {

namespace mp = boost::multiprecision;
using xreal = mp::number<mp::cpp_bin_float<40, mp::digit_base_10, void, std::int64_t, -(std::int64_t(1) << 52),
                                           (std::int64_t(1) << 52)>,
                         mp::et_off>;

namespace {

struct xc {
    xreal re, im;
};
xc operator+(const xc& a, const xc& b) { return {a.re + b.re, a.im + b.im}; }
xc operator-(const xc& a, const xc& b) { return {a.re - b.re, a.im - b.im}; }
xc operator*(const xc& a, const xc& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
xc operator/(const xc& a, const xc& b) {
    xreal den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}
xc lift(cplx c) { return {xreal(c.real()), xreal(c.imag())}; }
xreal xabs(const xc& a) { return sqrt(a.re * a.re + a.im * a.im); }

xc peval(const PolynomialSpec& p, const xc& y) {
    xc acc{0, 0};
    for (int j = p.degree() - 2; j >= 0; --j) acc = acc * y + lift(p.tail()[j]);
    xc lead = y;
    for (int j = 1; j < p.degree(); ++j) lead = lead * y;
    return lead + acc;
}

}  // namespace

PlanePoint iterate_extended(const HenonSystem& sys, const PlanePoint& z, int n) {
    xc x = lift(z.x), y = lift(z.y);
    for (int k = 0; k < n; ++k)
        for (auto it = sys.factors().rbegin(); it != sys.factors().rend(); ++it) {
            xc ny = peval(it->poly, y) - lift(it->a) * x;
            x = y;
            y = ny;
        }
    return {{x.re.convert_to<double>(), x.im.convert_to<double>()}, {y.re.convert_to<double>(), y.im.convert_to<double>()}};
}

double green_direct_extended(const HenonSystem& sys, const PlanePoint& z, int n, bool plus) {
    xc x = lift(z.x), y = lift(z.y);
    for (int k = 0; k < n; ++k) {
        if (plus) {
            for (auto it = sys.factors().rbegin(); it != sys.factors().rend(); ++it) {
                xc ny = peval(it->poly, y) - lift(it->a) * x;
                x = y;
                y = ny;
            }
        } else {
            for (auto& f : sys.factors()) {
                xc nx = (peval(f.poly, x) - y) / lift(f.a);
                y = x;
                x = nx;
            }
        }
    }
    xreal m = plus ? xabs(y) : xabs(x);
    xreal v = log(m);
    if (!plus) {
        // inverse factors have leading coefficient 1/a; add their exact geometric remainder
        xreal per = 0, D = 1;
        for (auto& f : sys.factors()) {
            D *= xreal(f.poly.degree());
            per += log(xreal(1) / xreal(std::abs(f.a))) / D;
        }
        v += per / (xreal(1) - xreal(1) / D);
    }
    for (int k = 0; k < n; ++k) v /= xreal(sys.degree());
    return v.convert_to<double>();
}

}  // namespace henon
