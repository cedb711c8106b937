#include "ebt/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ebt {

namespace {

constexpr unsigned max_depth = 15;

} // namespace

double integrate(const std::function<double(double)> &f, double a, double b, double tol) {
    if (!(b > a)) {
        return 0.0;
    }
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, tol);
}

double integrate(const std::function<double(double, double)> &f, double ax, double bx, double ay,
                 double by, double tol) {
    if (!(bx > ax) || !(by > ay)) {
        return 0.0;
    }
    return integrate(
        [&](double x) { return integrate([&](double y) { return f(x, y); }, ay, by, tol); }, ax,
        bx, tol);
}

CellMoments1 cell_moments(const std::function<double(double)> &density, double a, double b,
                          double tol) {
    CellMoments1 out;
    out.mass = integrate(density, a, b, tol);
    if (out.mass > 0.0) {
        out.location = integrate([&](double x) { return x * density(x); }, a, b, tol) / out.mass;
    } else {
        out.mass = 0.0;
    }
    return out;
}

CellMoments2 cell_moments(const std::function<double(double, double)> &density, double ax,
                          double bx, double ay, double by, double tol) {
    CellMoments2 out;
    out.mass = integrate(density, ax, bx, ay, by, tol);
    if (out.mass > 0.0) {
        out.x = integrate([&](double x, double y) { return x * density(x, y); }, ax, bx, ay, by,
                          tol) /
                out.mass;
        out.y = integrate([&](double x, double y) { return y * density(x, y); }, ax, bx, ay, by,
                          tol) /
                out.mass;
    } else {
        out.mass = 0.0;
    }
    return out;
}

} // namespace ebt
