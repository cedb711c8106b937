#pragma once

#include <functional>

namespace ebt {

inline constexpr double quadrature_tol = 1e-10;

/// Adaptive Gauss-Kronrod integral of f over [a, b].
double integrate(const std::function<double(double)> &f, double a, double b,
                 double tol = quadrature_tol);

/// Iterated adaptive integral of f over [ax, bx] x [ay, by].
double integrate(const std::function<double(double, double)> &f, double ax, double bx, double ay,
                 double by, double tol = quadrature_tol);

struct CellMoments1 {
    double mass = 0.0;
    double location = 0.0; ///< barycenter, 0 when the mass is 0
};

struct CellMoments2 {
    double mass = 0.0;
    double x = 0.0;
    double y = 0.0;
};

CellMoments1 cell_moments(const std::function<double(double)> &density, double a, double b,
                          double tol = quadrature_tol);

CellMoments2 cell_moments(const std::function<double(double, double)> &density, double ax,
                          double bx, double ay, double by, double tol = quadrature_tol);

} // namespace ebt
