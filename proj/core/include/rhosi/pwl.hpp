#pragma once

#include <functional>
#include <vector>

#include "rhosi/conic.hpp"

// Piecewise-linear interpolants of scalar concave/convex functions, exact at
// their breakpoints. A concave hypograph t <= f(x) is restricted to the chord
// interpolant (which lies below f); a convex epigraph r >= f(x) to the chord
// interpolant (which lies above f). Both restrict x to the breakpoint range.
namespace rhosi::pwl {

using Fn = std::function<double(double)>;

// anchor * ratio^j for j = -count..count, clipped to [lo, hi], plus lo and hi when finite.
std::vector<double> geometric_breakpoints(double anchor, double ratio, int count, double lo, double hi);

// Chord interpolant of f through the breakpoints, evaluated at x (clamped to the range).
double interpolate(const Fn& f, const std::vector<double>& bps, double x);

void add_concave_hypograph(conic::Problem& p, const conic::Expr& t, const conic::Expr& x, const Fn& f,
                           const std::vector<double>& bps, const std::string& label = "");
void add_convex_epigraph(conic::Problem& p, const conic::Expr& r, const conic::Expr& x, const Fn& f,
                         const std::vector<double>& bps, const std::string& label = "");

}  // namespace rhosi::pwl
