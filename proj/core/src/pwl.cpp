#include "rhosi/pwl.hpp"

#include <algorithm>
#include <cmath>

namespace rhosi::pwl {

std::vector<double> geometric_breakpoints(double anchor, double ratio, int count, double lo, double hi) {
  if (!(ratio > 1.0) || count < 0 || !(hi > lo)) throw ArgumentError("invalid breakpoint specification");
  std::vector<double> b;
  if (std::isfinite(lo)) b.push_back(lo);
  if (std::isfinite(hi)) b.push_back(hi);
  for (int j = -count; j <= count; ++j) {
    const double x = anchor * std::pow(ratio, j);
    if (x > lo && x < hi) b.push_back(x);
  }
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double x : b) {
    if (out.empty() || x - out.back() > 1e-12 * std::max(1.0, std::abs(x))) out.push_back(x);
  }
  if (out.size() < 2) throw ArgumentError("breakpoint set needs at least two points");
  return out;
}

double interpolate(const Fn& f, const std::vector<double>& bps, double x) {
  x = std::clamp(x, bps.front(), bps.back());
  auto it = std::upper_bound(bps.begin(), bps.end(), x);
  size_t i = static_cast<size_t>(std::max<std::ptrdiff_t>(0, (it - bps.begin()) - 1));
  if (i + 1 >= bps.size()) i = bps.size() - 2;
  const double x0 = bps[i], x1 = bps[i + 1];
  const double y0 = f(x0), y1 = f(x1);
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

namespace {

template <class Emit>
void chords(const Fn& f, const std::vector<double>& bps, Emit emit) {
  for (size_t i = 0; i + 1 < bps.size(); ++i) {
    const double x0 = bps[i], x1 = bps[i + 1];
    const double y0 = f(x0), y1 = f(x1);
    const double slope = (y1 - y0) / (x1 - x0);
    emit(slope, y0 - slope * x0, i);
  }
}

// A bare variable, or a fresh one tied to a composite argument, so that the
// chord rows stay short.
conic::Expr argument(conic::Problem& p, const conic::Expr& x, const std::string& label) {
  if (x.blocks.empty() && x.lin.size() <= 1 && x.cst == 0.0) return x;
  const conic::Var v = p.add_var(label + ".arg");
  p.add_eq(conic::Expr(v) - x, label + ".arg");
  return conic::Expr(v);
}

}  // namespace

void add_concave_hypograph(conic::Problem& p, const conic::Expr& t, const conic::Expr& x_in, const Fn& f,
                           const std::vector<double>& bps, const std::string& label) {
  const conic::Expr x = argument(p, x_in, label);
  chords(f, bps, [&](double a, double c, size_t i) {
    p.add_geq(a * x + c - t, label + ".chord" + std::to_string(i));
  });
  p.add_geq(x - bps.front(), label + ".lo");
  p.add_geq(bps.back() - x, label + ".hi");
}

void add_convex_epigraph(conic::Problem& p, const conic::Expr& r, const conic::Expr& x_in, const Fn& f,
                         const std::vector<double>& bps, const std::string& label) {
  const conic::Expr x = argument(p, x_in, label);
  chords(f, bps, [&](double a, double c, size_t i) {
    p.add_geq(r - (a * x + c), label + ".chord" + std::to_string(i));
  });
  p.add_geq(x - bps.front(), label + ".lo");
  p.add_geq(bps.back() - x, label + ".hi");
}

}  // namespace rhosi::pwl
