#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "conic_internal.hpp"
#include "rhosi/conic.hpp"

namespace rhosi::conic {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal:
      return "optimal";
    case Status::Infeasible:
      return "infeasible";
    case Status::Unbounded:
      return "unbounded";
    case Status::MaxIterations:
      return "max-iterations";
  }
  return "unknown";
}

BlockPart& Expr::part(int block) {
  for (auto& bp : blocks) {
    if (bp.block == block) return bp;
  }
  blocks.push_back(BlockPart{});
  blocks.back().block = block;
  return blocks.back();
}

Expr& Expr::add(Var v, double coef) {
  if (v.id < 0) throw ArgumentError("expression references an undefined variable");
  lin.emplace_back(v.id, coef);
  return *this;
}

Expr& Expr::add_entry(int block, int i, int j, double coef) {
  if (block < 0 || i < 0 || j < 0) throw ArgumentError("invalid PSD block entry");
  part(block).entries.emplace_back(i, j, coef);
  return *this;
}

Expr& Expr::add_quad(int block, const Vec& u, double d) {
  if (block < 0) throw ArgumentError("invalid PSD block");
  auto& bp = part(block);
  bp.u.push_back(u);
  bp.d.push_back(d);
  return *this;
}

Expr& Expr::add_trace(int block, const Mat& C) {
  if (C.rows() != C.cols()) throw ArgumentError("trace coefficient must be square");
  Mat S = 0.5 * (C + C.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  const Vec& ev = es.eigenvalues();
  double scale = ev.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    part(block);
    return *this;
  }
  for (int k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k)) > 1e-14 * scale) add_quad(block, es.eigenvectors().col(k), ev(k));
  }
  return *this;
}

Expr& Expr::operator+=(const Expr& o) {
  lin.insert(lin.end(), o.lin.begin(), o.lin.end());
  cst += o.cst;
  for (const auto& bp : o.blocks) {
    auto& mine = part(bp.block);
    mine.entries.insert(mine.entries.end(), bp.entries.begin(), bp.entries.end());
    mine.u.insert(mine.u.end(), bp.u.begin(), bp.u.end());
    mine.d.insert(mine.d.end(), bp.d.begin(), bp.d.end());
  }
  return *this;
}

Expr& Expr::operator*=(double s) {
  for (auto& t : lin) t.second *= s;
  cst *= s;
  for (auto& bp : blocks) {
    for (auto& e : bp.entries) std::get<2>(e) *= s;
    for (auto& d : bp.d) d *= s;
  }
  return *this;
}

Expr& Expr::operator-=(const Expr& o) {
  Expr neg = o;
  neg *= -1.0;
  return *this += neg;
}

Expr operator+(Expr a, const Expr& b) { return a += b; }
Expr operator-(Expr a, const Expr& b) { return a -= b; }
Expr operator-(Expr a) { return a *= -1.0; }
Expr operator*(double s, Expr a) { return a *= s; }
Expr operator*(Expr a, double s) { return a *= s; }

Mat real_embedding(const CMat& A) {
  const Eigen::Index n = A.rows();
  Mat R(2 * n, 2 * A.cols());
  R.topLeftCorner(n, A.cols()) = A.real();
  R.topRightCorner(n, A.cols()) = -A.imag();
  R.bottomLeftCorner(n, A.cols()) = A.imag();
  R.bottomRightCorner(n, A.cols()) = A.real();
  return R;
}

Expr herm_diag(const HermitianBlock& hb, int m) {
  Expr e;
  e.add_entry(hb.block, m, m, 0.5);
  e.add_entry(hb.block, m + hb.n, m + hb.n, 0.5);
  return e;
}

Expr herm_quad(const HermitianBlock& hb, const CVec& c, double scale) {
  if (c.size() != hb.n) throw ArgumentError("herm_quad dimension mismatch");
  Vec u(2 * hb.n), w(2 * hb.n);
  u << c.real(), c.imag();
  w << -c.imag(), c.real();
  Expr e;
  e.add_quad(hb.block, u, 0.5 * scale);
  e.add_quad(hb.block, w, 0.5 * scale);
  return e;
}

Expr herm_trace(const HermitianBlock& hb, const CMat& C) {
  if (C.rows() != hb.n || C.cols() != hb.n) throw ArgumentError("herm_trace dimension mismatch");
  Expr e;
  e.add_trace(hb.block, 0.5 * real_embedding(C));
  return e;
}

CMat herm_value(const HermitianBlock& hb, const Mat& X) {
  const int n = hb.n;
  Mat A = 0.5 * (X.topLeftCorner(n, n) + X.bottomRightCorner(n, n));
  Mat B = 0.5 * (X.bottomLeftCorner(n, n) - X.topRightCorner(n, n));
  CMat H(n, n);
  H.real() = 0.5 * (A + A.transpose());
  H.imag() = 0.5 * (B - B.transpose());
  return H;
}

Var Problem::add_var(const std::string& label) {
  var_nonneg_.push_back(false);
  var_labels_.push_back(label.empty() ? "x" + std::to_string(var_nonneg_.size() - 1) : label);
  return Var{static_cast<int>(var_nonneg_.size()) - 1};
}

Var Problem::add_nonneg(const std::string& label) {
  var_nonneg_.push_back(true);
  var_labels_.push_back(label.empty() ? "x" + std::to_string(var_nonneg_.size() - 1) : label);
  return Var{static_cast<int>(var_nonneg_.size()) - 1};
}

int Problem::add_psd(int n, const std::string& label) {
  if (n < 1) throw ArgumentError("PSD block dimension must be positive");
  block_dims_.push_back(n);
  block_labels_.push_back(label.empty() ? "X" + std::to_string(block_dims_.size() - 1) : label);
  return static_cast<int>(block_dims_.size()) - 1;
}

HermitianBlock Problem::add_hermitian_psd(int n, const std::string& label) {
  HermitianBlock hb;
  hb.block = add_psd(2 * n, label);
  hb.n = n;
  return hb;
}

void Problem::check_expr(const Expr& e) const {
  for (const auto& t : e.lin) {
    if (t.first < 0 || t.first >= num_vars()) throw ArgumentError("expression references an unknown variable");
    if (!std::isfinite(t.second)) throw ArgumentError("non-finite coefficient");
  }
  if (!std::isfinite(e.cst)) throw ArgumentError("non-finite constant");
  for (const auto& bp : e.blocks) {
    if (bp.block < 0 || bp.block >= num_blocks()) throw ArgumentError("expression references an unknown PSD block");
    const int n = block_dims_[bp.block];
    for (const auto& [i, j, v] : bp.entries) {
      if (i >= n || j >= n) throw ArgumentError("PSD entry outside its block");
      if (!std::isfinite(v)) throw ArgumentError("non-finite coefficient");
    }
    for (const auto& u : bp.u) {
      if (u.size() != n) throw ArgumentError("low-rank factor dimension mismatch");
      if (!u.allFinite()) throw ArgumentError("non-finite coefficient");
    }
  }
}

void Problem::minimize(const Expr& objective) {
  check_expr(objective);
  objective_ = objective;
  has_objective_ = true;
}

void Problem::add_eq(const Expr& e, const std::string& label) {
  check_expr(e);
  constraints_.push_back({Kind::Eq, {e}, label});
}

void Problem::add_geq(const Expr& e, const std::string& label) {
  check_expr(e);
  constraints_.push_back({Kind::Geq, {e}, label});
}

void Problem::add_soc(const Expr& t, const std::vector<Expr>& xs, const std::string& label) {
  check_expr(t);
  std::vector<Expr> all{t};
  for (const auto& x : xs) {
    check_expr(x);
    all.push_back(x);
  }
  constraints_.push_back({Kind::Soc, std::move(all), label});
}

void Problem::add_rsoc(const Expr& u, const Expr& v, const std::vector<Expr>& xs, const std::string& label) {
  std::vector<Expr> comps;
  comps.reserve(xs.size() + 1);
  for (const auto& x : xs) comps.push_back(2.0 * x);
  comps.push_back(u - v);
  add_soc(u + v, comps, label);
}

int Problem::num_equalities() const {
  return static_cast<int>(std::count_if(constraints_.begin(), constraints_.end(),
                                        [](const Constraint& c) { return c.kind == Kind::Eq; }));
}
int Problem::num_inequalities() const {
  return static_cast<int>(std::count_if(constraints_.begin(), constraints_.end(),
                                        [](const Constraint& c) { return c.kind == Kind::Geq; }));
}
int Problem::num_socs() const {
  return static_cast<int>(std::count_if(constraints_.begin(), constraints_.end(),
                                        [](const Constraint& c) { return c.kind == Kind::Soc; }));
}

namespace detail {

namespace {

struct RowBuilder {
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::map<std::pair<int, int>, double>> sparse;  // per block, per current row
};

}  // namespace

StandardForm compile(const Problem& p) {
  if (!p.has_objective()) throw ArgumentError("conic problem has no objective");
  StandardForm sf;
  const int nv = p.num_vars();
  sf.var_col.assign(nv, -1);
  int nfree = 0, nnonneg = 0, ngeq = 0, nsoc_total = 0;
  for (int i = 0; i < nv; ++i) (p.var_is_nonneg(i) ? nnonneg : nfree)++;
  for (const auto& c : p.constraints()) {
    if (c.kind == Problem::Kind::Geq) ++ngeq;
    if (c.kind == Problem::Kind::Soc) {
      sf.soc.push_back(static_cast<int>(c.exprs.size()));
      nsoc_total += static_cast<int>(c.exprs.size());
    }
  }
  sf.nf = nfree;
  sf.nl = nnonneg + ngeq;
  sf.nvec = sf.nf + sf.nl + nsoc_total;
  sf.col_labels.resize(sf.nvec);
  int fcol = 0, lcol = sf.nf;
  for (int i = 0; i < nv; ++i) {
    sf.var_col[i] = p.var_is_nonneg(i) ? lcol++ : fcol++;
    sf.col_labels[sf.var_col[i]] = p.var_label(i);
  }
  for (int b = 0; b < p.num_blocks(); ++b) sf.sdp.push_back(p.block_dim(b));
  sf.sdp_rows.resize(sf.sdp.size());
  sf.C.assign(sf.sdp.size(), Mat());
  for (size_t b = 0; b < sf.sdp.size(); ++b) sf.C[b] = Mat::Zero(sf.sdp[b], sf.sdp[b]);

  int rows = 0;
  for (const auto& c : p.constraints()) rows += static_cast<int>(c.exprs.size());
  sf.m = rows;
  sf.b = Vec::Zero(rows);
  sf.c = Vec::Zero(sf.nvec);
  sf.row_labels.resize(rows);

  std::vector<Eigen::Triplet<double>> trip;
  auto emit_block_parts = [&](const Expr& e, int row) {
    for (const auto& bp : e.blocks) {
      SdpRowTerm term;
      term.row = row;
      std::map<std::pair<int, int>, double> acc;
      for (const auto& [i, j, v] : bp.entries) {
        const int a = std::max(i, j), bb = std::min(i, j);
        acc[{a, bb}] += (a == bb) ? v : 0.5 * v;
      }
      for (const auto& [ij, v] : acc) {
        if (v != 0.0) term.sparse.emplace_back(ij.first, ij.second, v);
      }
      const int n = sf.sdp[bp.block];
      term.U = Mat(n, static_cast<Eigen::Index>(bp.u.size()));
      term.d = Vec(static_cast<Eigen::Index>(bp.u.size()));
      for (size_t k = 0; k < bp.u.size(); ++k) {
        term.U.col(k) = bp.u[k];
        term.d(k) = bp.d[k];
      }
      if (!term.sparse.empty() || term.U.cols() > 0) sf.sdp_rows[bp.block].push_back(std::move(term));
    }
  };
  auto emit_linear = [&](const Expr& e, int row) {
    std::map<int, double> acc;
    for (const auto& [id, v] : e.lin) acc[sf.var_col[id]] += v;
    for (const auto& [col, v] : acc) {
      if (v != 0.0) trip.emplace_back(row, col, v);
    }
    emit_block_parts(e, row);
    sf.b(row) = -e.cst;
  };

  int row = 0;
  int slack_l = sf.nf + nnonneg;
  int slack_s = sf.nf + sf.nl;
  int ci = 0;
  for (const auto& c : p.constraints()) {
    const std::string base = c.label.empty() ? "c" + std::to_string(ci) : c.label;
    if (c.kind == Problem::Kind::Eq) {
      emit_linear(c.exprs[0], row);
      sf.row_labels[row] = base;
      ++row;
    } else if (c.kind == Problem::Kind::Geq) {
      emit_linear(c.exprs[0], row);
      trip.emplace_back(row, slack_l, -1.0);
      sf.col_labels[slack_l] = "s(" + base + ")";
      sf.row_labels[row] = base;
      ++slack_l;
      ++row;
    } else {
      for (size_t k = 0; k < c.exprs.size(); ++k) {
        emit_linear(c.exprs[k], row);
        trip.emplace_back(row, slack_s, -1.0);
        sf.col_labels[slack_s] = "q(" + base + ")[" + std::to_string(k) + "]";
        sf.row_labels[row] = base + "[" + std::to_string(k) + "]";
        ++slack_s;
        ++row;
      }
    }
    ++ci;
  }
  sf.A.resize(sf.m, sf.nvec);
  sf.A.setFromTriplets(trip.begin(), trip.end());
  sf.A.makeCompressed();

  const Expr& obj = p.objective();
  for (const auto& [id, v] : obj.lin) sf.c(sf.var_col[id]) += v;
  sf.c0 = obj.cst;
  for (const auto& bp : obj.blocks) {
    Mat& C = sf.C[bp.block];
    for (const auto& [i, j, v] : bp.entries) {
      if (i == j) {
        C(i, i) += v;
      } else {
        C(i, j) += 0.5 * v;
        C(j, i) += 0.5 * v;
      }
    }
    for (size_t k = 0; k < bp.u.size(); ++k) C += bp.d[k] * bp.u[k] * bp.u[k].transpose();
  }
  return sf;
}

}  // namespace detail

std::string Problem::dump() const {
  const auto sf = detail::compile(*this);
  std::ostringstream os;
  os.precision(17);
  os << "conic-standard-form 1\n";
  os << "rows " << sf.m << "\n";
  os << "cones free " << sf.nf << " lp " << sf.nl << " soc " << sf.soc.size();
  for (int s : sf.soc) os << " " << s;
  os << " sdp " << sf.sdp.size();
  for (int s : sf.sdp) os << " " << s;
  os << "\n";
  os << "objective-constant " << sf.c0 << "\n";
  for (int j = 0; j < sf.nvec; ++j) {
    if (sf.c(j) != 0.0) os << "c " << j << " " << sf.c(j) << "\n";
  }
  for (size_t b = 0; b < sf.C.size(); ++b) {
    for (int i = 0; i < sf.sdp[b]; ++i) {
      for (int j = 0; j <= i; ++j) {
        if (sf.C[b](i, j) != 0.0) os << "C " << b << " " << i << " " << j << " " << sf.C[b](i, j) << "\n";
      }
    }
  }
  for (int j = 0; j < sf.nvec; ++j) {
    for (detail::SpMat::InnerIterator it(sf.A, j); it; ++it) {
      os << "A " << it.row() << " " << j << " " << it.value() << "\n";
    }
  }
  for (size_t b = 0; b < sf.sdp_rows.size(); ++b) {
    for (const auto& t : sf.sdp_rows[b]) {
      Mat full = t.U * t.d.asDiagonal() * t.U.transpose();
      for (const auto& [i, j, v] : t.sparse) {
        full(i, j) += v;
        if (i != j) full(j, i) += v;
      }
      for (int i = 0; i < sf.sdp[b]; ++i) {
        for (int j = 0; j <= i; ++j) {
          if (full(i, j) != 0.0) os << "S " << t.row << " " << b << " " << i << " " << j << " " << full(i, j) << "\n";
        }
      }
    }
  }
  for (int i = 0; i < sf.m; ++i) os << "b " << i << " " << sf.b(i) << " # " << sf.row_labels[i] << "\n";
  for (int j = 0; j < sf.nvec; ++j) os << "col " << j << " " << sf.col_labels[j] << "\n";
  return os.str();
}

bool Solution::usable(double tol) const {
  if (status == Status::Optimal) return true;
  if (status != Status::MaxIterations) return false;
  return primal_residual <= tol && dual_residual <= tol && gap <= tol;
}

double Solution::eval(const Expr& e) const {
  double v = e.cst;
  for (const auto& [id, c] : e.lin) v += c * x.at(id);
  for (const auto& bp : e.blocks) {
    const Mat& X = blocks.at(bp.block);
    for (const auto& [i, j, c] : bp.entries) v += c * X(i, j);
    for (size_t k = 0; k < bp.u.size(); ++k) v += bp.d[k] * bp.u[k].dot(X * bp.u[k]);
  }
  return v;
}

RankOne extract_rank_one(const CMat& Xin) {
  RankOne r;
  const Eigen::Index n = Xin.rows();
  if (n == 0) return r;
  CMat X = 0.5 * (Xin + Xin.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(X);
  const Vec& ev = es.eigenvalues();
  const double l1 = ev(n - 1);
  r.vec = CVec::Zero(n);
  if (!(l1 > 0.0)) return r;
  r.lambda1 = l1;
  const double l2 = n > 1 ? std::max(0.0, ev(n - 2)) : 0.0;
  r.residual = l2 / l1;
  CVec v = es.eigenvectors().col(n - 1) * std::sqrt(l1);
  const double vmax = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(v(i)) > 1e-12 * vmax) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = std::abs(v(i));
      break;
    }
  }
  r.vec = v;
  return r;
}

RankOne extract_rank_one(const Mat& X) { return extract_rank_one(CMat(X.cast<cd>())); }

}  // namespace rhosi::conic
