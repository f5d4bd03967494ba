#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "conic_internal.hpp"
#include "rhosi/conic.hpp"

namespace rhosi::conic {

namespace {

using detail::SdpRowTerm;
using detail::SpMat;
using detail::StandardForm;

// Cone part of a primal or dual point: LP + SOC entries, then PSD blocks.
struct ConeVec {
  Vec v;
  std::vector<Mat> S;
};

double dot(const ConeVec& a, const ConeVec& b) {
  double s = a.v.dot(b.v);
  for (size_t k = 0; k < a.S.size(); ++k) s += a.S[k].cwiseProduct(b.S[k]).sum();
  return s;
}

void axpy(double a, const ConeVec& x, ConeVec& y) {
  y.v += a * x.v;
  for (size_t k = 0; k < x.S.size(); ++k) y.S[k] += a * x.S[k];
}

ConeVec scaled(const ConeVec& x, double a) {
  ConeVec r = x;
  r.v *= a;
  for (auto& S : r.S) S *= a;
  return r;
}

double sdp_inner(const SdpRowTerm& t, const Mat& Y) {
  double s = 0.0;
  for (const auto& [i, j, v] : t.sparse) s += (i == j) ? v * Y(i, i) : v * (Y(i, j) + Y(j, i));
  for (Eigen::Index k = 0; k < t.U.cols(); ++k) s += t.d(k) * t.U.col(k).dot(Y * t.U.col(k));
  return s;
}

void sdp_accumulate(const SdpRowTerm& t, double y, Mat& S) {
  if (y == 0.0) return;
  for (const auto& [i, j, v] : t.sparse) {
    S(i, j) += y * v;
    if (i != j) S(j, i) += y * v;
  }
  if (t.U.cols() > 0) S.noalias() += t.U * (y * t.d).asDiagonal() * t.U.transpose();
}

struct SocScale {
  double eta = 1.0;
  Vec w;  // hyperbolic unit vector, w0^2 - |w1|^2 = 1
};

struct SdpScale {
  Mat G;
  Mat Ginv;
  Vec lam;
  Mat Ws;  // G G^T
};

class Solver {
 public:
  Solver(StandardForm sf, const SolverOptions& opt) : sf_(std::move(sf)), opt_(opt) {}
  Solution run();

 private:
  int ncv() const { return sf_.nvec - sf_.nf; }
  ConeVec zero_cone() const {
    ConeVec r;
    r.v = Vec::Zero(ncv());
    for (int n : sf_.sdp) r.S.push_back(Mat::Zero(n, n));
    return r;
  }
  ConeVec identity_cone() const {
    ConeVec r = zero_cone();
    r.v.head(sf_.nl).setOnes();
    int off = sf_.nl;
    for (int s : sf_.soc) {
      r.v(off) = 1.0;
      off += s;
    }
    for (auto& S : r.S) S.setIdentity();
    return r;
  }
  int degree() const {
    int nu = sf_.nl + static_cast<int>(sf_.soc.size());
    for (int n : sf_.sdp) nu += n;
    return nu;
  }

  Vec apply_A(const Vec& xf, const ConeVec& xk) const;
  void apply_AT(const Vec& y, Vec& f, ConeVec& k) const;
  double cdot(const Vec& xf, const ConeVec& xk) const;

  void scale_data();
  bool compute_scaling(const ConeVec& x, const ConeVec& z);
  ConeVec apply_W(const ConeVec& u) const;
  ConeVec apply_WinvT(const ConeVec& u) const;
  ConeVec apply_WT(const ConeVec& u) const;
  ConeVec apply_H(const ConeVec& u) const { return apply_WT(apply_W(u)); }
  ConeVec jprod(const ConeVec& a, const ConeVec& b) const;
  ConeVec jdiv_lambda(const ConeVec& r) const;
  double max_step(const ConeVec& d) const;

  bool factor();
  void solve_kkt(const Vec& ry, const Vec& rf, Vec& dy, Vec& dxf) const;

  StandardForm sf_;
  SolverOptions opt_;
  SpMat Af_, Ak_, AkT_, AfT_;
  Vec row_scale_;
  double obj_scale_ = 1.0;

  Vec lp_w_;
  std::vector<SocScale> soc_;
  std::vector<SdpScale> sdp_;
  ConeVec lambda_;

  SpMat kkt_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  Vec reg_y_vec_;
  double reg_x_ = 0.0;
  bool analyzed_ = false;
  Eigen::Index kkt_nnz_ = -1;
};

void Solver::scale_data() {
  row_scale_ = Vec::Ones(sf_.m);
  Vec nrm2 = Vec::Zero(sf_.m);
  for (int j = 0; j < sf_.nvec; ++j) {
    for (SpMat::InnerIterator it(sf_.A, j); it; ++it) nrm2(it.row()) += it.value() * it.value();
  }
  for (const auto& rows : sf_.sdp_rows) {
    for (const auto& t : rows) {
      double s = 0.0;
      for (const auto& [i, j, v] : t.sparse) s += (i == j ? 1.0 : 2.0) * v * v;
      if (t.U.cols() > 0) {
        Mat G = t.U.transpose() * t.U;
        for (Eigen::Index a = 0; a < G.rows(); ++a)
          for (Eigen::Index b = 0; b < G.cols(); ++b) s += t.d(a) * t.d(b) * G(a, b) * G(a, b);
      }
      nrm2(t.row) += std::max(0.0, s);
    }
  }
  for (int i = 0; i < sf_.m; ++i) {
    if (nrm2(i) > 0.0) row_scale_(i) = 1.0 / std::sqrt(nrm2(i));
  }
  sf_.A = row_scale_.asDiagonal() * sf_.A;
  sf_.b = sf_.b.cwiseProduct(row_scale_);
  for (auto& rows : sf_.sdp_rows) {
    for (auto& t : rows) {
      const double r = row_scale_(t.row);
      for (auto& e : t.sparse) std::get<2>(e) *= r;
      t.d *= r;
    }
  }
  double cmax = sf_.c.size() ? sf_.c.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& C : sf_.C) cmax = std::max(cmax, C.size() ? C.cwiseAbs().maxCoeff() : 0.0);
  obj_scale_ = cmax > 0.0 ? cmax : 1.0;
  sf_.c /= obj_scale_;
  for (auto& C : sf_.C) C /= obj_scale_;

  Af_ = sf_.A.leftCols(sf_.nf);
  Ak_ = sf_.A.rightCols(ncv());
  AkT_ = Ak_.transpose();
  AfT_ = Af_.transpose();
}

Vec Solver::apply_A(const Vec& xf, const ConeVec& xk) const {
  Vec r = Ak_ * xk.v;
  if (sf_.nf > 0) r += Af_ * xf;
  for (size_t b = 0; b < sf_.sdp.size(); ++b) {
    for (const auto& t : sf_.sdp_rows[b]) r(t.row) += sdp_inner(t, xk.S[b]);
  }
  return r;
}

void Solver::apply_AT(const Vec& y, Vec& f, ConeVec& k) const {
  f = AfT_ * y;
  k.v = AkT_ * y;
  k.S.resize(sf_.sdp.size());
  for (size_t b = 0; b < sf_.sdp.size(); ++b) {
    k.S[b] = Mat::Zero(sf_.sdp[b], sf_.sdp[b]);
    for (const auto& t : sf_.sdp_rows[b]) sdp_accumulate(t, y(t.row), k.S[b]);
  }
}

double Solver::cdot(const Vec& xf, const ConeVec& xk) const {
  double s = sf_.c.head(sf_.nf).dot(xf) + sf_.c.tail(ncv()).dot(xk.v);
  for (size_t b = 0; b < sf_.sdp.size(); ++b) s += sf_.C[b].cwiseProduct(xk.S[b]).sum();
  return s;
}

bool Solver::compute_scaling(const ConeVec& x, const ConeVec& z) {
  lambda_ = zero_cone();
  lp_w_.resize(sf_.nl);
  for (int i = 0; i < sf_.nl; ++i) {
    if (!(x.v(i) > 0.0) || !(z.v(i) > 0.0)) return false;
    lp_w_(i) = std::sqrt(x.v(i) / z.v(i));
    lambda_.v(i) = std::sqrt(x.v(i) * z.v(i));
  }
  soc_.assign(sf_.soc.size(), SocScale{});
  int off = sf_.nl;
  for (size_t k = 0; k < sf_.soc.size(); ++k) {
    const int n = sf_.soc[k];
    Vec s = x.v.segment(off, n), zz = z.v.segment(off, n);
    const double sJs = s(0) * s(0) - s.tail(n - 1).squaredNorm();
    const double zJz = zz(0) * zz(0) - zz.tail(n - 1).squaredNorm();
    if (!(sJs > 0.0) || !(zJz > 0.0) || s(0) <= 0.0 || zz(0) <= 0.0) return false;
    Vec sb = s / std::sqrt(sJs), zb = zz / std::sqrt(zJz);
    const double gamma = std::sqrt(std::max(0.5 * (1.0 + sb.dot(zb)), 1e-300));
    Vec w(n);
    w(0) = (sb(0) + zb(0)) / (2.0 * gamma);
    w.tail(n - 1) = (sb.tail(n - 1) - zb.tail(n - 1)) / (2.0 * gamma);
    soc_[k].eta = std::pow(sJs / zJz, 0.25);
    soc_[k].w = w;
    off += n;
  }
  sdp_.assign(sf_.sdp.size(), SdpScale{});
  for (size_t b = 0; b < sf_.sdp.size(); ++b) {
    Eigen::LLT<Mat> lx(x.S[b]), lz(z.S[b]);
    if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    Mat L = lx.matrixL(), R = lz.matrixL();
    Mat B = R.transpose() * L;
    Eigen::SelfAdjointEigenSolver<Mat> es(B.transpose() * B);
    Vec sig2 = es.eigenvalues();
    if (!(sig2.minCoeff() > 0.0)) return false;
    Vec sig = sig2.cwiseSqrt();
    const Mat& V = es.eigenvectors();
    Vec isq = sig.cwiseSqrt().cwiseInverse();
    SdpScale& sc = sdp_[b];
    sc.G = L * V * isq.asDiagonal();
    Mat Linv = lx.matrixL().solve(Mat::Identity(L.rows(), L.cols()));
    sc.Ginv = sig.cwiseSqrt().asDiagonal() * V.transpose() * Linv;
    sc.lam = sig;
    sc.Ws = sc.G * sc.G.transpose();
    lambda_.S[b] = sig.asDiagonal();
  }
  // SOC lambda = W z
  off = sf_.nl;
  for (size_t k = 0; k < sf_.soc.size(); ++k) {
    const int n = sf_.soc[k];
    const Vec& w = soc_[k].w;
    Vec zz = z.v.segment(off, n);
    const double t = w.tail(n - 1).dot(zz.tail(n - 1));
    Vec l(n);
    l(0) = w(0) * zz(0) + t;
    l.tail(n - 1) = zz(0) * w.tail(n - 1) + zz.tail(n - 1) + (t / (1.0 + w(0))) * w.tail(n - 1);
    lambda_.v.segment(off, n) = soc_[k].eta * l;
    off += n;
  }
  return true;
}

ConeVec Solver::apply_W(const ConeVec& u) const {
  ConeVec r;
  r.v.resize(u.v.size());
  r.v.head(sf_.nl) = lp_w_.cwiseProduct(u.v.head(sf_.nl));
  int off = sf_.nl;
  for (size_t k = 0; k < sf_.soc.size(); ++k) {
    const int n = sf_.soc[k];
    const Vec& w = soc_[k].w;
    auto uu = u.v.segment(off, n);
    const double t = w.tail(n - 1).dot(uu.tail(n - 1));
    r.v(off) = soc_[k].eta * (w(0) * uu(0) + t);
    r.v.segment(off + 1, n - 1) =
        soc_[k].eta * (uu(0) * w.tail(n - 1) + uu.tail(n - 1) + (t / (1.0 + w(0))) * w.tail(n - 1));
    off += n;
  }
  r.S.resize(u.S.size());
  for (size_t b = 0; b < u.S.size(); ++b) r.S[b] = sdp_[b].G.transpose() * u.S[b] * sdp_[b].G;
  return r;
}

ConeVec Solver::apply_WT(const ConeVec& u) const {
  ConeVec r;
  r.v.resize(u.v.size());
  r.v.head(sf_.nl) = lp_w_.cwiseProduct(u.v.head(sf_.nl));
  int off = sf_.nl;
  for (size_t k = 0; k < sf_.soc.size(); ++k) {
    const int n = sf_.soc[k];
    const Vec& w = soc_[k].w;
    auto uu = u.v.segment(off, n);
    const double t = w.tail(n - 1).dot(uu.tail(n - 1));
    r.v(off) = soc_[k].eta * (w(0) * uu(0) + t);
    r.v.segment(off + 1, n - 1) =
        soc_[k].eta * (uu(0) * w.tail(n - 1) + uu.tail(n - 1) + (t / (1.0 + w(0))) * w.tail(n - 1));
    off += n;
  }
  r.S.resize(u.S.size());
  for (size_t b = 0; b < u.S.size(); ++b) r.S[b] = sdp_[b].G * u.S[b] * sdp_[b].G.transpose();
  return r;
}

ConeVec Solver::apply_WinvT(const ConeVec& u) const {
  ConeVec r;
  r.v.resize(u.v.size());
  r.v.head(sf_.nl) = u.v.head(sf_.nl).cwiseQuotient(lp_w_);
  int off = sf_.nl;
  for (size_t k = 0; k < sf_.soc.size(); ++k) {
    const int n = sf_.soc[k];
    const Vec& w = soc_[k].w;
    auto uu = u.v.segment(off, n);
    const double t = w.tail(n - 1).dot(uu.tail(n - 1));
    r.v(off) = (w(0) * uu(0) - t) / soc_[k].eta;
    r.v.segment(off + 1, n - 1) =
        (-uu(0) * w.tail(n - 1) + uu.tail(n - 1) + (t / (1.0 + w(0))) * w.tail(n - 1)) / soc_[k].eta;
    off += n;
  }
  r.S.resize(u.S.size());
  for (size_t b = 0; b < u.S.size(); ++b) r.S[b] = sdp_[b].Ginv * u.S[b] * sdp_[b].Ginv.transpose();
  return r;
}

ConeVec Solver::jprod(const ConeVec& a, const ConeVec& b) const {
  ConeVec r;
  r.v.resize(a.v.size());
  r.v.head(sf_.nl) = a.v.head(sf_.nl).cwiseProduct(b.v.head(sf_.nl));
  int off = sf_.nl;
  for (int n : sf_.soc) {
    auto x = a.v.segment(off, n);
    auto y = b.v.segment(off, n);
    r.v(off) = x.dot(y);
    r.v.segment(off + 1, n - 1) = x(0) * y.tail(n - 1) + y(0) * x.tail(n - 1);
    off += n;
  }
  r.S.resize(a.S.size());
  for (size_t k = 0; k < a.S.size(); ++k) r.S[k] = 0.5 * (a.S[k] * b.S[k] + b.S[k] * a.S[k]);
  return r;
}

ConeVec Solver::jdiv_lambda(const ConeVec& rr) const {
  ConeVec q;
  q.v.resize(rr.v.size());
  q.v.head(sf_.nl) = rr.v.head(sf_.nl).cwiseQuotient(lambda_.v.head(sf_.nl));
  int off = sf_.nl;
  for (int n : sf_.soc) {
    auto l = lambda_.v.segment(off, n);
    auto r = rr.v.segment(off, n);
    const double det = l(0) * l(0) - l.tail(n - 1).squaredNorm();
    const double q0 = (l(0) * r(0) - l.tail(n - 1).dot(r.tail(n - 1))) / det;
    q.v(off) = q0;
    q.v.segment(off + 1, n - 1) = (r.tail(n - 1) - q0 * l.tail(n - 1)) / l(0);
    off += n;
  }
  q.S.resize(rr.S.size());
  for (size_t b = 0; b < rr.S.size(); ++b) {
    const Vec& s = sdp_[b].lam;
    const Eigen::Index n = s.size();
    q.S[b].resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) q.S[b](i, j) = 2.0 * rr.S[b](i, j) / (s(i) + s(j));
  }
  return q;
}

double Solver::max_step(const ConeVec& d) const {
  double amax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sf_.nl; ++i) {
    if (d.v(i) < 0.0) amax = std::min(amax, -lambda_.v(i) / d.v(i));
  }
  int off = sf_.nl;
  for (int n : sf_.soc) {
    auto u = lambda_.v.segment(off, n);
    auto du = d.v.segment(off, n);
    const double a = du(0) * du(0) - du.tail(n - 1).squaredNorm();
    const double b = u(0) * du(0) - u.tail(n - 1).dot(du.tail(n - 1));
    const double c = u(0) * u(0) - u.tail(n - 1).squaredNorm();
    double root = std::numeric_limits<double>::infinity();
    const double scale = std::max({std::abs(a), std::abs(b), c});
    if (std::abs(a) <= 1e-14 * scale) {
      if (b < 0.0) root = -c / (2.0 * b);
    } else {
      const double disc = b * b - a * c;
      if (a < 0.0) {
        root = (b + std::sqrt(std::max(disc, 0.0))) / (-a);
      } else if (b < 0.0 && disc >= 0.0) {
        const double sq = std::sqrt(disc);
        root = c / (-b + sq);  // smaller root of a t^2 + 2 b t + c
      }
    }
    if (du(0) < 0.0) root = std::min(root, -u(0) / du(0));
    amax = std::min(amax, root);
    off += n;
  }
  for (size_t b = 0; b < d.S.size(); ++b) {
    Vec isq = sdp_[b].lam.cwiseSqrt().cwiseInverse();
    Mat T = isq.asDiagonal() * d.S[b] * isq.asDiagonal();
    T = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(T, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin < 0.0) amax = std::min(amax, -1.0 / lmin);
  }
  return amax;
}

bool Solver::factor() {
  const int m = sf_.m, nf = sf_.nf;
  std::vector<Eigen::Triplet<double>> trip;
  // LP and SOC scaling as a block-diagonal sparse matrix
  std::vector<Eigen::Triplet<double>> ht;
  for (int i = 0; i < sf_.nl; ++i) ht.emplace_back(i, i, lp_w_(i) * lp_w_(i));
  int off = sf_.nl;
  for (size_t k = 0; k < sf_.soc.size(); ++k) {
    const int n = sf_.soc[k];
    Mat Wb(n, n);
    const Vec& w = soc_[k].w;
    Wb(0, 0) = w(0);
    Wb.block(0, 1, 1, n - 1) = w.tail(n - 1).transpose();
    Wb.block(1, 0, n - 1, 1) = w.tail(n - 1);
    Wb.block(1, 1, n - 1, n - 1) =
        Mat::Identity(n - 1, n - 1) + w.tail(n - 1) * w.tail(n - 1).transpose() / (1.0 + w(0));
    Mat H = soc_[k].eta * soc_[k].eta * Wb * Wb;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ht.emplace_back(off + i, off + j, H(i, j));
    off += n;
  }
  SpMat Hs(ncv(), ncv());
  Hs.setFromTriplets(ht.begin(), ht.end());
  SpMat M = Ak_ * Hs * AkT_;
  double dmax = 1.0;
  for (int j = 0; j < M.outerSize(); ++j) {
    for (SpMat::InnerIterator it(M, j); it; ++it) {
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      if (it.row() == it.col()) dmax = std::max(dmax, it.value());
    }
  }
  // PSD blocks: M_ij = <A_i, W A_j W>
  for (size_t b = 0; b < sf_.sdp.size(); ++b) {
    const auto& rows = sf_.sdp_rows[b];
    if (rows.empty()) continue;
    const Mat& W = sdp_[b].Ws;
    const int n = sf_.sdp[b];
    const int R = static_cast<int>(rows.size());
    Mat Mb = Mat::Zero(R, R);
    int ntot = 0;
    for (const auto& t : rows) ntot += static_cast<int>(t.U.cols());
    Mat U(n, ntot);
    Vec d(ntot);
    std::vector<int> owner(ntot);
    int c = 0;
    for (int r = 0; r < R; ++r) {
      for (Eigen::Index k = 0; k < rows[r].U.cols(); ++k) {
        U.col(c) = rows[r].U.col(k);
        d(c) = rows[r].d(k);
        owner[c] = r;
        ++c;
      }
    }
    if (ntot > 0) {
      Mat V = W * U;
      Mat G = U.transpose() * V;
      for (int a = 0; a < ntot; ++a)
        for (int bb = 0; bb < ntot; ++bb) Mb(owner[a], owner[bb]) += d(a) * d(bb) * G(a, bb) * G(a, bb);
      for (int r = 0; r < R; ++r) {
        const auto& sp = rows[r].sparse;
        if (sp.empty()) continue;
        for (int a = 0; a < ntot; ++a) {
          double s = 0.0;
          for (const auto& [i, j, v] : sp) s += (i == j ? 1.0 : 2.0) * v * V(i, a) * V(j, a);
          s *= d(a);
          Mb(r, owner[a]) += s;
          Mb(owner[a], r) += s;
        }
      }
    }
    for (int r1 = 0; r1 < R; ++r1) {
      const auto& s1 = rows[r1].sparse;
      if (s1.empty()) continue;
      for (int r2 = r1; r2 < R; ++r2) {
        const auto& s2 = rows[r2].sparse;
        if (s2.empty()) continue;
        double s = 0.0;
        for (const auto& [p, q, v1] : s1) {
          for (const auto& [r, t, v2] : s2) {
            // <E_pq sym, W E_rt sym W>
            double term = W(p, r) * W(t, q) + ((r != t) ? W(p, t) * W(r, q) : 0.0);
            if (p != q) term += W(q, r) * W(t, p) + ((r != t) ? W(q, t) * W(r, p) : 0.0);
            s += v1 * v2 * term;
          }
        }
        Mb(r1, r2) += s;
        if (r2 != r1) Mb(r2, r1) += s;
      }
    }
    for (int r1 = 0; r1 < R; ++r1) {
      for (int r2 = 0; r2 < R; ++r2) trip.emplace_back(rows[r1].row, rows[r2].row, Mb(r1, r2));
      dmax = std::max(dmax, Mb(r1, r1));
    }
  }
  (void)dmax;
  {
    Vec diag = Vec::Zero(m);
    for (const auto& t : trip) {
      if (t.row() == t.col()) diag(t.row()) += t.value();
    }
    reg_y_vec_ = 1e-12 * diag.cwiseAbs() + Vec::Constant(m, 1e-14);
  }
  reg_x_ = 1e-11;
  for (int i = 0; i < m; ++i) trip.emplace_back(i, i, reg_y_vec_(i));
  for (int j = 0; j < Af_.outerSize(); ++j) {
    for (SpMat::InnerIterator it(Af_, j); it; ++it) {
      trip.emplace_back(static_cast<int>(it.row()), m + j, it.value());
      trip.emplace_back(m + j, static_cast<int>(it.row()), it.value());
    }
  }
  for (int j = 0; j < nf; ++j) trip.emplace_back(m + j, m + j, -reg_x_);
  kkt_.resize(m + nf, m + nf);
  kkt_.setFromTriplets(trip.begin(), trip.end());
  kkt_.makeCompressed();
  if (!analyzed_ || kkt_.nonZeros() != kkt_nnz_) {
    ldlt_.analyzePattern(kkt_);
    analyzed_ = true;
    kkt_nnz_ = kkt_.nonZeros();
  }
  ldlt_.factorize(kkt_);
  return ldlt_.info() == Eigen::Success;
}

void Solver::solve_kkt(const Vec& ry, const Vec& rf, Vec& dy, Vec& dxf) const {
  const int m = sf_.m, nf = sf_.nf;
  Vec rhs(m + nf);
  rhs << ry, rf;
  Vec sol = ldlt_.solve(rhs);
  auto true_mul = [&](const Vec& v) {
    Vec r = kkt_ * v;
    r.head(m) -= reg_y_vec_.cwiseProduct(v.head(m));
    r.tail(nf) += reg_x_ * v.tail(nf);
    return r;
  };
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 10; ++it) {
    Vec res = rhs - true_mul(sol);
    const double rn = res.norm();
    if (!(rn < prev) || rn <= 1e-15 * (1.0 + rhs.norm())) break;
    prev = rn;
    sol += ldlt_.solve(res);
  }
  dy = sol.head(m);
  dxf = sol.tail(nf);
}

Solution Solver::run() {
  scale_data();
  const int m = sf_.m, nf = sf_.nf;
  const double nu = degree();
  Vec xf = Vec::Zero(nf);
  ConeVec xk = identity_cone();
  ConeVec zk = identity_cone();
  Vec y = Vec::Zero(m);
  double tau = 1.0, kappa = 1.0;
  const double bnorm = std::max(1.0, sf_.b.norm());
  const double cnorm = [&] {
    double s = sf_.c.squaredNorm();
    for (const auto& C : sf_.C) s += C.squaredNorm();
    return std::max(1.0, std::sqrt(s));
  }();
  const ConeVec e = identity_cone();
  ConeVec ck = zero_cone();
  ck.v = sf_.c.tail(ncv());
  ck.S = sf_.C;
  const Vec cf = sf_.c.head(nf);

  Solution sol;
  sol.status = Status::MaxIterations;
  int stall = 0;
  double pres = 0, dres = 0, gapr = 0, pobj = 0, dobj = 0;
  int it = 0;
  for (;; ++it) {
    // residuals
    Vec rp = apply_A(xf, xk) - sf_.b * tau;
    Vec atf;
    ConeVec atk;
    apply_AT(y, atf, atk);
    Vec rdf = atf - cf * tau;
    ConeVec rdk = atk;
    axpy(1.0, zk, rdk);
    axpy(-tau, ck, rdk);
    const double cx = cdot(xf, xk), by = sf_.b.dot(y);
    const double rg = cx - by + kappa;
    const double xz = dot(xk, zk);
    const double mu = (xz + tau * kappa) / (nu + 1.0);

    pres = rp.norm() / tau / bnorm;
    dres = std::sqrt(rdf.squaredNorm() + dot(rdk, rdk)) / tau / cnorm;
    pobj = cx / tau;
    dobj = by / tau;
    gapr = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double cgap = xz / (tau * tau) / (1.0 + std::abs(pobj));
    if (opt_.verbose) {
      std::fprintf(stderr, "it %3d pobj % .9e dobj % .9e pres %.2e dres %.2e gap %.2e tau %.2e kappa %.2e\n", it,
                   pobj, dobj, pres, dres, gapr, tau, kappa);
    }
    if (pres <= opt_.tol && dres <= opt_.tol && gapr <= opt_.tol && cgap <= 10 * opt_.tol) {
      sol.status = Status::Optimal;
      break;
    }
    if (tau < 1e-2 * kappa) {
      if (by > 0.0) {
        ConeVec r = atk;
        axpy(1.0, zk, r);
        const double pinf = std::sqrt(atf.squaredNorm() + dot(r, r)) / by;
        if (pinf <= opt_.tol) {
          sol.status = Status::Infeasible;
          break;
        }
      }
      if (cx < 0.0) {
        const double dinf = apply_A(xf, xk).norm() / (-cx);
        if (dinf <= opt_.tol) {
          sol.status = Status::Unbounded;
          break;
        }
      }
    }
    if (it >= opt_.max_iter || stall >= 5 || !std::isfinite(mu)) break;

    if (!compute_scaling(xk, zk) || !factor()) break;

    // direction independent of sigma
    Vec dy1, dxf1;
    {
      Vec ry = sf_.b + apply_A(Vec::Zero(nf), apply_H(ck));
      solve_kkt(ry, cf, dy1, dxf1);
    }
    Vec t1f;
    ConeVec t1k;
    apply_AT(dy1, t1f, t1k);
    axpy(-1.0, ck, t1k);
    ConeVec dxk1 = apply_H(t1k);
    const double c_dx1 = cdot(dxf1, dxk1), b_dy1 = sf_.b.dot(dy1);

    auto newton = [&](double onems, const ConeVec& q, double rtau, Vec& dxf, ConeVec& dxk, Vec& dy, ConeVec& dzk,
                      double& dtau, double& dkappa) {
      ConeVec t = scaled(apply_H(rdk), onems);
      ConeVec wq = apply_WT(q);
      ConeVec sum = t;
      axpy(1.0, wq, sum);
      Vec ry = -onems * rp - apply_A(Vec::Zero(nf), sum);
      Vec rf = -onems * rdf;
      Vec dy0, dxf0;
      solve_kkt(ry, rf, dy0, dxf0);
      Vec af;
      ConeVec ak;
      apply_AT(dy0, af, ak);
      ConeVec dxk0 = apply_H(ak);
      axpy(1.0, sum, dxk0);
      const double num = -onems * rg - cdot(dxf0, dxk0) + sf_.b.dot(dy0) - rtau / tau;
      const double den = c_dx1 - b_dy1 - kappa / tau;
      dtau = num / den;
      dxf = dxf0 + dtau * dxf1;
      dxk = dxk0;
      axpy(dtau, dxk1, dxk);
      dy = dy0 + dtau * dy1;
      Vec tf;
      ConeVec tk;
      apply_AT(dy, tf, tk);
      dzk = scaled(rdk, -onems);
      axpy(-1.0, tk, dzk);
      axpy(dtau, ck, dzk);
      dkappa = (rtau - kappa * dtau) / tau;
    };
    auto step_len = [&](const ConeVec& dxs, const ConeVec& dzs, double dtau, double dkappa) {
      double a = std::min(max_step(dxs), max_step(dzs));
      if (dtau < 0.0) a = std::min(a, -tau / dtau);
      if (dkappa < 0.0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    // predictor
    ConeVec lam2 = jprod(lambda_, lambda_);
    ConeVec qa = jdiv_lambda(scaled(lam2, -1.0));
    Vec dxf_a, dy_a;
    ConeVec dxk_a, dzk_a;
    double dtau_a, dkappa_a;
    newton(1.0, qa, -tau * kappa, dxf_a, dxk_a, dy_a, dzk_a, dtau_a, dkappa_a);
    ConeVec dxs_a = apply_WinvT(dxk_a), dzs_a = apply_W(dzk_a);
    const double alpha_a = std::min(1.0, step_len(dxs_a, dzs_a, dtau_a, dkappa_a));
    const double sigma = std::pow(std::max(0.0, 1.0 - alpha_a), 3);

    // corrector
    ConeVec rc = scaled(e, sigma * mu);
    axpy(-1.0, lam2, rc);
    axpy(-1.0, jprod(dxs_a, dzs_a), rc);
    ConeVec qc = jdiv_lambda(rc);
    const double rtau = sigma * mu - tau * kappa - dtau_a * dkappa_a;
    Vec dxf, dy;
    ConeVec dxk, dzk;
    double dtau, dkappa;
    newton(1.0 - sigma, qc, rtau, dxf, dxk, dy, dzk, dtau, dkappa);
    ConeVec dxs = apply_WinvT(dxk), dzs = apply_W(dzk);
    const double alpha = std::min(1.0, 0.99 * step_len(dxs, dzs, dtau, dkappa));
    if (!(alpha > 1e-12) || !std::isfinite(alpha)) {
      ++stall;
      if (!(alpha > 0.0)) break;
    } else {
      stall = alpha < 1e-8 ? stall + 1 : 0;
    }
    xf += alpha * dxf;
    axpy(alpha, dxk, xk);
    y += alpha * dy;
    axpy(alpha, dzk, zk);
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    for (auto& S : xk.S) S = 0.5 * (S + S.transpose());
    for (auto& S : zk.S) S = 0.5 * (S + S.transpose());
  }

  sol.iterations = it;
  sol.primal_residual = pres;
  sol.dual_residual = dres;
  sol.gap = gapr;
  const double inv = (sol.status == Status::Infeasible || sol.status == Status::Unbounded) ? 1.0 : 1.0 / tau;
  sol.objective = pobj * obj_scale_ + sf_.c0;
  sol.dual_objective = dobj * obj_scale_ + sf_.c0;
  Vec xfull(sf_.nvec);
  xfull << xf * inv, xk.v * inv;
  sol.x.resize(sf_.var_col.size());
  for (size_t i = 0; i < sf_.var_col.size(); ++i) sol.x[i] = xfull(sf_.var_col[i]);
  sol.blocks.clear();
  for (auto& S : xk.S) sol.blocks.push_back(S * inv);
  return sol;
}

}  // namespace

Solution solve(const Problem& p, const SolverOptions& opt) {
  auto sf = detail::compile(p);
  if (sf.m == 0 && sf.nvec == 0 && sf.sdp.empty()) {
    Solution s;
    s.status = Status::Optimal;
    s.objective = sf.c0;
    return s;
  }
  Solver solver(std::move(sf), opt);
  return solver.run();
}

}  // namespace rhosi::conic
