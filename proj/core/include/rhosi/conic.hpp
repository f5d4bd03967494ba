#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "rhosi/types.hpp"

// Small convex conic programs: free / nonnegative scalars, second-order cones
// and real symmetric PSD blocks (complex Hermitian blocks via real embedding).
namespace rhosi::conic {

enum class Status { Optimal, Infeasible, Unbounded, MaxIterations };
const char* to_string(Status s);

struct Var {
  int id = -1;
};

// Contribution of one PSD block to an affine expression:
// sum_k coef_k * X(i_k, j_k) + sum_r d_r * u_r^T X u_r.
struct BlockPart {
  int block = -1;
  std::vector<std::tuple<int, int, double>> entries;
  std::vector<Vec> u;
  std::vector<double> d;
};

class Expr {
 public:
  Expr() = default;
  Expr(double c) : cst(c) {}  // NOLINT(google-explicit-constructor)
  Expr(Var v) { add(v, 1.0); }  // NOLINT(google-explicit-constructor)

  Expr& add(Var v, double coef);
  Expr& add_constant(double c) {
    cst += c;
    return *this;
  }
  Expr& add_entry(int block, int i, int j, double coef);
  Expr& add_quad(int block, const Vec& u, double d);  // d * u^T X u
  Expr& add_trace(int block, const Mat& C);           // <C, X>, C symmetric (factored)

  Expr& operator+=(const Expr& o);
  Expr& operator-=(const Expr& o);
  Expr& operator*=(double s);

  std::vector<std::pair<int, double>> lin;
  double cst = 0.0;
  std::vector<BlockPart> blocks;

 private:
  BlockPart& part(int block);
};

Expr operator+(Expr a, const Expr& b);
Expr operator-(Expr a, const Expr& b);
Expr operator-(Expr a);
Expr operator*(double s, Expr a);
Expr operator*(Expr a, double s);

struct HermitianBlock {
  int block = -1;  // real block of size 2n
  int n = 0;
};

// Omega(m, m) of the embedded Hermitian matrix
Expr herm_diag(const HermitianBlock& hb, int m);
// scale * c^H Omega c
Expr herm_quad(const HermitianBlock& hb, const CVec& c, double scale = 1.0);
// Re Tr(C Omega) for Hermitian C (dense, factored on compile)
Expr herm_trace(const HermitianBlock& hb, const CMat& C);
// Hermitian matrix recovered from the real embedding (symmetrized)
CMat herm_value(const HermitianBlock& hb, const Mat& X);
// [[Re, -Im], [Im, Re]]
Mat real_embedding(const CMat& A);

class Problem {
 public:
  Var add_var(const std::string& label = "");
  Var add_nonneg(const std::string& label = "");
  int add_psd(int n, const std::string& label = "");
  HermitianBlock add_hermitian_psd(int n, const std::string& label = "");

  void minimize(const Expr& objective);
  void add_eq(const Expr& e, const std::string& label = "");   // e == 0
  void add_geq(const Expr& e, const std::string& label = "");  // e >= 0
  void add_leq(const Expr& lhs, const Expr& rhs, const std::string& label = "") { add_geq(rhs - lhs, label); }
  void add_soc(const Expr& t, const std::vector<Expr>& xs, const std::string& label = "");  // ||xs|| <= t
  // ||xs||^2 <= u * v with u, v >= 0
  void add_rsoc(const Expr& u, const Expr& v, const std::vector<Expr>& xs, const std::string& label = "");

  int num_vars() const { return static_cast<int>(var_nonneg_.size()); }
  int num_blocks() const { return static_cast<int>(block_dims_.size()); }
  int block_dim(int b) const { return block_dims_.at(b); }
  int num_equalities() const;
  int num_inequalities() const;
  int num_socs() const;
  bool var_is_nonneg(int id) const { return var_nonneg_.at(id); }
  const std::string& var_label(int id) const { return var_labels_.at(id); }
  const std::string& block_label(int b) const { return block_labels_.at(b); }

  enum class Kind { Eq, Geq, Soc };
  struct Constraint {
    Kind kind;
    std::vector<Expr> exprs;  // Eq/Geq: one; Soc: t followed by xs
    std::string label;
  };
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Expr& objective() const { return objective_; }
  bool has_objective() const { return has_objective_; }

  // Plain-text listing of the compiled standard form (see README).
  std::string dump() const;

 private:
  void check_expr(const Expr& e) const;

  std::vector<bool> var_nonneg_;
  std::vector<std::string> var_labels_;
  std::vector<int> block_dims_;
  std::vector<std::string> block_labels_;
  std::vector<Constraint> constraints_;
  Expr objective_;
  bool has_objective_ = false;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  bool verbose = false;
};

struct Solution {
  Status status = Status::MaxIterations;
  double objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::vector<double> x;
  std::vector<Mat> blocks;

  bool ok() const { return status == Status::Optimal; }
  // optimal, or stopped early with residuals within `tol`
  bool usable(double tol) const;
  double value(Var v) const { return x.at(v.id); }
  const Mat& block(int b) const { return blocks.at(b); }
  double eval(const Expr& e) const;
};

Solution solve(const Problem& p, const SolverOptions& opt = {});
inline Solution solve_conic(const Problem& p, double tol = 1e-8) {
  SolverOptions o;
  o.tol = tol;
  return solve(p, o);
}

// Dominant eigenvector scaled by sqrt(lambda_1); residual = lambda_2 / lambda_1.
struct RankOne {
  CVec vec;
  double residual = 0.0;
  double lambda1 = 0.0;
};
RankOne extract_rank_one(const CMat& X);
RankOne extract_rank_one(const Mat& X);

}  // namespace rhosi::conic
