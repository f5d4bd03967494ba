#pragma once

#include <Eigen/Sparse>
#include <string>
#include <tuple>
#include <vector>

#include "rhosi/conic.hpp"

namespace rhosi::conic::detail {

using SpMat = Eigen::SparseMatrix<double>;

// One row's contribution on a PSD block: <A, X> with A = S + U diag(d) U^T.
// S is stored as (i, j, v) with i >= j meaning S(i,j) = S(j,i) = v.
struct SdpRowTerm {
  int row = 0;
  std::vector<std::tuple<int, int, double>> sparse;
  Mat U;
  Vec d;
};

// min c^T x + <C, X>  s.t.  A x + sum <A_i, X> = b,
// x = (free | LP | SOC blocks), X = PSD blocks.
struct StandardForm {
  int m = 0;
  int nf = 0;
  int nl = 0;
  std::vector<int> soc;
  std::vector<int> sdp;
  int nvec = 0;
  SpMat A;
  std::vector<std::vector<SdpRowTerm>> sdp_rows;
  Vec b;
  Vec c;
  std::vector<Mat> C;
  double c0 = 0.0;
  std::vector<int> var_col;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

StandardForm compile(const Problem& p);

}  // namespace rhosi::conic::detail
