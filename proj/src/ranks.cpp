// Copyright 2026 The ustruct authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ustruct/ranks.hpp"

#include <Eigen/SVD>

namespace ustruct {

namespace {

struct RankWithGap {
  int rank = 0;
  double above = 0.0;  // smallest singular value counted into the rank
  double below = 0.0;  // largest singular value dropped
};

RankWithGap rank_with_gap(const Matrix& m, const Tolerance& tol) {
  RankWithGap out;
  Eigen::JacobiSVD<Matrix> svd(m);
  const RealVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return out;
  const double cutoff = tol.rank_rel * s(0);
  while (out.rank < s.size() && s(out.rank) > cutoff) ++out.rank;
  out.above = (out.rank > 0) ? s(out.rank - 1) : 0.0;
  out.below = (out.rank < s.size()) ? s(out.rank) : 0.0;
  return out;
}

}  // namespace

Matrix KroneckerSum::assemble(bool transpose_s) const {
  if (r_ops.empty() || r_ops.size() != s_ops.size()) {
    throw ShapeError("Kronecker sum needs matching nonempty term lists");
  }
  Matrix out;
  for (size_t i = 0; i < r_ops.size(); ++i) {
    if (r_ops[i].rows() != r_ops[0].rows() ||
        r_ops[i].cols() != r_ops[0].cols() ||
        s_ops[i].rows() != s_ops[0].rows() ||
        s_ops[i].cols() != s_ops[0].cols()) {
      throw ShapeError("Kronecker sum terms must have uniform shapes");
    }
    const Matrix s_term =
        transpose_s ? Matrix(s_ops[i].transpose()) : s_ops[i];
    const Matrix term = kron(r_ops[i], s_term);
    out = (i == 0) ? term : Matrix(out + term);
  }
  return out;
}

Matrix partial_transpose(const Matrix& m, int d_a, int d_b, Side side) {
  const int d = d_a * d_b;
  if (m.rows() != d || m.cols() != d) {
    throw ShapeError("partial_transpose: matrix is not (d_A*d_B)-square");
  }
  require_finite(m);
  Matrix out(d, d);
  for (int i = 0; i < d_a; ++i) {
    for (int j = 0; j < d_a; ++j) {
      for (int k = 0; k < d_b; ++k) {
        for (int l = 0; l < d_b; ++l) {
          if (side == Side::B) {
            out(i * d_b + l, j * d_b + k) = m(i * d_b + k, j * d_b + l);
          } else {
            out(j * d_b + k, i * d_b + l) = m(i * d_b + k, j * d_b + l);
          }
        }
      }
    }
  }
  return out;
}

RankInequalityReport check_rank_inequality(const KroneckerSum& ks,
                                           const Tolerance& tol) {
  RankInequalityReport report;
  report.k = ks.terms();

  const RankWithGap lhs = rank_with_gap(ks.assemble(true), tol);
  const RankWithGap rhs = rank_with_gap(ks.assemble(false), tol);
  report.lhs_rank = lhs.rank;
  report.rhs_rank = rhs.rank;
  report.lhs_gap_above = lhs.above;
  report.lhs_gap_below = lhs.below;
  report.rhs_gap_above = rhs.above;
  report.rhs_gap_below = rhs.below;
  report.holds = lhs.rank <= report.k * rhs.rank;

  // rank(Σ R_iᵀ ⊗ S_i) = rank(Σ R_i ⊗ S_iᵀ) holds generally: the two
  // matrices are global transposes of each other.
  KroneckerSum swapped;
  for (const Matrix& r : ks.r_ops) swapped.r_ops.push_back(r.transpose());
  swapped.s_ops = ks.s_ops;
  report.swapped_rank = numerical_rank(swapped.assemble(false), tol);
  return report;
}

Rank3UnitaryReport verify_rank3_unitary_equality(const BipartiteUnitary& u,
                                                 const Tolerance& tol,
                                                 std::uint64_t seed,
                                                 bool allow_large_d_a) {
  if (!is_unitary(u.matrix, tol)) {
    throw NotUnitary("verify_rank3_unitary_equality requires a unitary");
  }
  Rank3UnitaryReport report;
  report.schmidt_rank = schmidt_rank(u.matrix, u.d_a, u.d_b, tol);
  if (!allow_large_d_a) {
    if (u.d_a > 3) {
      throw UnsupportedShape(
          "d_A must be at most 3 (pass the experimental flag to lift this)");
    }
    if (report.schmidt_rank > 3) {
      throw UnsupportedShape("Schmidt rank must be at most 3");
    }
    report.asserted = true;
  } else {
    report.asserted = (u.d_a <= 3 && report.schmidt_rank <= 3);
  }

  const bool from_a = check_controlled(u, Side::A, tol).is_controlled;
  const bool from_b = check_controlled(u, Side::B, tol).is_controlled;
  if (from_a && from_b) {
    report.controlled_side = "both";
  } else if (from_a) {
    report.controlled_side = "A";
  } else if (from_b) {
    report.controlled_side = "B";
  } else {
    report.controlled_side = "none";
  }
  (void)seed;

  report.rank_u = numerical_rank(u.matrix, tol);
  report.rank_u_gamma =
      numerical_rank(partial_transpose(u.matrix, u.d_a, u.d_b, Side::B), tol);
  report.equal = (report.rank_u == report.rank_u_gamma);
  return report;
}

}  // namespace ustruct
