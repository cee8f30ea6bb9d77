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

#include "ustruct/equivalence.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ustruct {

namespace {

Matrix kron_all(const std::vector<Matrix>& ops) {
  Matrix out = Matrix::Identity(1, 1);
  for (const Matrix& m : ops) out = kron(out, m);
  return out;
}

bool exactly_identity(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  return m == Matrix::Identity(m.rows(), m.cols());
}

constexpr double kMaxWitnessCondition = 1e8;

}  // namespace

LocalEquivalenceWitness sl_to_lu(const Matrix& u, const Matrix& v,
                                 const SLWitness& witness,
                                 const Tolerance& tol) {
  const int p = witness.parties();
  if (p < 1 || witness.t_ops.size() != static_cast<size_t>(p)) {
    throw ShapeError("witness must carry one s and one t per party");
  }
  long dim = 1;
  for (int i = 0; i < p; ++i) {
    const Matrix& s = witness.s_ops[i];
    const Matrix& t = witness.t_ops[i];
    if (s.rows() != s.cols() || t.rows() != t.cols() || s.rows() != t.rows()) {
      throw ShapeError("witness operators must be square and of equal size");
    }
    dim *= s.rows();
  }
  if (u.rows() != dim || u.cols() != dim || v.rows() != dim ||
      v.cols() != dim) {
    throw ShapeError("operator dimensions do not match the witness parties");
  }
  require_finite(u);
  require_finite(v);
  if (!is_unitary(u, tol) || !is_unitary(v, tol)) {
    throw NotUnitary("sl_to_lu requires unitary operators");
  }

  const double sqrt_dim = std::sqrt(static_cast<double>(dim));
  if ((u - kron_all(witness.s_ops) * v * kron_all(witness.t_ops)).norm() >
      tol.reconstruct * sqrt_dim) {
    throw WitnessResidualTooLarge("SL witness does not relate U and V");
  }

  LocalEquivalenceWitness out;
  std::vector<Matrix> e_ops, f_ops, g_ops, h_ops;
  for (int i = 0; i < p; ++i) {
    const int d = static_cast<int>(witness.s_ops[i].rows());
    for (const Matrix* w : {&witness.s_ops[i], &witness.t_ops[i]}) {
      Eigen::JacobiSVD<Matrix> svd_w(*w,
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
      const RealVector& sv = svd_w.singularValues();
      if (sv(d - 1) <= 0.0 || sv(0) / sv(d - 1) > kMaxWitnessCondition) {
        throw NotInvertible(
            "witness operator is singular or too ill-conditioned");
      }
      const bool is_s = (w == &witness.s_ops[i]);
      if (exactly_identity(*w)) {
        // identity parties map to identity outputs, bit for bit
        (is_s ? e_ops : g_ops).push_back(Matrix::Identity(d, d));
        (is_s ? f_ops : h_ops).push_back(Matrix::Identity(d, d));
      } else if (is_s) {
        e_ops.push_back(svd_w.matrixU());
        f_ops.push_back(svd_w.matrixV().adjoint());
      } else {
        g_ops.push_back(svd_w.matrixU());
        h_ops.push_back(svd_w.matrixV().adjoint());
      }
    }
  }

  out.q_ops.reserve(p);
  out.r_ops.reserve(p);
  for (int i = 0; i < p; ++i) {
    if (exactly_identity(witness.s_ops[i])) {
      out.q_ops.push_back(witness.s_ops[i]);
    } else {
      out.q_ops.push_back(e_ops[i] * f_ops[i]);
    }
    if (exactly_identity(witness.t_ops[i])) {
      out.r_ops.push_back(witness.t_ops[i]);
    } else {
      out.r_ops.push_back(g_ops[i] * h_ops[i]);
    }
  }

  // The rotated operators must coincide; report the residual instead of
  // assuming the zero-pattern argument survived round-off.
  std::vector<Matrix> e_dag, h_dag;
  for (const Matrix& e : e_ops) e_dag.push_back(e.adjoint());
  for (const Matrix& h : h_ops) h_dag.push_back(h.adjoint());
  const Matrix u_prime = kron_all(e_dag) * u * kron_all(h_dag);
  const Matrix v_prime = kron_all(f_ops) * v * kron_all(g_ops);
  out.internal_residual = (u_prime - v_prime).norm();

  out.residual =
      (u - kron_all(out.q_ops) * v * kron_all(out.r_ops)).norm();
  return out;
}

ControlledForm controlled_from_sl_witness(
    const BipartiteUnitary& u,
    const std::vector<std::pair<Matrix, Matrix>>& terms,
    const std::vector<Matrix>& projectors, const SLWitness& witness,
    const Tolerance& tol, std::uint64_t seed) {
  if (terms.empty() || terms.size() != projectors.size()) {
    throw ShapeError("need one projector per term");
  }
  if (witness.parties() != 2) {
    throw ShapeError("the witness must cover exactly the two parties");
  }
  const int d_a = u.d_a;
  const int d_b = u.d_b;
  if (!is_unitary(u.matrix, tol)) {
    throw NotUnitary("controlled_from_sl_witness requires a unitary input");
  }

  // Projector sanity and the P_j R_j P_j = R_j sandwich.
  const double proj_tol = 10.0 * tol.reconstruct;
  for (size_t j = 0; j < projectors.size(); ++j) {
    const Matrix& pj = projectors[j];
    if (pj.rows() != d_a || pj.cols() != d_a) {
      throw ShapeError("projector has the wrong dimension");
    }
    if ((pj - pj.adjoint()).norm() > proj_tol ||
        (pj * pj - pj).norm() > proj_tol) {
      throw BadBlockSupport("P_j is not an orthogonal projector");
    }
    for (size_t k = j + 1; k < projectors.size(); ++k) {
      if ((pj * projectors[k]).norm() > proj_tol) {
        throw BadBlockSupport("projectors are not mutually orthogonal");
      }
    }
    const Matrix& rj = terms[j].first;
    if ((pj * rj * pj - rj).norm() > proj_tol * std::max(1.0, rj.norm())) {
      throw BadBlockSupport("R_j is not supported inside its projector");
    }
  }

  // Witness validity against the controlled-type operator.
  Matrix v_ctrl = Matrix::Zero(u.dim(), u.dim());
  for (size_t j = 0; j < terms.size(); ++j) {
    v_ctrl += kron(terms[j].first, terms[j].second);
  }
  const Matrix staged = kron(witness.s_ops[0], witness.s_ops[1]) * v_ctrl *
                        kron(witness.t_ops[0], witness.t_ops[1]);
  const double sqrt_dim = std::sqrt(static_cast<double>(u.dim()));
  if ((u.matrix - staged).norm() > tol.reconstruct * sqrt_dim) {
    throw WitnessResidualTooLarge(
        "witness does not map the controlled-type operator to U");
  }

  // Common eigenbasis of the projector family, so every block becomes an
  // index range on the A side.
  Matrix z = joint_diagonalize(projectors, tol, seed);
  std::vector<int> owner(d_a, -1);
  for (size_t j = 0; j < projectors.size(); ++j) {
    const Matrix diag = z.adjoint() * projectors[j] * z;
    for (int k = 0; k < d_a; ++k) {
      if (std::abs(diag(k, k) - 1.0) < 1e-6) owner[k] = static_cast<int>(j);
    }
  }
  for (int owner_j : owner) {
    if (owner_j < 0) {
      // A direction outside every projector would make the middle operator
      // singular, contradicting the validated witness.
      throw WitnessResidualTooLarge(
          "projectors do not cover the A side; the witness cannot be valid");
    }
  }

  // Per-term SVD inside each block reduces to the diagonal particular case.
  Matrix x_all = Matrix::Identity(d_a, d_a);
  Matrix y_all = Matrix::Identity(d_a, d_a);
  Matrix d_all = Matrix::Zero(d_a, d_a);
  for (size_t j = 0; j < terms.size(); ++j) {
    std::vector<int> idx;
    for (int k = 0; k < d_a; ++k) {
      if (owner[k] == static_cast<int>(j)) idx.push_back(k);
    }
    const int m = static_cast<int>(idx.size());
    if (m == 0) continue;
    Matrix rj_block(m, m);
    const Matrix rj_z = z.adjoint() * terms[j].first * z;
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) rj_block(a, b) = rj_z(idx[a], idx[b]);
    }
    Eigen::JacobiSVD<Matrix> svd_r(rj_block,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        x_all(idx[a], idx[b]) = svd_r.matrixU()(a, b);
        y_all(idx[a], idx[b]) = svd_r.matrixV()(a, b);
      }
      d_all(idx[a], idx[a]) = svd_r.singularValues()(a);
    }
  }

  // U = (ŝ_A ⊗ s_B) · (Σ_k |k⟩⟨k| ⊗ σ_k V_{j(k)}) · (t̂_A ⊗ t_B): pull the
  // per-index target operators and split off their unitary parts.
  const Matrix s_hat = witness.s_ops[0] * z * x_all;
  const Matrix t_hat = y_all.adjoint() * z.adjoint() * witness.t_ops[0];
  std::vector<Matrix> unitary_blocks(d_a);
  Vector scales(d_a);
  for (int k = 0; k < d_a; ++k) {
    const Matrix w_k = d_all(k, k) * witness.s_ops[1] *
                       terms[owner[k]].second * witness.t_ops[1];
    Eigen::JacobiSVD<Matrix> svd_w(w_k,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& sv = svd_w.singularValues();
    if (sv(0) <= 0.0 ||
        (sv(0) - sv(d_b - 1)) > 1e-6 * sv(0)) {
      throw WitnessResidualTooLarge(
          "a target block is not proportional to a unitary; the witness "
          "cannot be valid");
    }
    unitary_blocks[k] = svd_w.matrixU() * svd_w.matrixV().adjoint();
    scales(k) = sv.mean();
  }

  // Unitary middle operator and the two-party SL witness onto it.
  Matrix v_hat = Matrix::Zero(u.dim(), u.dim());
  for (int k = 0; k < d_a; ++k) {
    v_hat.block(k * d_b, k * d_b, d_b, d_b) = unitary_blocks[k];
  }
  SLWitness reduced;
  reduced.s_ops = {s_hat * Matrix(scales.asDiagonal()),
                   Matrix::Identity(d_b, d_b)};
  reduced.t_ops = {t_hat, Matrix::Identity(d_b, d_b)};
  const LocalEquivalenceWitness lu = sl_to_lu(u.matrix, v_hat, reduced, tol);

  // Assemble the controlled form, merging phase-equal blocks.
  ControlledForm cf;
  cf.side = Side::A;
  cf.d_ctrl = d_a;
  cf.d_other = d_b;
  cf.q = lu.q_ops[0];
  cf.r = lu.r_ops[0];
  for (int k = 0; k < d_a; ++k) {
    bool merged = false;
    for (ControlledGroup& g : cf.groups) {
      const Complex zph = (g.v.adjoint() * unitary_blocks[k]).trace() /
                          static_cast<double>(d_b);
      if (std::abs(std::abs(zph) - 1.0) < tol.eig_cluster &&
          (unitary_blocks[k] - zph * g.v).norm() <
              tol.eig_cluster * std::sqrt(static_cast<double>(d_b))) {
        g.indices.push_back(k);
        cf.q.col(k) *= zph / std::abs(zph);
        merged = true;
        break;
      }
    }
    if (!merged) cf.groups.push_back({{k}, unitary_blocks[k]});
  }

  if ((cf.reconstruct() - u.matrix).norm() > tol.reconstruct * sqrt_dim) {
    throw InternalContractViolation(
        "controlled form reconstruction residual too large");
  }
  return cf;
}

}  // namespace ustruct
