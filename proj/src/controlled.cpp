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

#include "ustruct/controlled.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ustruct {

namespace {

constexpr int kMaxRecursionDepth = 64;

/// Unitary matrix whose first column is the given unit vector.
Matrix unitary_with_first_column(const Vector& c) {
  const int d = static_cast<int>(c.size());
  Matrix basis(d, d);
  basis.col(0) = c;
  int skip = 0;
  c.cwiseAbs().maxCoeff(&skip);
  int col = 1;
  for (int i = 0; i < d; ++i) {
    if (i == skip) continue;
    basis.col(col++) = Vector::Unit(d, i);
  }
  Eigen::HouseholderQR<Matrix> qr(basis);
  Matrix q = qr.householderQ();
  const Complex phase = c.dot(q.col(0));  // c† q0, a unit-modulus scalar
  q.col(0) *= std::conj(phase);
  return q;
}

Matrix unitary_with_first_row(const Vector& x) {
  return unitary_with_first_column(x).transpose();
}

double offdiagonal_norm(const Matrix& m) {
  Matrix off = m;
  off.diagonal().setZero();
  return off.norm();
}

std::vector<double> random_real_weights(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(n);
  for (double& x : w) x = normal(rng);
  return w;
}

/// Splits a sorted value sequence into ranges separated by gaps larger
/// than the threshold. Returns (begin, count) pairs.
std::vector<std::pair<int, int>> cluster_sorted(const RealVector& vals,
                                                double threshold) {
  std::vector<std::pair<int, int>> clusters;
  int begin = 0;
  for (int i = 1; i <= vals.size(); ++i) {
    if (i == vals.size() || std::abs(vals(i) - vals(i - 1)) > threshold) {
      clusters.emplace_back(begin, i - begin);
      begin = i;
    }
  }
  return clusters;
}

bool nearly_scalar(const Matrix& m, double rel_tol) {
  const int d = static_cast<int>(m.rows());
  const Complex mean = m.trace() / static_cast<double>(d);
  const double dev = (m - mean * Matrix::Identity(d, d)).norm();
  return dev <= rel_tol * std::max(m.norm(), 1e-300);
}

/// Recursive joint diagonalization of a family of Hermitian matrices that
/// commute pairwise. Returns a unitary whose columns are a common
/// eigenbasis.
Matrix jd_hermitian(const std::vector<Matrix>& family, const Tolerance& tol,
                    Rng& rng, int d, int depth) {
  if (d == 1) return Matrix::Identity(1, 1);
  double fam_scale = 0.0;
  for (const Matrix& m : family) fam_scale = std::max(fam_scale, m.norm());
  std::vector<const Matrix*> active;
  for (const Matrix& m : family) {
    if (m.norm() <= 1e-12 * fam_scale) continue;  // numerically zero
    if (!nearly_scalar(m, 1e-12)) active.push_back(&m);
  }
  if (active.empty() || depth > kMaxRecursionDepth) {
    return Matrix::Identity(d, d);
  }

  for (int attempt = 0; attempt < 4; ++attempt) {
    const std::vector<double> w = random_real_weights(
        static_cast<int>(active.size()), rng);
    Matrix h = Matrix::Zero(d, d);
    for (size_t k = 0; k < active.size(); ++k) h += w[k] * (*active[k]);
    h = (h + h.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    const RealVector& lambda = solver.eigenvalues();
    const double scale =
        std::max(std::abs(lambda(0)), std::abs(lambda(d - 1)));
    const auto clusters =
        cluster_sorted(lambda, tol.eig_cluster * std::max(scale, 1e-12));
    if (clusters.size() <= 1) continue;  // unlucky draw, try again

    Matrix result(d, d);
    int out_col = 0;
    for (const auto& [begin, count] : clusters) {
      const Matrix block = solver.eigenvectors().middleCols(begin, count);
      if (count == 1) {
        result.col(out_col++) = block.col(0);
        continue;
      }
      std::vector<Matrix> projected;
      projected.reserve(active.size());
      for (const Matrix* m : active) {
        projected.push_back(block.adjoint() * (*m) * block);
      }
      const Matrix inner =
          jd_hermitian(projected, tol, rng, count, depth + 1);
      result.middleCols(out_col, count) = block * inner;
      out_col += count;
    }
    return result;
  }
  // The family looked non-scalar but no combination separated it; fall
  // back to the identity and let the caller's verification decide.
  return Matrix::Identity(d, d);
}

/// Joint diagonalization of commuting normal matrices via their Hermitian
/// and anti-Hermitian parts. No precondition check here.
Matrix jd_normal_family(const std::vector<Matrix>& family, const Tolerance& tol,
                        Rng& rng) {
  if (family.empty()) throw Error("empty matrix family");
  const int d = static_cast<int>(family[0].rows());
  std::vector<Matrix> parts;
  parts.reserve(2 * family.size());
  for (const Matrix& m : family) {
    parts.push_back((m + m.adjoint()) / 2.0);
    parts.push_back((m - m.adjoint()) / Complex(0, 2));
  }
  return jd_hermitian(parts, tol, rng, d, 0);
}

void check_square_family(const std::vector<Matrix>& family) {
  if (family.empty()) throw Error("empty matrix family");
  const int d = static_cast<int>(family[0].rows());
  for (const Matrix& m : family) {
    require_finite(m);
    if (m.rows() != d || m.cols() != d) {
      throw ShapeError("family members must be square and of equal size");
    }
  }
}

/// Worst relative normality/commutation residual over a family; the
/// Lemma-style criterion passes iff this stays within commute_tol.
/// Members negligible against the family scale are exact zeros for the
/// criterion's purposes and are skipped.
double family_criterion_residual(const std::vector<Matrix>& family) {
  double fam_scale = 0.0;
  for (const Matrix& m : family) fam_scale = std::max(fam_scale, m.norm());
  const double floor = 1e-12 * std::max(fam_scale, 1e-300);
  double worst = 0.0;
  std::vector<double> norms;
  norms.reserve(family.size());
  for (const Matrix& m : family) norms.push_back(m.norm());
  for (size_t i = 0; i < family.size(); ++i) {
    if (norms[i] <= floor) continue;
    worst = std::max(worst,
                     normality_residual(family[i]) / (norms[i] * norms[i]));
    for (size_t j = i + 1; j < family.size(); ++j) {
      if (norms[j] <= floor) continue;
      worst = std::max(worst, commutator_residual(family[i], family[j]) /
                                  (norms[i] * norms[j]));
    }
  }
  return worst;
}

struct SsvdContext {
  const Tolerance* tol;
  Rng* rng;
};

/// Finds unitaries (u, v) with u† ops[j] v diagonal for all j, assuming
/// the family admits a simultaneous SVD. Works recursively on singular
/// value clusters of a generic combination.
void ssvd_recurse(const std::vector<Matrix>& ops, Matrix& u, Matrix& v,
                  SsvdContext ctx, int depth) {
  const int d = static_cast<int>(ops[0].rows());
  u = Matrix::Identity(d, d);
  v = Matrix::Identity(d, d);
  if (d == 1 || depth > kMaxRecursionDepth) return;

  double family_scale = 0.0;
  for (const Matrix& m : ops) family_scale = std::max(family_scale, m.norm());
  if (family_scale <= 1e-300) return;  // all-zero family is already diagonal

  // Candidate combinations: a few random draws, then individual members.
  std::vector<Matrix> candidates;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 3; ++attempt) {
    Matrix a = Matrix::Zero(d, d);
    for (const Matrix& m : ops) {
      a += Complex(normal(*ctx.rng), normal(*ctx.rng)) * m;
    }
    candidates.push_back(std::move(a));
  }
  for (const Matrix& m : ops) candidates.push_back(m);

  for (const Matrix& a : candidates) {
    Eigen::JacobiSVD<Matrix> solver(a,
                                    Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& sigma = solver.singularValues();
    if (sigma(0) <= 1e-14 * family_scale) continue;
    const auto clusters =
        cluster_sorted(sigma, ctx.tol->eig_cluster * sigma(0));
    if (clusters.size() <= 1) continue;

    u = solver.matrixU();
    v = solver.matrixV();
    for (const auto& [begin, count] : clusters) {
      if (count == 1) continue;
      const Matrix us = u.middleCols(begin, count);
      const Matrix vs = v.middleCols(begin, count);
      std::vector<Matrix> sub;
      sub.reserve(ops.size());
      double sub_scale = 0.0;
      for (const Matrix& m : ops) {
        sub.push_back(us.adjoint() * m * vs);
        sub_scale = std::max(sub_scale, sub.back().norm());
      }
      const bool zero_cluster =
          sigma(begin) <= ctx.tol->rank_rel * sigma(0) ||
          sub_scale <= 1e-12 * family_scale;
      if (zero_cluster) {
        if (sub_scale <= 1e-12 * family_scale) continue;  // nothing to align
        Matrix iu, iv;
        ssvd_recurse(sub, iu, iv, ctx, depth + 1);
        u.middleCols(begin, count) = us * iu;
        v.middleCols(begin, count) = vs * iv;
      } else {
        // Positive cluster: the projected family is a commuting normal
        // family conjugated by one common unitary, so a similarity
        // transform finishes the job.
        const Matrix w = jd_normal_family(sub, *ctx.tol, *ctx.rng);
        u.middleCols(begin, count) = us * w;
        v.middleCols(begin, count) = vs * w;
      }
    }
    return;
  }

  // No combination separated the singular values: the family should be a
  // set of scalar multiples of one common matrix. Diagonalize the largest
  // member directly.
  int largest = 0;
  double best = -1.0;
  for (size_t j = 0; j < ops.size(); ++j) {
    if (ops[j].norm() > best) {
      best = ops[j].norm();
      largest = static_cast<int>(j);
    }
  }
  Eigen::JacobiSVD<Matrix> solver(ops[largest],
                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
  u = solver.matrixU();
  v = solver.matrixV();
}

}  // namespace

const char* side_name(Side side) { return side == Side::A ? "A" : "B"; }

Matrix joint_diagonalize(const std::vector<Matrix>& family,
                         const Tolerance& tol, std::uint64_t seed) {
  check_square_family(family);
  for (const Matrix& m : family) {
    if (!is_normal(m, tol)) {
      throw NotSimultaneouslyDiagonalizable("family member is not normal");
    }
  }
  for (size_t i = 0; i < family.size(); ++i) {
    for (size_t j = i + 1; j < family.size(); ++j) {
      if (!commutes(family[i], family[j], tol)) {
        throw NotSimultaneouslyDiagonalizable(
            "family members do not commute");
      }
    }
  }
  Rng rng(seed);
  const Matrix w = jd_normal_family(family, tol, rng);
  for (const Matrix& m : family) {
    if (offdiagonal_norm(w.adjoint() * m * w) >
        tol.reconstruct * std::max(m.norm(), 1.0)) {
      throw NotSimultaneouslyDiagonalizable(
          "joint diagonalization failed to reach diagonality");
    }
  }
  return w;
}

SimultaneousSvd simultaneous_svd(const std::vector<Matrix>& a_ops,
                                 const Tolerance& tol, std::uint64_t seed) {
  check_square_family(a_ops);
  const int d = static_cast<int>(a_ops[0].rows());
  const size_t n = a_ops.size();

  std::vector<Matrix> left, right;
  left.reserve(n * n);
  right.reserve(n * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      left.push_back(a_ops[i] * a_ops[j].adjoint());
      right.push_back(a_ops[i].adjoint() * a_ops[j]);
    }
  }
  if (family_criterion_residual(left) > tol.commute ||
      family_criterion_residual(right) > tol.commute) {
    throw NoSimultaneousSVD(
        "family fails the normal/commuting criterion; no simultaneous "
        "singular value decomposition exists");
  }

  Rng rng(seed);
  SsvdContext ctx{&tol, &rng};
  Matrix u, v;
  ssvd_recurse(a_ops, u, v, ctx, 0);

  SimultaneousSvd out;
  out.q = u;
  out.r = v.adjoint();
  out.diags.reserve(n);
  for (const Matrix& m : a_ops) {
    const Matrix diag = u.adjoint() * m * v;
    if (offdiagonal_norm(diag) > 10.0 * tol.reconstruct * std::max(m.norm(), 1.0)) {
      throw NoSimultaneousSVD(
          "simultaneous SVD did not reach diagonality within tolerance");
    }
    out.diags.push_back(diag.diagonal());
  }
  return out;
}

ControlledCheck check_controlled(const BipartiteUnitary& u, Side side,
                                 const Tolerance& tol) {
  if (!is_unitary(u.matrix, tol)) {
    throw NotUnitary("check_controlled requires a unitary input");
  }
  const SchmidtDecomposition sd =
      schmidt_decompose(u.matrix, u.d_a, u.d_b, tol);
  const std::vector<Matrix>& ops = (side == Side::A) ? sd.a_ops : sd.b_ops;

  ControlledCheck out;
  const size_t n = ops.size();
  out.left_family.reserve(n * n);
  out.right_family.reserve(n * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      out.left_family.push_back(ops[i] * ops[j].adjoint());
      out.right_family.push_back(ops[i].adjoint() * ops[j]);
    }
  }
  out.max_residual = std::max(family_criterion_residual(out.left_family),
                              family_criterion_residual(out.right_family));
  out.is_controlled = out.max_residual <= tol.commute;
  return out;
}

Matrix ControlledForm::reconstruct() const {
  const int d = d_ctrl * d_other;
  Matrix mid = Matrix::Zero(d, d);
  for (const ControlledGroup& g : groups) {
    for (int k : g.indices) {
      if (side == Side::A) {
        mid.block(k * d_other, k * d_other, d_other, d_other) = g.v;
      } else {
        for (int a = 0; a < d_other; ++a) {
          for (int b = 0; b < d_other; ++b) {
            mid(a * d_ctrl + k, b * d_ctrl + k) = g.v(a, b);
          }
        }
      }
    }
  }
  const Matrix id = Matrix::Identity(d_other, d_other);
  if (side == Side::A) {
    return kron(q, id) * mid * kron(r, id);
  }
  return kron(id, q) * mid * kron(id, r);
}

ControlledForm extract_controlled_form(const BipartiteUnitary& u, Side side,
                                       const Tolerance& tol,
                                       std::uint64_t seed) {
  if (!is_unitary(u.matrix, tol)) {
    throw NotUnitary("extract_controlled_form requires a unitary input");
  }
  const SchmidtDecomposition sd =
      schmidt_decompose(u.matrix, u.d_a, u.d_b, tol);
  const bool from_a = (side == Side::A);
  const std::vector<Matrix>& ctrl_ops = from_a ? sd.a_ops : sd.b_ops;
  const std::vector<Matrix>& other_ops = from_a ? sd.b_ops : sd.a_ops;
  const int d_ctrl = from_a ? u.d_a : u.d_b;
  const int d_other = from_a ? u.d_b : u.d_a;

  const SimultaneousSvd ssvd = simultaneous_svd(ctrl_ops, tol, seed);

  // Target-side blocks V_k = Σ_j c_j · diags[j][k] · other_ops[j].
  std::vector<Matrix> blocks(d_ctrl, Matrix::Zero(d_other, d_other));
  for (int j = 0; j < sd.rank(); ++j) {
    for (int k = 0; k < d_ctrl; ++k) {
      blocks[k] += sd.coefficients(j) * ssvd.diags[j](k) * other_ops[j];
    }
  }
  for (const Matrix& v : blocks) {
    if (!is_unitary(v, Tolerance{.unitarity = 1e3 * tol.unitarity})) {
      throw InternalContractViolation(
          "extracted controlled block is not unitary; tolerance breakdown");
    }
  }

  // Merge control indices whose blocks agree up to a global phase; the
  // phase moves into q.
  ControlledForm cf;
  cf.side = side;
  cf.d_ctrl = d_ctrl;
  cf.d_other = d_other;
  Vector phases = Vector::Ones(d_ctrl);
  for (int k = 0; k < d_ctrl; ++k) {
    bool merged = false;
    for (ControlledGroup& g : cf.groups) {
      const Complex z = (g.v.adjoint() * blocks[k]).trace() /
                        static_cast<double>(d_other);
      if (std::abs(std::abs(z) - 1.0) < tol.eig_cluster &&
          (blocks[k] - z * g.v).norm() <
              tol.eig_cluster * std::sqrt(static_cast<double>(d_other))) {
        g.indices.push_back(k);
        phases(k) = z / std::abs(z);
        merged = true;
        break;
      }
    }
    if (!merged) {
      cf.groups.push_back({{k}, blocks[k]});
    }
  }
  cf.q = ssvd.q * phases.asDiagonal();
  cf.r = ssvd.r;

  const double residual = (cf.reconstruct() - u.matrix).norm();
  if (residual > tol.reconstruct * std::sqrt(static_cast<double>(u.dim()))) {
    throw InternalContractViolation(
        "controlled form reconstruction residual too large");
  }
  return cf;
}

namespace {

struct BlockSplit {
  Matrix w_left;
  Matrix w_right;
  std::vector<int> sizes;
};

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(int a, int b) { parent_[find(a)] = find(b); }

 private:
  std::vector<int> parent_;
};

/// True when every family member is (numerically) a scalar multiple of a
/// common matrix proportional to a unitary.
bool scalar_multiple_family(const std::vector<Matrix>& ops, double rel_tol) {
  int largest = 0;
  double best = -1.0;
  for (size_t j = 0; j < ops.size(); ++j) {
    if (ops[j].norm() > best) {
      best = ops[j].norm();
      largest = static_cast<int>(j);
    }
  }
  if (best <= 1e-300) return true;
  const Matrix& g = ops[largest];
  if (!nearly_scalar(g * g.adjoint(), rel_tol)) return false;
  const double g2 = g.squaredNorm();
  for (const Matrix& m : ops) {
    const Complex lambda = (g.adjoint() * m).trace() / g2;
    if ((m - lambda * g).norm() > rel_tol * best) return false;
  }
  return true;
}

BlockSplit finest_blocks_recurse(const std::vector<Matrix>& ops,
                                 const Tolerance& tol, Rng& rng, int depth) {
  const int d = static_cast<int>(ops[0].rows());
  if (d == 1 || depth > kMaxRecursionDepth) {
    return {Matrix::Identity(d, d), Matrix::Identity(d, d), {d}};
  }

  if (scalar_multiple_family(ops, 1e-9)) {
    // All members act as multiples of one unitary: its SVD splits the
    // space into singleton blocks.
    int largest = 0;
    double best = -1.0;
    for (size_t j = 0; j < ops.size(); ++j) {
      if (ops[j].norm() > best) {
        best = ops[j].norm();
        largest = static_cast<int>(j);
      }
    }
    Eigen::JacobiSVD<Matrix> solver(ops[largest],
                                    Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {solver.matrixU(), solver.matrixV(), std::vector<int>(d, 1)};
  }

  std::vector<Matrix> left_f, right_f;
  for (size_t i = 0; i < ops.size(); ++i) {
    for (size_t j = i; j < ops.size(); ++j) {
      const Matrix l = ops[i] * ops[j].adjoint();
      const Matrix r = ops[i].adjoint() * ops[j];
      left_f.push_back((l + l.adjoint()) / 2.0);
      right_f.push_back((r + r.adjoint()) / 2.0);
      if (j > i) {
        left_f.push_back((l - l.adjoint()) / Complex(0, 2));
        right_f.push_back((r - r.adjoint()) / Complex(0, 2));
      }
    }
  }

  const double link_tol = 1e-8;
  double left_scale = 0.0, right_scale = 0.0, ops_scale = 0.0;
  for (const Matrix& m : left_f) left_scale = std::max(left_scale, m.norm());
  for (const Matrix& m : right_f) {
    right_scale = std::max(right_scale, m.norm());
  }
  for (const Matrix& m : ops) ops_scale = std::max(ops_scale, m.norm());
  const auto negligible = [](const Matrix& m, double scale) {
    return m.norm() <= 1e-12 * std::max(scale, 1e-300);
  };
  for (int attempt = 0; attempt < 4; ++attempt) {
    Matrix hl = Matrix::Zero(d, d), hr = Matrix::Zero(d, d);
    for (const Matrix& m : left_f) {
      hl += random_real_weights(1, rng)[0] * m;
    }
    for (const Matrix& m : right_f) {
      hr += random_real_weights(1, rng)[0] * m;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> sl((hl + hl.adjoint()) / 2.0);
    Eigen::SelfAdjointEigenSolver<Matrix> sr((hr + hr.adjoint()) / 2.0);
    const double scale_l = std::max(std::abs(sl.eigenvalues()(0)),
                                    std::abs(sl.eigenvalues()(d - 1)));
    const double scale_r = std::max(std::abs(sr.eigenvalues()(0)),
                                    std::abs(sr.eigenvalues()(d - 1)));
    const auto cl = cluster_sorted(sl.eigenvalues(),
                                   tol.eig_cluster * std::max(scale_l, 1e-12));
    const auto cr = cluster_sorted(sr.eigenvalues(),
                                   tol.eig_cluster * std::max(scale_r, 1e-12));

    const int nl = static_cast<int>(cl.size());
    const int nr = static_cast<int>(cr.size());
    UnionFind uf(nl + nr);
    auto subcols = [](const Matrix& w, std::pair<int, int> c) {
      return w.middleCols(c.first, c.second);
    };
    for (int a = 0; a < nl; ++a) {
      for (int b = a + 1; b < nl; ++b) {
        for (const Matrix& m : left_f) {
          if (negligible(m, left_scale)) continue;
          if ((subcols(sl.eigenvectors(), cl[a]).adjoint() * m *
               subcols(sl.eigenvectors(), cl[b]))
                  .norm() > link_tol * m.norm()) {
            uf.unite(a, b);
            break;
          }
        }
      }
    }
    for (int a = 0; a < nr; ++a) {
      for (int b = a + 1; b < nr; ++b) {
        for (const Matrix& m : right_f) {
          if (negligible(m, right_scale)) continue;
          if ((subcols(sr.eigenvectors(), cr[a]).adjoint() * m *
               subcols(sr.eigenvectors(), cr[b]))
                  .norm() > link_tol * m.norm()) {
            uf.unite(nl + a, nl + b);
            break;
          }
        }
      }
    }
    for (int a = 0; a < nl; ++a) {
      for (int b = 0; b < nr; ++b) {
        for (const Matrix& m : ops) {
          if (negligible(m, ops_scale)) continue;
          if ((subcols(sl.eigenvectors(), cl[a]).adjoint() * m *
               subcols(sr.eigenvectors(), cr[b]))
                  .norm() > link_tol * m.norm()) {
            uf.unite(a, nl + b);
            break;
          }
        }
      }
    }

    std::vector<int> roots;
    for (int a = 0; a < nl + nr; ++a) {
      const int root = uf.find(a);
      if (std::find(roots.begin(), roots.end(), root) == roots.end()) {
        roots.push_back(root);
      }
    }
    if (roots.size() <= 1) continue;

    bool consistent = true;
    BlockSplit out;
    out.w_left = Matrix(d, d);
    out.w_right = Matrix(d, d);
    int col = 0;
    for (int root : roots) {
      std::vector<int> lcols, rcols;
      for (int a = 0; a < nl; ++a) {
        if (uf.find(a) == root) {
          for (int i = 0; i < cl[a].second; ++i) lcols.push_back(cl[a].first + i);
        }
      }
      for (int b = 0; b < nr; ++b) {
        if (uf.find(nl + b) == root) {
          for (int i = 0; i < cr[b].second; ++i) rcols.push_back(cr[b].first + i);
        }
      }
      if (lcols.size() != rcols.size() || lcols.empty()) {
        consistent = false;
        break;
      }
      const int mc = static_cast<int>(lcols.size());
      Matrix lb(d, mc), rb(d, mc);
      for (int i = 0; i < mc; ++i) {
        lb.col(i) = sl.eigenvectors().col(lcols[i]);
        rb.col(i) = sr.eigenvectors().col(rcols[i]);
      }
      std::vector<Matrix> sub;
      sub.reserve(ops.size());
      for (const Matrix& m : ops) sub.push_back(lb.adjoint() * m * rb);
      const BlockSplit inner = finest_blocks_recurse(sub, tol, rng, depth + 1);
      out.w_left.middleCols(col, mc) = lb * inner.w_left;
      out.w_right.middleCols(col, mc) = rb * inner.w_right;
      out.sizes.insert(out.sizes.end(), inner.sizes.begin(),
                       inner.sizes.end());
      col += mc;
    }
    if (consistent && col == d) return out;
  }
  return {Matrix::Identity(d, d), Matrix::Identity(d, d), {d}};
}

double off_block_norm(const Matrix& m, const std::vector<int>& sizes) {
  Matrix masked = m;
  int offset = 0;
  for (int s : sizes) {
    masked.block(offset, offset, s, s).setZero();
    offset += s;
  }
  return masked.norm();
}

}  // namespace

std::optional<BlockStructure> finest_block_structure(const BipartiteUnitary& u,
                                                     Side side,
                                                     const Tolerance& tol,
                                                     std::uint64_t seed) {
  if (!is_unitary(u.matrix, tol)) {
    throw NotUnitary("finest_block_structure requires a unitary input");
  }
  const SchmidtDecomposition sd =
      schmidt_decompose(u.matrix, u.d_a, u.d_b, tol);
  const std::vector<Matrix>& ops = (side == Side::A) ? sd.a_ops : sd.b_ops;

  Rng rng(seed);
  BlockSplit split = finest_blocks_recurse(ops, tol, rng, 0);
  if (split.sizes.size() <= 1) return std::nullopt;

  // Order blocks by size, largest first, stable in the discovered order.
  std::vector<int> order(split.sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return split.sizes[a] > split.sizes[b];
  });
  std::vector<int> offsets(split.sizes.size(), 0);
  for (size_t i = 1; i < split.sizes.size(); ++i) {
    offsets[i] = offsets[i - 1] + split.sizes[i - 1];
  }
  const int d = static_cast<int>(split.w_left.rows());
  BlockStructure out;
  out.side = side;
  out.w_left = Matrix(d, d);
  out.w_right = Matrix(d, d);
  int col = 0;
  for (int idx : order) {
    const int s = split.sizes[idx];
    out.w_left.middleCols(col, s) = split.w_left.middleCols(offsets[idx], s);
    out.w_right.middleCols(col, s) = split.w_right.middleCols(offsets[idx], s);
    out.block_sizes.push_back(s);
    col += s;
  }

  for (const Matrix& m : ops) {
    const Matrix t = out.w_left.adjoint() * m * out.w_right;
    if (off_block_norm(t, out.block_sizes) >
        10.0 * tol.reconstruct * std::max(m.norm(), 1.0)) {
      throw InternalContractViolation(
          "block structure verification failed; tolerance breakdown");
    }
  }
  return out;
}

namespace {

/// Stacks the d_B×d_B blocks of one block-row (or column) as columns of a
/// d_B²×d_A matrix so linear dependence becomes a null vector.
Matrix stack_blocks(const Matrix& m, int d_a, int d_b, int fixed,
                    bool fixed_is_row) {
  Matrix x(d_b * d_b, d_a);
  for (int k = 0; k < d_a; ++k) {
    const Matrix block = fixed_is_row ? m.block(fixed * d_b, k * d_b, d_b, d_b)
                                      : m.block(k * d_b, fixed * d_b, d_b, d_b);
    x.col(k) = vec(block);
  }
  return x;
}

Matrix block_of(const Matrix& m, int d_b, int i, int j) {
  return m.block(i * d_b, j * d_b, d_b, d_b);
}

}  // namespace

ZeroBlockReduction zero_block_reduction(const Matrix& m, int d_a, int d_b,
                                        const Tolerance& tol) {
  const int d = d_a * d_b;
  if (m.rows() != d || m.cols() != d) {
    throw ShapeError("zero_block_reduction: matrix is not (d_A*d_B)-square");
  }
  if (schmidt_rank(m, d_a, d_b, tol) > d_a) {
    throw RankTooHigh("operator Schmidt rank exceeds d_A");
  }
  const double scale = std::max(m.norm(), 1e-300);
  const Matrix id = Matrix::Identity(d_a, d_a);
  const Matrix id_full = Matrix::Identity(d_b, d_b);

  const auto dependence = [&](const Matrix& x) -> std::optional<Vector> {
    Eigen::JacobiSVD<Matrix> solver(x, Eigen::ComputeFullV);
    const RealVector& s = solver.singularValues();
    if (s(0) <= 1e-12 * scale) {
      return Vector::Unit(d_a, 0);  // the whole stack is zero
    }
    if (s(s.size() - 1) <= tol.rank_rel * s(0)) {
      return solver.matrixV().col(d_a - 1);
    }
    return std::nullopt;
  };

  // Dependent block-row: rotate within it (a column operation on A).
  for (int i = 0; i < d_a; ++i) {
    if (auto c = dependence(stack_blocks(m, d_a, d_b, i, true))) {
      const Matrix w_col = unitary_with_first_column(*c);
      return {id, w_col, i, 0};
    }
  }
  // Dependent block-column: a row operation suffices.
  for (int j = 0; j < d_a; ++j) {
    if (auto c = dependence(stack_blocks(m, d_a, d_b, j, false))) {
      const Matrix w_row = unitary_with_first_row(*c);
      return {w_row, id, 0, j};
    }
  }

  // All block-rows independent: the Schmidt rank is exactly d_A and the
  // first row lies in the span of the second. A pencil eigenvalue gives a
  // combination of the two rows with dependent blocks.
  const Matrix x1 = stack_blocks(m, d_a, d_b, 0, true);
  const Matrix x2 = stack_blocks(m, d_a, d_b, 1, true);
  Eigen::HouseholderQR<Matrix> qr(x2);
  const Matrix q2 = Matrix(qr.householderQ()).leftCols(d_a);
  const Matrix s_coord = q2.adjoint() * x2;
  const Matrix t_coord = q2.adjoint() * x1;
  if ((x1 - q2 * t_coord).norm() > 1e-6 * scale) {
    throw InternalContractViolation(
        "row-1 blocks do not lie in the span of row-2 blocks");
  }
  Eigen::ComplexEigenSolver<Matrix> eigs(
      s_coord.inverse() * t_coord);

  ZeroBlockReduction best;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int e = 0; e < eigs.eigenvalues().size(); ++e) {
    const Complex mu = eigs.eigenvalues()(e);
    Vector xy = Vector::Zero(d_a);
    xy(0) = 1.0;
    xy(1) = -mu;
    xy /= xy.norm();
    const Matrix pencil = xy(0) * x1 + xy(1) * x2;
    Eigen::JacobiSVD<Matrix> psvd(pencil, Eigen::ComputeFullV);
    const Vector c = psvd.matrixV().col(d_a - 1);
    const Matrix w_row = unitary_with_first_row(xy);
    const Matrix w_col = unitary_with_first_column(c);
    const Matrix reduced = kron(w_row, id_full) * m * kron(w_col, id_full);
    const double residual = block_of(reduced, d_b, 0, 0).norm();
    if (residual < best_residual) {
      best_residual = residual;
      best = {w_row, w_col, 0, 0};
    }
  }
  return best;
}

}  // namespace ustruct
