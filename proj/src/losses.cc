// Copyright 2026 The clmark Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "clmark/cltrain.h"
#include "clmark/common.h"

namespace clmark {

namespace {

// Column norms; rejects zero or non-finite columns.
Eigen::RowVectorXd ColumnNorms(const Eigen::MatrixXd& m, const char* what) {
  Eigen::RowVectorXd norms = m.colwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    Require(std::isfinite(norms(i)), std::string(what) + " must be finite");
    Require(norms(i) > 0.0, std::string(what) + " contains a zero vector; "
                                                "cosine similarity undefined");
  }
  return norms;
}

// Pulls a gradient w.r.t. unit vectors back through x -> x / |x|.
Eigen::MatrixXd ThroughNormalization(const Eigen::MatrixXd& unit,
                                     const Eigen::RowVectorXd& norms,
                                     const Eigen::MatrixXd& grad_unit) {
  Eigen::MatrixXd out = grad_unit;
  for (Eigen::Index i = 0; i < unit.cols(); ++i) {
    const double dot = unit.col(i).dot(grad_unit.col(i));
    out.col(i) = (grad_unit.col(i) - dot * unit.col(i)) / norms(i);
  }
  return out;
}

}  // namespace

NtXentResult NtXentLoss(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2,
                        double temperature) {
  Require(temperature > 0.0, "temperature must be positive");
  Require(z1.rows() == z2.rows() && z1.cols() == z2.cols(),
          "NT-Xent view batches must have equal shapes");
  const Eigen::Index n = z1.cols();
  Require(n >= 2, "NT-Xent needs at least two samples for negatives");

  Eigen::MatrixXd z(z1.rows(), 2 * n);
  z << z1, z2;
  const Eigen::RowVectorXd norms = ColumnNorms(z, "NT-Xent inputs");
  Eigen::MatrixXd u = z;
  for (Eigen::Index i = 0; i < 2 * n; ++i) u.col(i) /= norms(i);

  const Eigen::MatrixXd sim = (u.transpose() * u) / temperature;
  // Row-wise softmax over j != i; P - Y accumulates the logit gradient.
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const Eigen::Index pos = i < n ? i + n : i - n;
    double row_max = -INFINITY;
    for (Eigen::Index j = 0; j < 2 * n; ++j)
      if (j != i) row_max = std::max(row_max, sim(i, j));
    double denom = 0.0;
    for (Eigen::Index j = 0; j < 2 * n; ++j)
      if (j != i) denom += std::exp(sim(i, j) - row_max);
    loss += -(sim(i, pos) - row_max) + std::log(denom);
    for (Eigen::Index j = 0; j < 2 * n; ++j)
      if (j != i) coef(i, j) = std::exp(sim(i, j) - row_max) / denom;
    coef(i, pos) -= 1.0;
  }
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  // d sim(i,j) / d u_k hits both rows and columns of the logit matrix.
  const Eigen::MatrixXd grad_u =
      (u * (coef + coef.transpose())) * (scale / temperature);
  const Eigen::MatrixXd grad_z = ThroughNormalization(u, norms, grad_u);

  NtXentResult result;
  result.loss = loss * scale;
  result.grad_z1 = grad_z.leftCols(n);
  result.grad_z2 = grad_z.rightCols(n);
  return result;
}

SimSiamResult SimSiamLoss(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2,
                          const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2) {
  Require(p1.rows() == z2.rows() && p2.rows() == z1.rows() &&
              p1.rows() == p2.rows(),
          "SimSiam vectors must share a dimension");
  Require(p1.cols() == p2.cols() && p1.cols() == z1.cols() &&
              p1.cols() == z2.cols() && p1.cols() >= 1,
          "SimSiam batches must be non-empty and equal in size");
  const Eigen::Index n = p1.cols();
  const Eigen::RowVectorXd np1 = ColumnNorms(p1, "SimSiam p1");
  const Eigen::RowVectorXd np2 = ColumnNorms(p2, "SimSiam p2");
  const Eigen::RowVectorXd nz1 = ColumnNorms(z1, "SimSiam z1");
  const Eigen::RowVectorXd nz2 = ColumnNorms(z2, "SimSiam z2");

  SimSiamResult r;
  r.grad_p1.resize(p1.rows(), n);
  r.grad_p2.resize(p2.rows(), n);
  r.grad_z1 = Eigen::MatrixXd::Zero(z1.rows(), n);
  r.grad_z2 = Eigen::MatrixXd::Zero(z2.rows(), n);
  double loss = 0.0;
  const double w = -0.5 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd a1 = p1.col(i) / np1(i), b2 = z2.col(i) / nz2(i);
    const Eigen::VectorXd a2 = p2.col(i) / np2(i), b1 = z1.col(i) / nz1(i);
    const double c12 = a1.dot(b2), c21 = a2.dot(b1);
    loss += c12 + c21;
    r.grad_p1.col(i) = w * (b2 - c12 * a1) / np1(i);
    r.grad_p2.col(i) = w * (b1 - c21 * a2) / np2(i);
  }
  r.loss = w * loss;
  return r;
}

}  // namespace clmark
