// Copyright 2026 The SIKM Authors.
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

#include "sikm/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace sikm {

namespace {

std::string singular_message(const Vec& q, double sigma, double threshold) {
  std::ostringstream os;
  os << "singular configuration: smallest singular value " << sigma
     << " below threshold " << threshold << " at q = ["
     << q.transpose() << "]";
  return os.str();
}

}  // namespace

SingularConfiguration::SingularConfiguration(Vec q, double min_singular_value,
                                             double threshold)
    : std::runtime_error(singular_message(q, min_singular_value, threshold)),
      q_(std::move(q)),
      sigma_min_(min_singular_value) {}

Vec BlockStructure::gather(int robot, const Vec& q) const {
  const auto cols = local_cols(robot);
  Vec local(static_cast<Eigen::Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) local[j] = q[cols[j]];
  return local;
}

std::vector<int> BlockStructure::local_cols(int robot) const {
  std::vector<int> cols = robots.at(robot).own_cols;
  cols.insert(cols.end(), pivot_cols.begin(), pivot_cols.end());
  return cols;
}

void SquareSystem::check_dim(const Vec& q) const {
  if (q.size() != dim()) {
    std::ostringstream os;
    os << id() << ": configuration has length " << q.size() << ", expected "
       << dim();
    throw DimensionError(os.str());
  }
}

Vec SquareSystem::eval_h(const Vec& q) const {
  check_dim(q);
  return h_impl(q);
}

Mat SquareSystem::eval_jacobian(const Vec& q) const {
  check_dim(q);
  return jacobian_impl(q);
}

Mat SquareSystem::local_jacobian(int robot, const Vec& local_q) const {
  const BlockStructure* blocks = block_structure();
  if (blocks == nullptr) {
    throw std::logic_error(id() + ": no block structure");
  }
  const auto cols = blocks->local_cols(robot);
  if (local_q.size() != static_cast<Eigen::Index>(cols.size())) {
    throw DimensionError(id() + ": local configuration size mismatch");
  }
  Vec q = Vec::Zero(dim());
  for (size_t j = 0; j < cols.size(); ++j) q[cols[j]] = local_q[j];
  const Mat a = jacobian_impl(q);
  const auto& rows = blocks->robots[robot].rows;
  Mat out(rows.size(), cols.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < cols.size(); ++c) out(r, c) = a(rows[r], cols[c]);
  }
  return out;
}

double min_singular_value(const Mat& a) {
  if (a.size() == 1) return std::abs(a(0, 0));
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().minCoeff();
}

void require_invertible(const Mat& a, const Vec& q,
                        const ConditioningGuard& guard) {
  const double threshold = guard.min_singular_value_threshold;
  if (a.size() == 1) {
    const double s = std::abs(a(0, 0));
    if (!(s >= threshold)) throw SingularConfiguration(q, s, threshold);
    return;
  }
  const double inv_norm = Eigen::PartialPivLU<Mat>(a).inverse().norm();
  if (std::isfinite(inv_norm) && 1.0 / inv_norm >= threshold) return;
  const double s = min_singular_value(a);
  if (!(s >= threshold)) throw SingularConfiguration(q, s, threshold);
}

Vec solve_with_guard(const Mat& a, const Vec& q, const Vec& rhs,
                     const ConditioningGuard& guard) {
  if (a.rows() != rhs.size()) {
    throw DimensionError("solve_jacobian: rhs size mismatch");
  }
  const double threshold = guard.min_singular_value_threshold;
  if (a.size() == 1) {
    const double s = std::abs(a(0, 0));
    if (!(s >= threshold)) throw SingularConfiguration(q, s, threshold);
    return rhs / a(0, 0);
  }
  // sigma_min >= 1 / ||A^-1||_F, so the SVD is only needed when this bound
  // does not already clear the threshold.
  Eigen::PartialPivLU<Mat> lu(a);
  const Mat inv = lu.inverse();
  const double inv_norm = inv.norm();
  if (!(std::isfinite(inv_norm) && 1.0 / inv_norm >= threshold)) {
    const double s = min_singular_value(a);
    if (!(s >= threshold)) throw SingularConfiguration(q, s, threshold);
  }
  return lu.solve(rhs);
}

Vec solve_jacobian(const SquareSystem& sys, const Vec& q, const Vec& rhs,
                   const ConditioningGuard& guard) {
  return solve_with_guard(sys.eval_jacobian(q), q, rhs, guard);
}

// ---------------------------------------------------------------------------
// PlanarFormation

PlanarFormation::PlanarFormation()
    : PlanarFormation({0.0, 2.0 * std::numbers::pi / 3.0,
                       4.0 * std::numbers::pi / 3.0}) {}

PlanarFormation::PlanarFormation(std::array<double, kRobots> fixed_angles)
    : angles_(fixed_angles) {
  for (int i = 0; i < kRobots; ++i) {
    blocks_.robots.push_back({{2 * i, 2 * i + 1}, {3 + i}});
  }
  blocks_.pivot_cols = {0, 1, 2};
}

Vec PlanarFormation::h_impl(const Vec& q) const {
  Vec p(6);
  for (int i = 0; i < kRobots; ++i) {
    const double th = q[2] + angles_[i];
    p[2 * i] = q[0] + q[3 + i] * std::cos(th);
    p[2 * i + 1] = q[1] + q[3 + i] * std::sin(th);
  }
  return p;
}

Mat PlanarFormation::jacobian_impl(const Vec& q) const {
  Mat a = Mat::Zero(6, 6);
  for (int i = 0; i < kRobots; ++i) {
    const double th = q[2] + angles_[i];
    const double c = std::cos(th);
    const double s = std::sin(th);
    const double d = q[3 + i];
    a(2 * i, 0) = 1.0;
    a(2 * i + 1, 1) = 1.0;
    a(2 * i, 2) = -d * s;
    a(2 * i + 1, 2) = d * c;
    a(2 * i, 3 + i) = c;
    a(2 * i + 1, 3 + i) = s;
  }
  return a;
}

Mat PlanarFormation::local_jacobian(int robot, const Vec& local_q) const {
  if (robot < 0 || robot >= kRobots) {
    throw std::out_of_range("PlanarFormation: robot index out of range");
  }
  if (local_q.size() != 4) {
    throw DimensionError("PlanarFormation: local configuration is (d_i, x_V, y_V, phi_V)");
  }
  // Columns: d_i, x_V, y_V, phi_V.
  const double d = local_q[0];
  const double th = local_q[3] + angles_[robot];
  const double c = std::cos(th);
  const double s = std::sin(th);
  Mat a(2, 4);
  a << c, 1.0, 0.0, -d * s,
       s, 0.0, 1.0, d * c;
  return a;
}

// ---------------------------------------------------------------------------
// ScalarSystem

ScalarSystem::ScalarSystem(double amplitude) : amplitude_(amplitude) {
  if (!(std::abs(amplitude) < 1.0)) {
    throw std::invalid_argument("ScalarSystem: |amplitude| must be < 1");
  }
}

double ScalarSystem::a(double q) const { return 1.0 + amplitude_ * std::sin(q); }

Vec ScalarSystem::h_impl(const Vec& q) const {
  // Antiderivative of a(q) with h(0) = 0.
  Vec p(1);
  p[0] = q[0] + amplitude_ * (1.0 - std::cos(q[0]));
  return p;
}

Mat ScalarSystem::jacobian_impl(const Vec& q) const {
  Mat m(1, 1);
  m(0, 0) = a(q[0]);
  return m;
}

// ---------------------------------------------------------------------------
// ConstantJacobianSystem

ConstantJacobianSystem::ConstantJacobianSystem(Mat a, bool single_robot_layout)
    : a_(std::move(a)) {
  if (a_.rows() == 0 || a_.rows() != a_.cols()) {
    throw DimensionError("ConstantJacobianSystem: matrix must be square and non-empty");
  }
  if (single_robot_layout) {
    BlockStructure b;
    RobotBlock robot;
    for (int i = 0; i < a_.rows(); ++i) {
      robot.rows.push_back(i);
      robot.own_cols.push_back(i);
    }
    b.robots.push_back(std::move(robot));
    blocks_ = std::move(b);
  }
}

ConstantJacobianSystem ConstantJacobianSystem::identity(int n) {
  return ConstantJacobianSystem(Mat::Identity(n, n));
}

Vec ConstantJacobianSystem::h_impl(const Vec& q) const { return a_ * q; }

}  // namespace sikm
