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

// Square multi-robot kinematic systems: p = h(q), p_dot = A_q q_dot, with the
// task and configuration spaces of equal dimension.

#pragma once

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sikm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a Jacobian inversion is requested at a configuration whose
// smallest singular value is below the guard threshold.
class SingularConfiguration : public std::runtime_error {
 public:
  SingularConfiguration(Vec q, double min_singular_value, double threshold);

  const Vec& configuration() const { return q_; }
  double min_singular_value() const { return sigma_min_; }

 private:
  Vec q_;
  double sigma_min_;
};

struct ConditioningGuard {
  double min_singular_value_threshold = 1e-8;
  // Radius around the reference within which invertibility is assumed.
  double distance = 1.0;
};

// Per-robot layout of a bordered block-diagonal Jacobian. Robot i drives the
// task rows `rows` and reads its own configuration columns `own_cols` plus the
// shared pivot columns.
struct RobotBlock {
  std::vector<int> rows;
  std::vector<int> own_cols;
};

struct BlockStructure {
  std::vector<RobotBlock> robots;
  std::vector<int> pivot_cols;

  int num_robots() const { return static_cast<int>(robots.size()); }
  // Local coordinate vector of robot i: own columns followed by pivot columns.
  Vec gather(int robot, const Vec& q) const;
  std::vector<int> local_cols(int robot) const;
};

class SquareSystem {
 public:
  virtual ~SquareSystem() = default;

  virtual int dim() const = 0;
  virtual std::string id() const = 0;

  // Task vector p = h(q).
  Vec eval_h(const Vec& q) const;
  // Square Jacobian A_q.
  Mat eval_jacobian(const Vec& q) const;

  virtual const BlockStructure* block_structure() const { return nullptr; }

  // Jacobian rows of robot `robot` restricted to its local columns (own, then
  // pivot), evaluated from local coordinates only. The default implementation
  // embeds the local coordinates in an otherwise-zero configuration, which is
  // exact whenever the Jacobian really has the declared block structure.
  virtual Mat local_jacobian(int robot, const Vec& local_q) const;

 protected:
  virtual Vec h_impl(const Vec& q) const = 0;
  virtual Mat jacobian_impl(const Vec& q) const = 0;

  void check_dim(const Vec& q) const;
};

// A_q^{-1} rhs, raising SingularConfiguration when the guard fails.
Vec solve_jacobian(const SquareSystem& sys, const Vec& q, const Vec& rhs,
                   const ConditioningGuard& guard = {});

// Same as above with a Jacobian that has already been evaluated at q.
Vec solve_with_guard(const Mat& a, const Vec& q, const Vec& rhs,
                     const ConditioningGuard& guard);

double min_singular_value(const Mat& a);

// Throws SingularConfiguration unless min_singular_value(a) clears the guard.
void require_invertible(const Mat& a, const Vec& q,
                        const ConditioningGuard& guard);

// Three planar robots at fixed bearings phi_i around a pivot V.
// Configuration (x_V, y_V, phi_V, d_1, d_2, d_3); task (x_1, y_1, ..., y_3).
class PlanarFormation final : public SquareSystem {
 public:
  static constexpr int kRobots = 3;

  PlanarFormation();
  explicit PlanarFormation(std::array<double, kRobots> fixed_angles);

  int dim() const override { return 6; }
  std::string id() const override { return "planar_formation"; }
  const BlockStructure* block_structure() const override { return &blocks_; }
  Mat local_jacobian(int robot, const Vec& local_q) const override;

  const std::array<double, kRobots>& fixed_angles() const { return angles_; }

 protected:
  Vec h_impl(const Vec& q) const override;
  Mat jacobian_impl(const Vec& q) const override;

 private:
  std::array<double, kRobots> angles_;
  BlockStructure blocks_;
};

// One-dimensional system with A(q) = 1 + amplitude * sin(q).
class ScalarSystem final : public SquareSystem {
 public:
  explicit ScalarSystem(double amplitude = 0.5);

  int dim() const override { return 1; }
  std::string id() const override { return "scalar"; }

  double a(double q) const;
  double amplitude() const { return amplitude_; }

 protected:
  Vec h_impl(const Vec& q) const override;
  Mat jacobian_impl(const Vec& q) const override;

 private:
  double amplitude_;
};

// h(q) = A q with a constant invertible A. With `single_robot_layout`, one
// robot owns every row and column and there is no pivot.
class ConstantJacobianSystem final : public SquareSystem {
 public:
  explicit ConstantJacobianSystem(Mat a, bool single_robot_layout = false);
  static ConstantJacobianSystem identity(int n);

  int dim() const override { return static_cast<int>(a_.rows()); }
  std::string id() const override { return "constant_jacobian"; }
  const BlockStructure* block_structure() const override {
    return blocks_ ? &*blocks_ : nullptr;
  }

  const Mat& matrix() const { return a_; }

 protected:
  Vec h_impl(const Vec& q) const override;
  Mat jacobian_impl(const Vec&) const override { return a_; }

 private:
  Mat a_;
  std::optional<BlockStructure> blocks_;
};

}  // namespace sikm
