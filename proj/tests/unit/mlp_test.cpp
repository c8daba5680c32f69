#include <gtest/gtest.h>

#include <cmath>

#include "offload/errors.hpp"
#include "offload/mlp.hpp"

using namespace offload;

namespace {

// Central-difference gradient of f over the flat parameters.
template <class F>
Eigen::VectorXd numeric_grad(Eigen::VectorXd& theta, F f, double h = 1e-6) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    double keep = theta[i];
    theta[i] = keep + h;
    double up = f();
    theta[i] = keep - h;
    double down = f();
    theta[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-12, std::max(a.norm(), b.norm()));
}

}  // namespace

TEST(Mlp, ParameterCountAndShapes) {
  Rng rng(1);
  Mlp net({3, 4, 2}, rng);
  EXPECT_EQ(net.params().size(), 3 * 4 + 4 + 4 * 2 + 2);
  Eigen::MatrixXd y = net.forward(Eigen::MatrixXd::Ones(3, 5));
  EXPECT_EQ(y.rows(), 2);
  EXPECT_EQ(y.cols(), 5);
  Mlp zero({3, 4, 2});
  EXPECT_EQ(zero.params().norm(), 0.0);
  EXPECT_EQ(zero.forward(Eigen::MatrixXd::Ones(3, 2)).norm(), 0.0);
}

TEST(Mlp, HandComputedForward) {
  // 1 -> 1 (tanh) -> 1 with w1 = 2, b1 = 0.5, w2 = -3, b2 = 1.
  Mlp net({1, 1, 1});
  net.params() << 2, 0.5, -3, 1;
  Eigen::MatrixXd x(1, 1);
  x << 0.25;
  EXPECT_NEAR(net.forward(x)(0, 0), -3 * std::tanh(2 * 0.25 + 0.5) + 1, 1e-15);
}

TEST(Mlp, BackwardMatchesFiniteDifference) {
  Rng rng(3);
  Mlp net({3, 5, 4, 2}, rng);
  ASSERT_LE(net.params().size(), 64);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 6);
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(2, 6);
  auto loss = [&] { return (net.forward(x).array() * w.array()).sum(); };
  Mlp::Cache cache;
  net.forward(x, &cache);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.params().size());
  Eigen::MatrixXd dx = net.backward(cache, w, grad);
  EXPECT_LT(rel_err(grad, numeric_grad(net.params(), loss)), 1e-6);

  // Input gradient.
  Eigen::VectorXd flat = Eigen::Map<Eigen::VectorXd>(x.data(), x.size());
  auto loss_x = [&] {
    Eigen::MatrixXd xx = Eigen::Map<Eigen::MatrixXd>(flat.data(), 3, 6);
    return (net.forward(xx).array() * w.array()).sum();
  };
  Eigen::VectorXd dx_flat = Eigen::Map<Eigen::VectorXd>(dx.data(), dx.size());
  EXPECT_LT(rel_err(dx_flat, numeric_grad(flat, loss_x)), 1e-6);
}

TEST(Optimizer, SgdStep) {
  Optimizer opt(OptimizerKind::kSgd, 2, 0.1);
  Eigen::VectorXd theta(2), g(2);
  theta << 1, 2;
  g << 10, -5;
  opt.step(theta, g);
  EXPECT_NEAR(theta[0], 0, 1e-15);
  EXPECT_NEAR(theta[1], 2.5, 1e-15);
}

TEST(Optimizer, AdamFirstStepIsLearningRateTimesSign) {
  Optimizer opt(OptimizerKind::kAdam, 2, 0.01);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(2), g(2);
  g << 3, -0.2;
  opt.step(theta, g);
  EXPECT_NEAR(theta[0], -0.01, 1e-8);
  EXPECT_NEAR(theta[1], 0.01, 1e-8);
}

TEST(Optimizer, Names) {
  EXPECT_EQ(optimizer_from_name("adam"), OptimizerKind::kAdam);
  EXPECT_EQ(optimizer_from_name("sgd"), OptimizerKind::kSgd);
  EXPECT_THROW(optimizer_from_name("rmsprop"), DomainError);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(1);
  EXPECT_THROW(soft_update(t, t, 0.0), DomainError);
}

TEST(SoftUpdate, Arithmetic) {
  Eigen::VectorXd target = Eigen::VectorXd::Zero(3), online = Eigen::VectorXd::Ones(3);
  soft_update(target, online, 0.5);
  soft_update(target, online, 0.5);
  EXPECT_NEAR(target[0], 0.75, 1e-15);
  soft_update(target, online, 1.0);
  EXPECT_EQ(target, online);
}

TEST(SoftUpdate, LagsBetweenTargetAndOnline) {
  Rng rng(9);
  Eigen::VectorXd target = Eigen::VectorXd::Random(8), online = Eigen::VectorXd::Random(8);
  double gap = (target - online).norm();
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd before = target;
    soft_update(target, online, 0.1);
    for (int k = 0; k < 8; ++k) {
      EXPECT_GE(target[k], std::min(before[k], online[k]) - 1e-15);
      EXPECT_LE(target[k], std::max(before[k], online[k]) + 1e-15);
    }
    double g = (target - online).norm();
    EXPECT_LE(g, gap);
    gap = g;
  }
}

TEST(Softmax, SimplexAndConstants) {
  Eigen::MatrixXd logits(4, 3);
  logits << 1, 800, -5, 1, -800, -5, 1, 0, -5, 1, 3, -5;
  Eigen::MatrixXd p = softmax_columns(logits);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(p.col(c).sum(), 1.0, 1e-12);
    EXPECT_GE(p.col(c).minCoeff(), 0.0);
  }
  for (int r = 0; r < 4; ++r) EXPECT_NEAR(p(r, 0), 0.25, 1e-15);
}
