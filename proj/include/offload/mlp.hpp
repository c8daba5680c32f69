#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

namespace offload {

using Rng = std::mt19937_64;

// Fully connected net, tanh on hidden layers, linear output. All weights live
// in one flat vector so optimisers, soft updates and checkpoints see a single
// parameter array. Batches are column-major: one sample per column.
class Mlp {
 public:
  Mlp() = default;
  // Xavier-normal weights, zero biases.
  Mlp(std::vector<int> sizes, Rng& rng);
  // All-zero parameters.
  explicit Mlp(std::vector<int> sizes);

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, hidden layers, output
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;

  // Accumulates dL/dtheta into grad and returns dL/dx.
  Eigen::MatrixXd backward(const Cache& cache, const Eigen::MatrixXd& dy,
                           Eigen::VectorXd& grad) const;

  const std::vector<int>& sizes() const { return sizes_; }
  Eigen::VectorXd& params() { return theta_; }
  const Eigen::VectorXd& params() const { return theta_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  Eigen::Map<const Eigen::MatrixXd> weights(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  Eigen::VectorXd theta_;
};

enum class OptimizerKind { kAdam, kSgd };

OptimizerKind optimizer_from_name(const std::string& name);

class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, std::size_t size, double learning_rate);
  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad);

 private:
  OptimizerKind kind_ = OptimizerKind::kAdam;
  double lr_ = 1e-3;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

// target <- tau * online + (1 - tau) * target
void soft_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double tau);

// Column-wise softmax.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

}  // namespace offload
