#include "offload/mlp.hpp"

#include <cmath>

#include "offload/errors.hpp"

namespace offload {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw DomainError("network needs an input and an output layer");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
}

Mlp::Mlp(std::vector<int> sizes, Rng& rng) : Mlp(std::move(sizes)) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    double stddev = std::sqrt(2.0 / (sizes_[l] + sizes_[l + 1]));
    std::normal_distribution<double> dist(0.0, stddev);
    std::size_t n = static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l];
    for (std::size_t i = 0; i < n; ++i) theta_[offsets_[l] + i] = dist(rng);
  }
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weights(std::size_t l) const {
  return {theta_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t l) const {
  return {theta_.data() + offsets_[l] + static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l],
          sizes_[l + 1]};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (x.rows() != sizes_.front()) throw DomainError("network input has the wrong width");
  const std::size_t layers = sizes_.size() - 1;
  Eigen::MatrixXd a = x;
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(a);
  }
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = weights(l) * a;
    z.colwise() += bias(l);
    if (l + 1 < layers) z = z.array().tanh();
    a = std::move(z);
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

Eigen::MatrixXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dy,
                              Eigen::VectorXd& grad) const {
  const std::size_t layers = sizes_.size() - 1;
  Eigen::MatrixXd delta = dy;
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd& input = cache.activations[l];
    const std::size_t rows = sizes_[l + 1], cols = sizes_[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], rows, cols);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + rows * cols, rows);
    gw.noalias() += delta * input.transpose();
    gb += delta.rowwise().sum();
    Eigen::MatrixXd back = weights(l).transpose() * delta;
    if (l > 0) back = back.array() * (1.0 - input.array().square());
    delta = std::move(back);
  }
  return delta;
}

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw DomainError("unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(OptimizerKind kind, std::size_t size, double learning_rate)
    : kind_(kind), lr_(learning_rate) {
  m_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  v_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
}

void Optimizer::step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
  if (kind_ == OptimizerKind::kSgd) {
    theta -= lr_ * grad;
    return;
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void soft_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("soft update rate must lie in (0,1]");
  target = tau * online + (1.0 - tau) * target;
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    Eigen::VectorXd e = (logits.col(c).array() - logits.col(c).maxCoeff()).exp();
    out.col(c) = e / e.sum();
  }
  return out;
}

}  // namespace offload
