#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "pcm/common.hpp"

namespace pcm::nn {

enum class ParamKind { Weight, Bias };

// One named parameter tensor with its gradient accumulator and Adam moments.
// All four buffers always share the same shape.
struct Param {
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;
  ParamKind kind = ParamKind::Weight;
};

class ParamStore {
 public:
  Param& add(const std::string& name, int rows, int cols, ParamKind kind) {
    check(rows > 0 && cols > 0, "parameter dims must be positive: " + name);
    auto [it, inserted] = entries_.emplace(name, Param{});
    check(inserted, "duplicate parameter name: " + name);
    Param& p = it->second;
    p.value = Matrix::Zero(rows, cols);
    p.grad = Matrix::Zero(rows, cols);
    p.m = Matrix::Zero(rows, cols);
    p.v = Matrix::Zero(rows, cols);
    p.kind = kind;
    return p;
  }

  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  Param& at(const std::string& name) {
    auto it = entries_.find(name);
    check(it != entries_.end(), "unknown parameter: " + name);
    return it->second;
  }

  const Param& at(const std::string& name) const {
    auto it = entries_.find(name);
    check(it != entries_.end(), "unknown parameter: " + name);
    return it->second;
  }

  // Deterministically ordered (std::map keeps names sorted).
  std::map<std::string, Param>& entries() { return entries_; }
  const std::map<std::string, Param>& entries() const { return entries_; }

  std::size_t tensor_count() const { return entries_.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, p] : entries_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  void zero_grads() {
    for (auto& [name, p] : entries_) p.grad.setZero();
  }

  double grad_norm() const {
    double sq = 0.0;
    for (const auto& [name, p] : entries_) sq += p.grad.squaredNorm();
    return std::sqrt(sq);
  }

  // Global-norm clipping applied before the optimizer step.
  void clip_grad_norm(double max_norm) {
    const double norm = grad_norm();
    if (norm > max_norm && norm > 0.0) {
      const double scale = max_norm / norm;
      for (auto& [name, p] : entries_) p.grad *= scale;
    }
  }

  bool all_finite() const {
    for (const auto& [name, p] : entries_) {
      if (!p.value.allFinite()) return false;
    }
    return true;
  }

  // Weights drawn uniform in [-s, s] with s = 1/sqrt(fan_in); biases stay zero.
  void init_uniform(Rng& rng) {
    for (auto& [name, p] : entries_) {
      if (p.kind == ParamKind::Bias) {
        p.value.setZero();
        continue;
      }
      const double s = 1.0 / std::sqrt(static_cast<double>(p.value.cols()));
      std::uniform_real_distribution<double> dist(-s, s);
      for (Eigen::Index i = 0; i < p.value.rows(); ++i)
        for (Eigen::Index j = 0; j < p.value.cols(); ++j) p.value(i, j) = dist(rng);
    }
  }

  void copy_values_from(const ParamStore& other) {
    for (auto& [name, p] : entries_) {
      const Param& q = other.at(name);
      check(q.value.rows() == p.value.rows() && q.value.cols() == p.value.cols(),
            "shape mismatch copying parameter " + name);
      p.value = q.value;
      p.m = q.m;
      p.v = q.v;
    }
  }

 private:
  std::map<std::string, Param> entries_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    check(lr > 0.0, "adam: lr must be positive");
    check(beta1 > 0.0 && beta1 < 1.0, "adam: beta1 must be in (0,1)");
    check(beta2 > 0.0 && beta2 < 1.0, "adam: beta2 must be in (0,1)");
    check(eps > 0.0, "adam: eps must be positive");
  }
};

// Bias-corrected Adam step. Gradients are consumed (cleared) by the update.
inline void adam_update(ParamStore& ps, const AdamConfig& cfg, std::int64_t step) {
  cfg.validate();
  check(step >= 1, "adam: step must be >= 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (auto& [name, p] : ps.entries()) {
    p.m = cfg.beta1 * p.m + (1.0 - cfg.beta1) * p.grad;
    p.v = cfg.beta2 * p.v + (1.0 - cfg.beta2) * p.grad.cwiseProduct(p.grad);
    const Matrix m_hat = p.m / bc1;
    const Matrix v_hat = p.v / bc2;
    p.value.array() -= cfg.lr * m_hat.array() / (v_hat.array().sqrt() + cfg.eps);
    p.grad.setZero();
  }
}

// Stateful wrapper owning the step counter.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  void step(ParamStore& ps) { adam_update(ps, cfg_, ++step_count_); }

  const AdamConfig& config() const { return cfg_; }
  std::int64_t step_count() const { return step_count_; }
  void set_step_count(std::int64_t n) { step_count_ = n; }

 private:
  AdamConfig cfg_;
  std::int64_t step_count_ = 0;
};

}  // namespace pcm::nn
