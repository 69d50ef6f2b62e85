#pragma once

#include <string>
#include <utility>

#include "pcm/common.hpp"
#include "pcm/nn/param_store.hpp"

namespace pcm::nn {

enum class LayerKind { FullyConnected, Gru };
enum class Activation { None, Tanh };

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  LayerKind kind = LayerKind::FullyConnected;
  Activation act = Activation::None;

  void validate() const {
    check(in_dim > 0 && out_dim > 0, "layer dims must be positive");
    check(kind != LayerKind::Gru || act == Activation::None,
          "GRU layers carry no outer activation");
  }
};

inline Matrix sigmoid(const Matrix& a) {
  return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

// Batched fully-connected layer. Columns are samples: y = act(W x + b).
struct FcCache {
  Matrix x;  // input
  Matrix y;  // post-activation output
};

class FcLayer {
 public:
  FcLayer() = default;
  FcLayer(ParamStore& ps, const std::string& prefix, int in_dim, int out_dim, Activation act)
      : spec_{in_dim, out_dim, LayerKind::FullyConnected, act},
        w_(prefix + ".W"),
        b_(prefix + ".b") {
    spec_.validate();
    ps.add(w_, out_dim, in_dim, ParamKind::Weight);
    ps.add(b_, out_dim, 1, ParamKind::Bias);
  }

  const LayerSpec& spec() const { return spec_; }

  Matrix forward(const Matrix& x, const ParamStore& ps, FcCache* cache = nullptr) const {
    check(x.rows() == spec_.in_dim,
          "fc_forward: input dim mismatch for " + w_ + ": got " + std::to_string(x.rows()) +
              ", expected " + std::to_string(spec_.in_dim));
    const Param& W = ps.at(w_);
    const Param& b = ps.at(b_);
    Matrix y = W.value * x;
    y.colwise() += Vector(b.value.col(0));
    if (spec_.act == Activation::Tanh) y = y.array().tanh().matrix();
    if (cache) {
      cache->x = x;
      cache->y = y;
    }
    return y;
  }

  // Accumulates parameter gradients; returns dL/dx.
  Matrix backward(const Matrix& dy, const FcCache& cache, ParamStore& ps) const {
    check(dy.rows() == spec_.out_dim && dy.cols() == cache.y.cols(),
          "fc backward: gradient shape mismatch for " + w_);
    Matrix dpre = dy;
    if (spec_.act == Activation::Tanh)
      dpre = (dy.array() * (1.0 - cache.y.array().square())).matrix();
    Param& W = ps.at(w_);
    Param& b = ps.at(b_);
    W.grad.noalias() += dpre * cache.x.transpose();
    b.grad.col(0) += dpre.rowwise().sum();
    return W.value.transpose() * dpre;
  }

 private:
  LayerSpec spec_;
  std::string w_, b_;
};

// Gated recurrent unit, batched over columns. Convention:
//   z  = sigmoid(Wz x + Uz h + bz)
//   r  = sigmoid(Wr x + Ur h + br)
//   n  = tanh(Wn x + r .* (Un h + bn))
//   h' = (1 - z) .* n + z .* h
struct GruCache {
  Matrix x, h;   // step inputs
  Matrix z, r, n;
  Matrix un;     // Un h + bn (pre reset gating)
};

class GruCell {
 public:
  GruCell() = default;
  GruCell(ParamStore& ps, const std::string& prefix, int in_dim, int out_dim)
      : spec_{in_dim, out_dim, LayerKind::Gru, Activation::None} {
    spec_.validate();
    const std::string names[3] = {"z", "r", "n"};
    for (int i = 0; i < 3; ++i) {
      w_[i] = prefix + ".W" + names[i];
      u_[i] = prefix + ".U" + names[i];
      b_[i] = prefix + ".b" + names[i];
      ps.add(w_[i], out_dim, in_dim, ParamKind::Weight);
      ps.add(u_[i], out_dim, out_dim, ParamKind::Weight);
      ps.add(b_[i], out_dim, 1, ParamKind::Bias);
    }
  }

  const LayerSpec& spec() const { return spec_; }

  Matrix step(const Matrix& x, const Matrix& h, const ParamStore& ps,
              GruCache* cache = nullptr) const {
    check(x.rows() == spec_.in_dim, "gru_step: input dim mismatch");
    check(h.rows() == spec_.out_dim, "gru_step: hidden dim mismatch");
    check(x.cols() == h.cols(), "gru_step: batch size mismatch between input and hidden");
    const auto gate_pre = [&](int i) {
      Matrix a = ps.at(w_[i]).value * x + ps.at(u_[i]).value * h;
      a.colwise() += Vector(ps.at(b_[i]).value.col(0));
      return a;
    };
    Matrix z = sigmoid(gate_pre(0));
    Matrix r = sigmoid(gate_pre(1));
    Matrix un = ps.at(u_[2]).value * h;
    un.colwise() += Vector(ps.at(b_[2]).value.col(0));
    Matrix n = (ps.at(w_[2]).value * x + r.cwiseProduct(un)).array().tanh().matrix();
    Matrix h_next = (1.0 - z.array()) * n.array() + z.array() * h.array();
    if (cache) {
      cache->x = x;
      cache->h = h;
      cache->z = z;
      cache->r = r;
      cache->n = n;
      cache->un = un;
    }
    return h_next;
  }

  // Accumulates parameter gradients; returns (dL/dx, dL/dh_prev).
  std::pair<Matrix, Matrix> backward(const Matrix& dh_next, const GruCache& c,
                                     ParamStore& ps) const {
    const Matrix dz = dh_next.cwiseProduct(c.h - c.n);
    const Matrix dn = (dh_next.array() * (1.0 - c.z.array())).matrix();
    Matrix dh = dh_next.cwiseProduct(c.z);

    const Matrix dan = (dn.array() * (1.0 - c.n.array().square())).matrix();
    const Matrix dr = dan.cwiseProduct(c.un);
    const Matrix dun = dan.cwiseProduct(c.r);
    const Matrix daz = (dz.array() * c.z.array() * (1.0 - c.z.array())).matrix();
    const Matrix dar = (dr.array() * c.r.array() * (1.0 - c.r.array())).matrix();

    Matrix dx = Matrix::Zero(spec_.in_dim, dh_next.cols());
    const Matrix* pre_grads[3] = {&daz, &dar, &dan};
    for (int i = 0; i < 3; ++i) {
      const Matrix& g = *pre_grads[i];
      ps.at(w_[i]).grad.noalias() += g * c.x.transpose();
      dx.noalias() += ps.at(w_[i]).value.transpose() * g;
    }
    // Recurrent paths: z and r gates see h directly; n sees it through r .* (Un h + bn).
    ps.at(u_[0]).grad.noalias() += daz * c.h.transpose();
    ps.at(u_[1]).grad.noalias() += dar * c.h.transpose();
    ps.at(u_[2]).grad.noalias() += dun * c.h.transpose();
    ps.at(b_[0]).grad.col(0) += daz.rowwise().sum();
    ps.at(b_[1]).grad.col(0) += dar.rowwise().sum();
    ps.at(b_[2]).grad.col(0) += dun.rowwise().sum();
    dh.noalias() += ps.at(u_[0]).value.transpose() * daz;
    dh.noalias() += ps.at(u_[1]).value.transpose() * dar;
    dh.noalias() += ps.at(u_[2]).value.transpose() * dun;
    return {std::move(dx), std::move(dh)};
  }

 private:
  LayerSpec spec_;
  std::string w_[3], u_[3], b_[3];
};

}  // namespace pcm::nn
