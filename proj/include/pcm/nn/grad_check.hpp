#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "pcm/nn/param_store.hpp"

namespace pcm::nn {

// Central finite-difference check. Expects the analytic gradients to already
// sit in ps (one forward + backward done by the caller); `loss` must be a pure
// forward evaluation of the same scalar. Returns the max over parameters of
//   |analytic - numeric| / max(|analytic|, |numeric|, eps).
inline double grad_check(ParamStore& ps, const std::function<double()>& loss,
                         double fd_step = 1e-5, double eps = 1e-6) {
  double max_rel = 0.0;
  for (auto& [name, p] : ps.entries()) {
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
        const double orig = p.value(i, j);
        p.value(i, j) = orig + fd_step;
        const double lp = loss();
        p.value(i, j) = orig - fd_step;
        const double lm = loss();
        p.value(i, j) = orig;
        const double numeric = (lp - lm) / (2.0 * fd_step);
        const double analytic = p.grad(i, j);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), eps});
        max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
      }
    }
  }
  return max_rel;
}

}  // namespace pcm::nn
