#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pcm/nn/param_store.hpp"

namespace pcm::nn {

// Text parameter container: hexfloat values round-trip bit-exactly.
inline constexpr const char* kParamsMagic = "pcmlab-params";
inline constexpr int kParamsVersion = 1;

inline std::string hex_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", x);
  return buf;
}

inline double parse_double(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << hex_double(m(i, j));
    }
    os << '\n';
  }
}

inline Matrix read_matrix(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string tok;
      check(static_cast<bool>(is >> tok), "checkpoint: truncated matrix block");
      m(i, j) = parse_double(tok);
    }
  return m;
}

inline void save_params(std::ostream& os, const ParamStore& ps, const AdamConfig& adam,
                        std::int64_t adam_step) {
  os << kParamsMagic << " v" << kParamsVersion << '\n';
  os << "adam " << hex_double(adam.lr) << ' ' << hex_double(adam.beta1) << ' '
     << hex_double(adam.beta2) << ' ' << hex_double(adam.eps) << ' ' << adam_step << '\n';
  os << "tensors " << ps.tensor_count() << '\n';
  for (const auto& [name, p] : ps.entries()) {
    os << "param " << name << ' ' << p.value.rows() << ' ' << p.value.cols() << ' '
       << (p.kind == ParamKind::Weight ? "weight" : "bias") << '\n';
    write_matrix(os, p.value);
    write_matrix(os, p.m);
    write_matrix(os, p.v);
  }
}

struct LoadedParams {
  AdamConfig adam;
  std::int64_t adam_step = 0;
};

// Rebuilds the store from the stream (shapes come from the file).
inline LoadedParams load_params(std::istream& is, ParamStore& ps) {
  std::string magic, version;
  check(static_cast<bool>(is >> magic >> version), "checkpoint: missing header");
  check(magic == kParamsMagic, "checkpoint: bad magic '" + magic + "'");
  check(version == "v" + std::to_string(kParamsVersion),
        "checkpoint: unsupported version '" + version + "'");
  LoadedParams out;
  std::string tag;
  check(static_cast<bool>(is >> tag) && tag == "adam", "checkpoint: missing adam line");
  std::string lr, b1, b2, eps;
  check(static_cast<bool>(is >> lr >> b1 >> b2 >> eps >> out.adam_step),
        "checkpoint: malformed adam line");
  out.adam.lr = parse_double(lr);
  out.adam.beta1 = parse_double(b1);
  out.adam.beta2 = parse_double(b2);
  out.adam.eps = parse_double(eps);

  std::size_t n = 0;
  check(static_cast<bool>(is >> tag >> n) && tag == "tensors",
        "checkpoint: missing tensors line");
  for (std::size_t i = 0; i < n; ++i) {
    std::string name, kind;
    Eigen::Index rows = 0, cols = 0;
    check(static_cast<bool>(is >> tag >> name >> rows >> cols >> kind) && tag == "param",
          "checkpoint: malformed param header");
    Param& p = ps.has(name)
                   ? ps.at(name)
                   : ps.add(name, static_cast<int>(rows), static_cast<int>(cols),
                            kind == "weight" ? ParamKind::Weight : ParamKind::Bias);
    check(p.value.rows() == rows && p.value.cols() == cols,
          "checkpoint: shape mismatch for parameter " + name);
    p.value = read_matrix(is, rows, cols);
    p.m = read_matrix(is, rows, cols);
    p.v = read_matrix(is, rows, cols);
  }
  return out;
}

}  // namespace pcm::nn
