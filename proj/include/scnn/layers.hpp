#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "scnn/error.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

// Valid (no padding) 1-D convolution over a token-feature matrix.
// input: [len x in_features], kernels: [maps x width x in_features],
// bias: [maps]. Output: [(len - width + 1) x maps].
inline Tensor conv1d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  if (input.rank() != 2 || kernels.rank() != 3 || bias.rank() != 1) {
    throw ShapeError("conv1d expects input [LxF], kernels [MxKxF], bias [M]");
  }
  const std::size_t len = input.dim(0);
  const std::size_t feats = input.dim(1);
  const std::size_t maps = kernels.dim(0);
  const std::size_t width = kernels.dim(1);
  if (kernels.dim(2) != feats) {
    throw ShapeError("conv1d kernel feature dim " + std::to_string(kernels.dim(2)) +
                     " does not match input feature dim " + std::to_string(feats));
  }
  if (bias.dim(0) != maps) {
    throw ShapeError("conv1d bias length " + std::to_string(bias.dim(0)) +
                     " does not match map count " + std::to_string(maps));
  }
  if (len < width) {
    throw ShapeError("conv1d input length " + std::to_string(len) +
                     " shorter than kernel width " + std::to_string(width));
  }
  const std::size_t out_len = len - width + 1;
  Tensor out({out_len, maps});
  const std::size_t window = width * feats;
  for (std::size_t j = 0; j < out_len; ++j) {
    const double* in = input.row(j);  // rows j..j+width-1 are contiguous
    double* out_row = out.row(j);
    for (std::size_t h = 0; h < maps; ++h) {
      const double* k = kernels.data() + h * window;
      double acc = bias[h];
      for (std::size_t t = 0; t < window; ++t) acc += k[t] * in[t];
      out_row[h] = acc;
    }
  }
  return out;
}

// Gradients of conv1d_forward. grad_out: [(len-width+1) x maps].
// grad_input may be null when the input is a constant.
inline void conv1d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out,
                            Tensor& grad_kernels, Tensor& grad_bias, Tensor* grad_input) {
  const std::size_t feats = input.dim(1);
  const std::size_t maps = kernels.dim(0);
  const std::size_t width = kernels.dim(1);
  const std::size_t out_len = grad_out.dim(0);
  const std::size_t window = width * feats;
  grad_kernels = Tensor(kernels.shape());
  grad_bias = Tensor({maps});
  if (grad_input) {
    *grad_input = Tensor(input.shape());
  }
  for (std::size_t j = 0; j < out_len; ++j) {
    const double* in = input.row(j);
    const double* g_row = grad_out.row(j);
    double* gin = grad_input ? grad_input->row(j) : nullptr;
    for (std::size_t h = 0; h < maps; ++h) {
      const double g = g_row[h];
      if (g == 0.0) continue;
      grad_bias[h] += g;
      double* gk = grad_kernels.data() + h * window;
      const double* k = kernels.data() + h * window;
      for (std::size_t t = 0; t < window; ++t) gk[t] += g * in[t];
      if (gin) {
        for (std::size_t t = 0; t < window; ++t) gin[t] += g * k[t];
      }
    }
  }
}

// Non-overlapping max pooling along the time axis; the final window may
// be shorter. map: [len x feats] -> [ceil(len/width) x feats].
inline Tensor maxpool1d(const Tensor& map, std::size_t pool_width) {
  if (map.rank() != 2) throw ShapeError("maxpool1d expects a [LxF] map");
  if (pool_width < 1) throw ConfigError("maxpool1d pool width must be >= 1");
  const std::size_t len = map.dim(0);
  const std::size_t feats = map.dim(1);
  const std::size_t out_len = (len + pool_width - 1) / pool_width;
  Tensor out({out_len, feats});
  for (std::size_t w = 0; w < out_len; ++w) {
    const std::size_t begin = w * pool_width;
    const std::size_t end = std::min(begin + pool_width, len);
    double* out_row = out.row(w);
    for (std::size_t f = 0; f < feats; ++f) out_row[f] = map.at(begin, f);
    for (std::size_t r = begin + 1; r < end; ++r) {
      const double* in = map.row(r);
      for (std::size_t f = 0; f < feats; ++f) {
        if (in[f] > out_row[f]) out_row[f] = in[f];
      }
    }
  }
  return out;
}

// Pooling with argmax bookkeeping for the backward pass. Ties go to the
// lowest row index.
inline Tensor maxpool1d_with_indices(const Tensor& map, std::size_t pool_width,
                                     std::vector<std::size_t>& argmax_rows) {
  Tensor out = maxpool1d(map, pool_width);
  const std::size_t len = map.dim(0);
  const std::size_t feats = map.dim(1);
  argmax_rows.assign(out.size(), 0);
  for (std::size_t w = 0; w < out.dim(0); ++w) {
    const std::size_t begin = w * pool_width;
    const std::size_t end = std::min(begin + pool_width, len);
    for (std::size_t f = 0; f < feats; ++f) {
      std::size_t best = begin;
      double best_v = map.at(begin, f);
      for (std::size_t r = begin + 1; r < end; ++r) {
        if (map.at(r, f) > best_v) {
          best_v = map.at(r, f);
          best = r;
        }
      }
      argmax_rows[w * feats + f] = best;
    }
  }
  return out;
}

inline Tensor maxpool1d_backward(const Tensor& map, const Tensor& grad_out,
                                 const std::vector<std::size_t>& argmax_rows) {
  Tensor grad_in(map.shape());
  const std::size_t feats = map.dim(1);
  for (std::size_t w = 0; w < grad_out.dim(0); ++w) {
    for (std::size_t f = 0; f < feats; ++f) {
      grad_in.at(argmax_rows[w * feats + f], f) += grad_out.at(w, f);
    }
  }
  return grad_in;
}

// Elementwise max(0, x). Subgradient at 0 is taken as 0.
inline Tensor relu(const Tensor& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

inline Tensor relu_backward(const Tensor& pre_activation, const Tensor& grad_out) {
  Tensor grad_in(pre_activation.shape());
  for (std::size_t i = 0; i < grad_in.size(); ++i) {
    grad_in[i] = pre_activation[i] > 0.0 ? grad_out[i] : 0.0;
  }
  return grad_in;
}

// Dense layer: output = weights * input + bias.
// input: [m], weights: [u x m], bias: [u].
inline Tensor fully_connected_forward(const Tensor& input, const Tensor& weights,
                                      const Tensor& bias) {
  if (input.rank() != 1 || weights.rank() != 2 || bias.rank() != 1) {
    throw ShapeError("fully_connected expects input [m], weights [uxm], bias [u]");
  }
  if (weights.dim(1) != input.dim(0) || weights.dim(0) != bias.dim(0)) {
    throw ShapeError("fully_connected shape mismatch: weights " + weights.shape_string() +
                     " vs input " + input.shape_string());
  }
  const std::size_t units = weights.dim(0);
  const std::size_t m = input.dim(0);
  Tensor out({units});
  for (std::size_t u = 0; u < units; ++u) {
    const double* w = weights.row(u);
    double acc = bias[u];
    for (std::size_t i = 0; i < m; ++i) acc += w[i] * input[i];
    out[u] = acc;
  }
  return out;
}

inline void fully_connected_backward(const Tensor& input, const Tensor& weights,
                                     const Tensor& grad_out, Tensor& grad_weights,
                                     Tensor& grad_bias, Tensor* grad_input) {
  const std::size_t units = weights.dim(0);
  const std::size_t m = weights.dim(1);
  grad_weights = Tensor(weights.shape());
  grad_bias = Tensor({units});
  if (grad_input) *grad_input = Tensor({m});
  for (std::size_t u = 0; u < units; ++u) {
    const double g = grad_out[u];
    grad_bias[u] = g;
    double* gw = grad_weights.row(u);
    const double* w = weights.row(u);
    for (std::size_t i = 0; i < m; ++i) gw[i] = g * input[i];
    if (grad_input) {
      for (std::size_t i = 0; i < m; ++i) (*grad_input)[i] += g * w[i];
    }
  }
}

// Max-shifted softmax with cross-entropy loss against a gold class.
inline std::pair<Tensor, double> softmax_cross_entropy(const Tensor& logits, std::size_t gold) {
  if (logits.rank() != 1) throw ShapeError("softmax expects a logit vector");
  const std::size_t classes = logits.dim(0);
  if (gold >= classes) {
    throw DataError("gold label " + std::to_string(gold) + " out of range for " +
                    std::to_string(classes) + " classes");
  }
  double max_logit = logits[0];
  for (std::size_t i = 1; i < classes; ++i) max_logit = std::max(max_logit, logits[i]);
  Tensor probs({classes});
  double denom = 0.0;
  for (std::size_t i = 0; i < classes; ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    denom += probs[i];
  }
  for (std::size_t i = 0; i < classes; ++i) probs[i] /= denom;
  const double log_prob_gold = (logits[gold] - max_logit) - std::log(denom);
  return {std::move(probs), -log_prob_gold};
}

// d(loss)/d(logits) = probs - onehot(gold).
inline Tensor softmax_cross_entropy_backward(const Tensor& probs, std::size_t gold) {
  Tensor grad(probs.shape());
  for (std::size_t i = 0; i < probs.size(); ++i) grad[i] = probs[i];
  grad[gold] -= 1.0;
  return grad;
}

}  // namespace scnn
