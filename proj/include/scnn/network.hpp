#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "scnn/error.hpp"
#include "scnn/layers.hpp"
#include "scnn/rng.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

enum class LayerKind { Convolution1D, MaxPool1D, ReLU, FullyConnected, Softmax };

inline const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Convolution1D: return "Convolution1D";
    case LayerKind::MaxPool1D: return "MaxPool1D";
    case LayerKind::ReLU: return "ReLU";
    case LayerKind::FullyConnected: return "FullyConnected";
    case LayerKind::Softmax: return "Softmax";
  }
  return "?";
}

struct LayerSpec {
  LayerKind kind;
  std::vector<std::size_t> kernel_widths;  // Convolution1D
  std::size_t feature_maps = 0;            // Convolution1D
  std::size_t pool_width = 0;              // MaxPool1D
  std::size_t output_units = 0;            // FullyConnected / Softmax

  static LayerSpec convolution(std::vector<std::size_t> widths, std::size_t maps) {
    if (widths.empty()) throw ConfigError("Convolution1D needs at least one kernel width");
    for (std::size_t w : widths) {
      if (w < 1) throw ConfigError("Convolution1D kernel width must be >= 1");
    }
    if (maps < 1) throw ConfigError("Convolution1D needs at least one feature map");
    LayerSpec s{LayerKind::Convolution1D};
    s.kernel_widths = std::move(widths);
    s.feature_maps = maps;
    return s;
  }
  static LayerSpec max_pool(std::size_t width) {
    if (width < 1) throw ConfigError("MaxPool1D pool width must be >= 1");
    LayerSpec s{LayerKind::MaxPool1D};
    s.pool_width = width;
    return s;
  }
  static LayerSpec activation() { return LayerSpec{LayerKind::ReLU}; }
  static LayerSpec fully_connected(std::size_t units) {
    if (units < 1) throw ConfigError("FullyConnected needs at least one unit");
    LayerSpec s{LayerKind::FullyConnected};
    s.output_units = units;
    return s;
  }
  static LayerSpec softmax(std::size_t classes) {
    if (classes < 1) throw ConfigError("Softmax needs at least one class");
    LayerSpec s{LayerKind::Softmax};
    s.output_units = classes;
    return s;
  }
};

// Per-parameter gradients in Network::parameters() order, plus the
// gradient with respect to the embedded input matrix.
struct Gradients {
  std::vector<Tensor> params;
  Tensor input;
};

// Feed-forward sentence network over an embedded token matrix
// [input_len x embed_dim]. Supported layer sequence:
//   (Convolution1D ReLU MaxPool1D)*  [FullyConnected ReLU]  Softmax
// A multi-width convolution runs one stack per kernel width; the pool
// stage pools each stack and concatenates along the feature axis,
// truncating to the shortest stack so rows align.
// An optional block of per-example constant features ("static channel")
// is appended to the softmax input after the fully-connected layer.
class Network {
 public:
  Network(std::vector<LayerSpec> specs, std::size_t input_len, std::size_t embed_dim,
          std::size_t static_dim = 0)
      : specs_(std::move(specs)),
        input_len_(input_len),
        embed_dim_(embed_dim),
        static_dim_(static_dim) {
    if (input_len_ < 1 || embed_dim_ < 1) {
      throw ConfigError("network input must be at least 1x1");
    }
    build();
  }

  // Scale-stable uniform init for weights, zero biases.
  void init_parameters(Rng& rng) {
    for (auto& b : blocks_) {
      for (std::size_t i = 0; i < b.widths.size(); ++i) {
        const double fan_in = static_cast<double>(b.widths[i] * b.in_features);
        const double fan_out = static_cast<double>(b.maps);
        init_uniform(b.kernels[i], rng, fan_in, fan_out);
        b.biases[i].fill(0.0);
      }
    }
    if (has_fc_) {
      init_uniform(fc_weights_, rng, static_cast<double>(fc_weights_.dim(1)),
                   static_cast<double>(fc_weights_.dim(0)));
      fc_bias_.fill(0.0);
    }
    init_uniform(head_weights_, rng, static_cast<double>(head_weights_.dim(1)),
                 static_cast<double>(head_weights_.dim(0)));
    head_bias_.fill(0.0);
  }

  struct Trace {
    struct BlockTrace {
      std::vector<Tensor> conv_pre;    // per width
      std::vector<Tensor> conv_act;    // per width
      std::vector<Tensor> pooled;      // per width
      std::vector<std::vector<std::size_t>> argmax;  // per width
      Tensor concat;                   // block output [out_len x out_features]
    };
    std::vector<BlockTrace> blocks;
    Tensor flat;
    Tensor fc_pre;
    Tensor fc_act;
    Tensor head_in;
    Tensor logits;
  };

  Tensor logits(const Tensor& input, const Tensor* static_features = nullptr) const {
    Trace t;
    run_forward(input, static_features, t);
    return t.logits;
  }

  std::pair<Tensor, double> probabilities(const Tensor& input, std::size_t gold,
                                          const Tensor* static_features = nullptr) const {
    return softmax_cross_entropy(logits(input, static_features), gold);
  }

  // Post-activation output of the fully-connected layer: the network's
  // feature vector.
  Tensor features(const Tensor& input) const {
    if (!has_fc_) throw ConfigError("network has no fully-connected layer to extract from");
    Trace t;
    run_forward(input, nullptr, t, /*stop_after_fc=*/true);
    return t.fc_act;
  }

  // Cross-entropy loss plus exact gradients for every parameter and for
  // the embedded input matrix.
  double loss_and_gradients(const Tensor& input, std::size_t gold, Gradients& grads,
                            const Tensor* static_features = nullptr) const {
    Trace t;
    run_forward(input, static_features, t);
    auto [probs, loss] = softmax_cross_entropy(t.logits, gold);
    Tensor d_logits = softmax_cross_entropy_backward(probs, gold);

    grads.params.assign(param_count_, Tensor());
    std::size_t pi = param_count_;

    Tensor d_head_in;
    Tensor g_head_w, g_head_b;
    fully_connected_backward(t.head_in, head_weights_, d_logits, g_head_w, g_head_b, &d_head_in);
    grads.params[--pi] = std::move(g_head_b);
    grads.params[--pi] = std::move(g_head_w);

    // The static slots are constants; only the leading learned block
    // propagates further.
    Tensor d_learned({learned_head_dim_});
    for (std::size_t i = 0; i < learned_head_dim_; ++i) d_learned[i] = d_head_in[i];

    Tensor d_flat;
    if (has_fc_) {
      Tensor d_fc_pre = relu_backward(t.fc_pre, d_learned);
      Tensor g_fc_w, g_fc_b;
      fully_connected_backward(t.flat, fc_weights_, d_fc_pre, g_fc_w, g_fc_b, &d_flat);
      grads.params[--pi] = std::move(g_fc_b);
      grads.params[--pi] = std::move(g_fc_w);
    } else {
      d_flat = std::move(d_learned);
    }

    if (blocks_.empty()) {
      grads.input = Tensor(input.shape(), std::move(d_flat.values()));
      return loss;
    }

    // Walk conv blocks in reverse; d_concat is the gradient at each
    // block's concatenated output.
    const auto& last = blocks_.back();
    Tensor d_concat({last.out_len, last.out_features}, std::move(d_flat.values()));
    for (std::size_t bi = blocks_.size(); bi-- > 0;) {
      const auto& b = blocks_[bi];
      const auto& bt = t.blocks[bi];
      Tensor d_block_input;  // gradient at the block's input matrix
      bool first_width = true;
      for (std::size_t wi = 0; wi < b.widths.size(); ++wi) {
        // Column slice of d_concat for this width, re-padded to the
        // stack's pooled length (truncated rows got zero gradient).
        const std::size_t pooled_len = bt.pooled[wi].dim(0);
        Tensor d_pooled({pooled_len, b.maps});
        for (std::size_t r = 0; r < b.out_len; ++r) {
          const double* src = d_concat.row(r) + wi * b.maps;
          double* dst = d_pooled.row(r);
          for (std::size_t f = 0; f < b.maps; ++f) dst[f] = src[f];
        }
        Tensor d_act = maxpool1d_backward(bt.conv_act[wi], d_pooled, bt.argmax[wi]);
        Tensor d_pre = relu_backward(bt.conv_pre[wi], d_act);
        Tensor g_k, g_b, d_in;
        const Tensor& block_input = bi == 0 ? input : t.blocks[bi - 1].concat;
        conv1d_backward(block_input, b.kernels[wi], d_pre, g_k, g_b, &d_in);
        if (first_width) {
          d_block_input = std::move(d_in);
          first_width = false;
        } else {
          for (std::size_t i = 0; i < d_block_input.size(); ++i) d_block_input[i] += d_in[i];
        }
        grads.params[block_param_base_[bi] + 2 * wi] = std::move(g_k);
        grads.params[block_param_base_[bi] + 2 * wi + 1] = std::move(g_b);
      }
      d_concat = std::move(d_block_input);
    }
    grads.input = std::move(d_concat);
    return loss;
  }

  std::vector<Tensor*> parameters() {
    std::vector<Tensor*> out;
    out.reserve(param_count_);
    for (auto& b : blocks_) {
      for (std::size_t i = 0; i < b.widths.size(); ++i) {
        out.push_back(&b.kernels[i]);
        out.push_back(&b.biases[i]);
      }
    }
    if (has_fc_) {
      out.push_back(&fc_weights_);
      out.push_back(&fc_bias_);
    }
    out.push_back(&head_weights_);
    out.push_back(&head_bias_);
    return out;
  }

  std::vector<const Tensor*> parameters() const {
    auto mutable_params = const_cast<Network*>(this)->parameters();
    return std::vector<const Tensor*>(mutable_params.begin(), mutable_params.end());
  }

  std::size_t parameter_scalars() const {
    std::size_t n = 0;
    for (const Tensor* t : parameters()) n += t->size();
    return n;
  }

  const std::vector<LayerSpec>& specs() const { return specs_; }
  std::size_t input_len() const { return input_len_; }
  std::size_t embed_dim() const { return embed_dim_; }
  std::size_t static_dim() const { return static_dim_; }
  std::size_t num_classes() const { return head_weights_.dim(0); }
  std::size_t feature_dim() const {
    if (!has_fc_) throw ConfigError("network has no fully-connected layer");
    return fc_weights_.dim(0);
  }
  std::size_t softmax_input_dim() const { return head_weights_.dim(1); }

 private:
  struct ConvPoolBlock {
    std::vector<std::size_t> widths;
    std::size_t maps = 0;
    std::size_t pool_width = 0;
    std::size_t in_len = 0;
    std::size_t in_features = 0;
    std::size_t out_len = 0;
    std::size_t out_features = 0;
    std::vector<Tensor> kernels;  // per width: [maps x width x in_features]
    std::vector<Tensor> biases;   // per width: [maps]
  };

  static void init_uniform(Tensor& t, Rng& rng, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  }

  void build() {
    std::size_t len = input_len_;
    std::size_t feats = embed_dim_;
    std::size_t i = 0;
    const std::size_t n = specs_.size();
    std::size_t layer_index = 0;
    while (i < n && specs_[i].kind == LayerKind::Convolution1D) {
      if (i + 2 >= n || specs_[i + 1].kind != LayerKind::ReLU ||
          specs_[i + 2].kind != LayerKind::MaxPool1D) {
        throw ConfigError("layer " + std::to_string(layer_index) +
                          ": Convolution1D must be followed by ReLU and MaxPool1D");
      }
      ConvPoolBlock b;
      b.widths = specs_[i].kernel_widths;
      b.maps = specs_[i].feature_maps;
      b.pool_width = specs_[i + 2].pool_width;
      b.in_len = len;
      b.in_features = feats;
      std::size_t min_pooled = 0;
      for (std::size_t wi = 0; wi < b.widths.size(); ++wi) {
        const std::size_t w = b.widths[wi];
        if (len < w) {
          throw ConfigError("layer " + std::to_string(layer_index) + " (Convolution1D): input length " +
                            std::to_string(len) + " shorter than kernel width " + std::to_string(w));
        }
        const std::size_t conv_len = len - w + 1;
        const std::size_t pooled = (conv_len + b.pool_width - 1) / b.pool_width;
        min_pooled = wi == 0 ? pooled : std::min(min_pooled, pooled);
        b.kernels.emplace_back(std::vector<std::size_t>{b.maps, w, feats});
        b.biases.emplace_back(std::vector<std::size_t>{b.maps});
      }
      b.out_len = min_pooled;
      b.out_features = b.maps * b.widths.size();
      block_param_base_.push_back(next_param_index_);
      next_param_index_ += 2 * b.widths.size();
      blocks_.push_back(std::move(b));
      len = blocks_.back().out_len;
      feats = blocks_.back().out_features;
      i += 3;
      layer_index += 3;
    }
    const std::size_t flat_dim = len * feats;
    if (i < n && specs_[i].kind == LayerKind::FullyConnected) {
      if (i + 1 >= n || specs_[i + 1].kind != LayerKind::ReLU) {
        throw ConfigError("layer " + std::to_string(layer_index) +
                          ": FullyConnected must be followed by ReLU");
      }
      has_fc_ = true;
      fc_weights_ = Tensor({specs_[i].output_units, flat_dim});
      fc_bias_ = Tensor({specs_[i].output_units});
      learned_head_dim_ = specs_[i].output_units;
      next_param_index_ += 2;
      i += 2;
      layer_index += 2;
    } else {
      learned_head_dim_ = flat_dim;
    }
    if (i >= n || specs_[i].kind != LayerKind::Softmax) {
      throw ConfigError("layer " + std::to_string(layer_index) + ": network must end in Softmax");
    }
    head_weights_ = Tensor({specs_[i].output_units, learned_head_dim_ + static_dim_});
    head_bias_ = Tensor({specs_[i].output_units});
    next_param_index_ += 2;
    if (i + 1 != n) {
      throw ConfigError("layer " + std::to_string(layer_index + 1) + ": layers after Softmax");
    }
    param_count_ = next_param_index_;
  }

  void run_forward(const Tensor& input, const Tensor* static_features, Trace& t,
                   bool stop_after_fc = false) const {
    if (input.rank() != 2 || input.dim(0) != input_len_ || input.dim(1) != embed_dim_) {
      throw ShapeError("network input " + input.shape_string() + " does not match expected " +
                       Tensor::shape_string({input_len_, embed_dim_}));
    }
    t.blocks.clear();
    t.blocks.resize(blocks_.size());
    const Tensor* current = &input;
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      const auto& b = blocks_[bi];
      auto& bt = t.blocks[bi];
      bt.conv_pre.resize(b.widths.size());
      bt.conv_act.resize(b.widths.size());
      bt.pooled.resize(b.widths.size());
      bt.argmax.resize(b.widths.size());
      bt.concat = Tensor({b.out_len, b.out_features});
      for (std::size_t wi = 0; wi < b.widths.size(); ++wi) {
        bt.conv_pre[wi] = conv1d_forward(*current, b.kernels[wi], b.biases[wi]);
        bt.conv_act[wi] = relu(bt.conv_pre[wi]);
        bt.pooled[wi] = maxpool1d_with_indices(bt.conv_act[wi], b.pool_width, bt.argmax[wi]);
        for (std::size_t r = 0; r < b.out_len; ++r) {
          const double* src = bt.pooled[wi].row(r);
          double* dst = bt.concat.row(r) + wi * b.maps;
          for (std::size_t f = 0; f < b.maps; ++f) dst[f] = src[f];
        }
      }
      current = &bt.concat;
    }
    t.flat = Tensor({current->size()}, std::vector<double>(current->values()));
    if (has_fc_) {
      t.fc_pre = fully_connected_forward(t.flat, fc_weights_, fc_bias_);
      t.fc_act = relu(t.fc_pre);
    }
    if (stop_after_fc) return;
    const Tensor& learned = has_fc_ ? t.fc_act : t.flat;
    if (static_dim_ > 0) {
      if (!static_features || static_features->size() != static_dim_) {
        throw ShapeError("network expects a static feature block of length " +
                         std::to_string(static_dim_));
      }
      t.head_in = Tensor({learned_head_dim_ + static_dim_});
      for (std::size_t i = 0; i < learned_head_dim_; ++i) t.head_in[i] = learned[i];
      for (std::size_t i = 0; i < static_dim_; ++i) {
        t.head_in[learned_head_dim_ + i] = (*static_features)[i];
      }
    } else {
      t.head_in = learned;
    }
    t.logits = fully_connected_forward(t.head_in, head_weights_, head_bias_);
  }

  std::vector<LayerSpec> specs_;
  std::size_t input_len_;
  std::size_t embed_dim_;
  std::size_t static_dim_;
  std::vector<ConvPoolBlock> blocks_;
  std::vector<std::size_t> block_param_base_;
  bool has_fc_ = false;
  Tensor fc_weights_, fc_bias_;
  Tensor head_weights_, head_bias_;
  std::size_t learned_head_dim_ = 0;
  std::size_t next_param_index_ = 0;
  std::size_t param_count_ = 0;
};

}  // namespace scnn
