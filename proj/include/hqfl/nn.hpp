#pragma once

#include <cstdint>
#include <vector>

#include "hqfl/rng.hpp"
#include "hqfl/tensor.hpp"

namespace hqfl::nn {

// ---------------------------------------------------------------------------
// Layer kernels with hand-wired backward passes. Convolution follows the
// cross-correlation index convention s(i,j) = sum_{m,n} I(i+m, j+n) K(m,n).
// All arithmetic is double precision.
// ---------------------------------------------------------------------------

/// input [C_in,H,W], kernel [C_out,C_in,k,k], bias [C_out] -> [C_out,H',W'].
Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                      std::size_t stride, std::size_t padding);

struct Conv2dGrads {
  Tensor d_input;
  Tensor d_kernel;
  Tensor d_bias;
};

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel,
                            std::size_t stride, std::size_t padding,
                            const Tensor& d_output);

Tensor relu(const Tensor& x);
/// Upstream gradient masked by the indicator x > 0 (subgradient 0 at x == 0).
Tensor relu_backward(const Tensor& x, const Tensor& d_output);

struct MaxPoolResult {
  Tensor output;
  std::vector<std::size_t> argmax;  // flat input index per output cell
};

/// window must divide both spatial dimensions of x [C,H,W].
MaxPoolResult maxpool2d(const Tensor& x, std::size_t window);
Tensor maxpool2d_backward(const MaxPoolResult& pooled,
                          const std::vector<std::size_t>& input_shape,
                          const Tensor& d_output);

/// x [d_in], W [d_out,d_in], b [d_out] -> W x + b.
Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b);

struct DenseGrads {
  Tensor d_x;
  Tensor d_w;
  Tensor d_b;
};

DenseGrads dense_backward(const Tensor& x, const Tensor& w, const Tensor& d_output);

struct XentResult {
  double loss = 0.0;
  Tensor grad_logits;
};

/// loss = -log softmax(logits)[label], max-shifted for stability.
/// grad = softmax(logits) - one_hot(label).
XentResult softmax_cross_entropy(const Tensor& logits, std::size_t label);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
  Tensor first_moment;
  Tensor second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon_stabilizer = 1e-8;

  static AdamState for_params(const Tensor& params);
};

/// Standard bias-corrected Adam update, in place. Increments step_count.
void adam_step(Tensor& params, const Tensor& grads, AdamState& state, double lr);

// ---------------------------------------------------------------------------
// The convolutional feature extractor: conv->ReLU->pool blocks, flatten,
// hidden dense with ReLU, then dense to out_dim (2^n_qubits).
// ---------------------------------------------------------------------------

struct ConvBlockSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_size = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
  std::size_t pool_window = 2;
};

struct CnnConfig {
  std::size_t in_channels = 1;
  std::size_t image_size = 32;  // square inputs
  std::vector<std::size_t> block_channels = {16, 32, 64};
  std::size_t kernel_size = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
  std::size_t pool_window = 2;
  std::size_t hidden_width = 64;  // 0 disables the hidden dense layer
  std::size_t out_dim = 16;

  /// Resolves block specs and checks the pool-divisibility invariant.
  std::vector<ConvBlockSpec> blocks() const;
  /// Spatial size after all blocks.
  std::size_t final_spatial() const;
  std::size_t flatten_dim() const;
};

struct CnnParams {
  std::vector<Tensor> kernels;
  std::vector<Tensor> conv_biases;
  Tensor w_hidden, b_hidden;  // empty when hidden_width == 0
  Tensor w_out, b_out;
};

/// Glorot-uniform weights, zero biases, from the given stream.
CnnParams init_cnn_params(const CnnConfig& cfg, Rng& rng);

struct CnnTrace {
  Tensor input;
  std::vector<Tensor> conv_out;    // pre-ReLU per block
  std::vector<MaxPoolResult> pooled;
  Tensor flat;
  Tensor hidden_pre;  // pre-ReLU (only when hidden layer present)
  Tensor hidden_act;
  Tensor output;
};

Tensor cnn_forward(const Tensor& x, const CnnConfig& cfg, const CnnParams& params);
CnnTrace cnn_forward_trace(const Tensor& x, const CnnConfig& cfg, const CnnParams& params);

struct CnnGrads {
  std::vector<Tensor> d_kernels;
  std::vector<Tensor> d_conv_biases;
  Tensor d_w_hidden, d_b_hidden;
  Tensor d_w_out, d_b_out;
};

CnnGrads cnn_zero_grads(const CnnConfig& cfg, const CnnParams& params);

/// Backward through the whole extractor; d_output has shape [out_dim].
/// Accumulates into grads and returns nothing else (input grads unused).
void cnn_backward(const CnnTrace& trace, const CnnConfig& cfg, const CnnParams& params,
                  const Tensor& d_output, CnnGrads& grads);

/// Glorot-uniform init for a dense weight matrix [fan_out, fan_in].
Tensor glorot_uniform(std::size_t fan_out, std::size_t fan_in,
                      std::vector<std::size_t> shape, Rng& rng);

}  // namespace hqfl::nn
