#include "hqfl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hqfl/errors.hpp"

namespace hqfl::nn {

namespace {

double padded_at(const Tensor& input, std::size_t c, long y, long x,
                 std::size_t h, std::size_t w) {
  if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) return 0.0;
  return input.data[(c * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x)];
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                      std::size_t stride, std::size_t padding) {
  if (input.rank() != 3 || kernel.rank() != 4 || bias.rank() != 1) {
    throw ConfigError("conv2d: expected input [C,H,W], kernel [O,C,k,k], bias [O]; got " +
                      input.shape_str() + " " + kernel.shape_str() + " " + bias.shape_str());
  }
  const std::size_t c_in = input.shape[0], h = input.shape[1], w = input.shape[2];
  const std::size_t c_out = kernel.shape[0], k = kernel.shape[2];
  if (kernel.shape[1] != c_in || kernel.shape[3] != k || bias.shape[0] != c_out) {
    throw ConfigError("conv2d: kernel " + kernel.shape_str() + " incompatible with input " +
                      input.shape_str() + " and bias " + bias.shape_str());
  }
  if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
  if (k > h + 2 * padding || k > w + 2 * padding) {
    throw ConfigError("conv2d: kernel size " + std::to_string(k) +
                      " exceeds padded input " + std::to_string(h + 2 * padding));
  }
  const std::size_t h_out = (h + 2 * padding - k) / stride + 1;
  const std::size_t w_out = (w + 2 * padding - k) / stride + 1;

  Tensor out({c_out, h_out, w_out});
  for (std::size_t oc = 0; oc < c_out; ++oc) {
    for (std::size_t oy = 0; oy < h_out; ++oy) {
      for (std::size_t ox = 0; ox < w_out; ++ox) {
        double acc = bias.data[oc];
        const long base_y = static_cast<long>(oy * stride) - static_cast<long>(padding);
        const long base_x = static_cast<long>(ox * stride) - static_cast<long>(padding);
        for (std::size_t ic = 0; ic < c_in; ++ic) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              acc += padded_at(input, ic, base_y + static_cast<long>(ky),
                               base_x + static_cast<long>(kx), h, w) *
                     kernel.data[((oc * c_in + ic) * k + ky) * k + kx];
            }
          }
        }
        out.data[(oc * h_out + oy) * w_out + ox] = acc;
      }
    }
  }
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel,
                            std::size_t stride, std::size_t padding,
                            const Tensor& d_output) {
  const std::size_t c_in = input.shape[0], h = input.shape[1], w = input.shape[2];
  const std::size_t c_out = kernel.shape[0], k = kernel.shape[2];
  const std::size_t h_out = d_output.shape[1], w_out = d_output.shape[2];
  if (d_output.shape[0] != c_out) {
    throw ConfigError("conv2d backward: d_output channels mismatch");
  }

  Conv2dGrads g{Tensor(input.shape), Tensor(kernel.shape), Tensor({c_out})};
  for (std::size_t oc = 0; oc < c_out; ++oc) {
    for (std::size_t oy = 0; oy < h_out; ++oy) {
      for (std::size_t ox = 0; ox < w_out; ++ox) {
        const double up = d_output.data[(oc * h_out + oy) * w_out + ox];
        if (up == 0.0) continue;
        g.d_bias.data[oc] += up;
        const long base_y = static_cast<long>(oy * stride) - static_cast<long>(padding);
        const long base_x = static_cast<long>(ox * stride) - static_cast<long>(padding);
        for (std::size_t ic = 0; ic < c_in; ++ic) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            const long iy = base_y + static_cast<long>(ky);
            if (iy < 0 || iy >= static_cast<long>(h)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long ix = base_x + static_cast<long>(kx);
              if (ix < 0 || ix >= static_cast<long>(w)) continue;
              const std::size_t in_idx =
                  (ic * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix);
              const std::size_t k_idx = ((oc * c_in + ic) * k + ky) * k + kx;
              g.d_kernel.data[k_idx] += up * input.data[in_idx];
              g.d_input.data[in_idx] += up * kernel.data[k_idx];
            }
          }
        }
      }
    }
  }
  return g;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data) v = std::max(0.0, v);
  return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& d_output) {
  if (!x.same_shape(d_output)) throw InputError("relu backward: shape mismatch");
  Tensor g = d_output;
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    if (x.data[i] <= 0.0) g.data[i] = 0.0;
  }
  return g;
}

MaxPoolResult maxpool2d(const Tensor& x, std::size_t window) {
  if (x.rank() != 3) throw ConfigError("maxpool2d: expected [C,H,W], got " + x.shape_str());
  const std::size_t c = x.shape[0], h = x.shape[1], w = x.shape[2];
  if (window == 0 || h % window != 0 || w % window != 0) {
    throw ConfigError("maxpool2d: window " + std::to_string(window) +
                      " does not divide spatial size " + x.shape_str());
  }
  const std::size_t h_out = h / window, w_out = w / window;
  MaxPoolResult r{Tensor({c, h_out, w_out}), {}};
  r.argmax.resize(c * h_out * w_out);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < h_out; ++oy) {
      for (std::size_t ox = 0; ox < w_out; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t dy = 0; dy < window; ++dy) {
          for (std::size_t dx = 0; dx < window; ++dx) {
            const std::size_t idx = (ch * h + oy * window + dy) * w + ox * window + dx;
            if (x.data[idx] > best) {
              best = x.data[idx];
              best_idx = idx;
            }
          }
        }
        const std::size_t out_idx = (ch * h_out + oy) * w_out + ox;
        r.output.data[out_idx] = best;
        r.argmax[out_idx] = best_idx;
      }
    }
  }
  return r;
}

Tensor maxpool2d_backward(const MaxPoolResult& pooled,
                          const std::vector<std::size_t>& input_shape,
                          const Tensor& d_output) {
  if (!pooled.output.same_shape(d_output)) {
    throw InputError("maxpool2d backward: shape mismatch");
  }
  Tensor g(input_shape);
  for (std::size_t i = 0; i < d_output.data.size(); ++i) {
    g.data[pooled.argmax[i]] += d_output.data[i];
  }
  return g;
}

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (w.rank() != 2 || x.rank() != 1 || b.rank() != 1 || w.shape[1] != x.shape[0] ||
      w.shape[0] != b.shape[0]) {
    throw ConfigError("dense: dimension mismatch W" + w.shape_str() + " x" + x.shape_str() +
                      " b" + b.shape_str());
  }
  const std::size_t d_out = w.shape[0], d_in = w.shape[1];
  Tensor out({d_out});
  for (std::size_t i = 0; i < d_out; ++i) {
    double acc = b.data[i];
    const double* row = &w.data[i * d_in];
    for (std::size_t j = 0; j < d_in; ++j) acc += row[j] * x.data[j];
    out.data[i] = acc;
  }
  return out;
}

DenseGrads dense_backward(const Tensor& x, const Tensor& w, const Tensor& d_output) {
  const std::size_t d_out = w.shape[0], d_in = w.shape[1];
  if (d_output.shape[0] != d_out) throw InputError("dense backward: upstream mismatch");
  DenseGrads g{Tensor({d_in}), Tensor(w.shape), d_output};
  for (std::size_t i = 0; i < d_out; ++i) {
    const double up = d_output.data[i];
    const double* row = &w.data[i * d_in];
    double* d_row = &g.d_w.data[i * d_in];
    for (std::size_t j = 0; j < d_in; ++j) {
      d_row[j] += up * x.data[j];
      g.d_x.data[j] += up * row[j];
    }
  }
  return g;
}

XentResult softmax_cross_entropy(const Tensor& logits, std::size_t label) {
  const std::size_t m = logits.size();
  if (label >= m) {
    throw InputError("softmax_cross_entropy: label " + std::to_string(label) +
                     " out of range for " + std::to_string(m) + " classes");
  }
  double max_logit = logits.data[0];
  for (double v : logits.data) max_logit = std::max(max_logit, v);
  double sum_exp = 0.0;
  for (double v : logits.data) sum_exp += std::exp(v - max_logit);
  const double log_sum = std::log(sum_exp);

  XentResult r;
  r.loss = -(logits.data[label] - max_logit - log_sum);
  r.grad_logits = Tensor(logits.shape);
  for (std::size_t i = 0; i < m; ++i) {
    r.grad_logits.data[i] = std::exp(logits.data[i] - max_logit) / sum_exp;
  }
  r.grad_logits.data[label] -= 1.0;
  return r;
}

AdamState AdamState::for_params(const Tensor& params) {
  AdamState s;
  s.first_moment = Tensor(params.shape);
  s.second_moment = Tensor(params.shape);
  return s;
}

void adam_step(Tensor& params, const Tensor& grads, AdamState& state, double lr) {
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment)) {
    throw InputError("adam_step: shape mismatch");
  }
  state.step_count += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.data.size(); ++i) {
    const double g = grads.data[i];
    double& m = state.first_moment.data[i];
    double& v = state.second_moment.data[i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    params.data[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon_stabilizer);
  }
}

// ---------------------------------------------------------------------------
// CNN composition
// ---------------------------------------------------------------------------

std::vector<ConvBlockSpec> CnnConfig::blocks() const {
  std::vector<ConvBlockSpec> specs;
  std::size_t channels = in_channels;
  std::size_t spatial = image_size;
  for (std::size_t out_ch : block_channels) {
    ConvBlockSpec b;
    b.in_channels = channels;
    b.out_channels = out_ch;
    b.kernel_size = kernel_size;
    b.stride = stride;
    b.padding = padding;
    b.pool_window = pool_window;
    if (b.kernel_size > spatial + 2 * b.padding) {
      throw ConfigError("cnn: kernel larger than padded input at spatial size " +
                        std::to_string(spatial));
    }
    const std::size_t conv_out = (spatial + 2 * b.padding - b.kernel_size) / b.stride + 1;
    if (conv_out == 0 || conv_out % b.pool_window != 0) {
      throw ConfigError("cnn: pool window " + std::to_string(b.pool_window) +
                        " does not divide post-conv size " + std::to_string(conv_out));
    }
    spatial = conv_out / b.pool_window;
    channels = out_ch;
    specs.push_back(b);
  }
  return specs;
}

std::size_t CnnConfig::final_spatial() const {
  std::size_t spatial = image_size;
  for (const auto& b : blocks()) {
    spatial = ((spatial + 2 * b.padding - b.kernel_size) / b.stride + 1) / b.pool_window;
  }
  return spatial;
}

std::size_t CnnConfig::flatten_dim() const {
  const std::size_t s = final_spatial();
  return block_channels.empty() ? in_channels * s * s : block_channels.back() * s * s;
}

Tensor glorot_uniform(std::size_t fan_out, std::size_t fan_in,
                      std::vector<std::size_t> shape, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(std::move(shape));
  for (double& v : t.data) v = (2.0 * rng.uniform() - 1.0) * limit;
  return t;
}

CnnParams init_cnn_params(const CnnConfig& cfg, Rng& rng) {
  CnnParams p;
  for (const auto& b : cfg.blocks()) {
    const std::size_t fan_in = b.in_channels * b.kernel_size * b.kernel_size;
    const std::size_t fan_out = b.out_channels * b.kernel_size * b.kernel_size;
    p.kernels.push_back(glorot_uniform(
        fan_out, fan_in, {b.out_channels, b.in_channels, b.kernel_size, b.kernel_size}, rng));
    p.conv_biases.push_back(Tensor({b.out_channels}));
  }
  const std::size_t flat = cfg.flatten_dim();
  if (cfg.hidden_width > 0) {
    p.w_hidden = glorot_uniform(cfg.hidden_width, flat, {cfg.hidden_width, flat}, rng);
    p.b_hidden = Tensor({cfg.hidden_width});
    p.w_out = glorot_uniform(cfg.out_dim, cfg.hidden_width, {cfg.out_dim, cfg.hidden_width}, rng);
  } else {
    p.w_out = glorot_uniform(cfg.out_dim, flat, {cfg.out_dim, flat}, rng);
  }
  p.b_out = Tensor({cfg.out_dim});
  return p;
}

CnnTrace cnn_forward_trace(const Tensor& x, const CnnConfig& cfg, const CnnParams& params) {
  if (x.rank() != 3 || x.shape[0] != cfg.in_channels || x.shape[1] != cfg.image_size ||
      x.shape[2] != cfg.image_size) {
    throw ConfigError("cnn: input " + x.shape_str() + " does not match configured " +
                      std::to_string(cfg.in_channels) + "x" + std::to_string(cfg.image_size) +
                      "x" + std::to_string(cfg.image_size));
  }
  CnnTrace t;
  t.input = x;
  Tensor cur = x;
  const auto specs = cfg.blocks();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Tensor conv = conv2d_forward(cur, params.kernels[i], params.conv_biases[i],
                                 specs[i].stride, specs[i].padding);
    t.conv_out.push_back(conv);
    Tensor act = relu(conv);
    t.pooled.push_back(maxpool2d(act, specs[i].pool_window));
    cur = t.pooled.back().output;
  }
  t.flat = Tensor({cur.size()}, cur.data);
  if (cfg.hidden_width > 0) {
    t.hidden_pre = dense_forward(t.flat, params.w_hidden, params.b_hidden);
    t.hidden_act = relu(t.hidden_pre);
    t.output = dense_forward(t.hidden_act, params.w_out, params.b_out);
  } else {
    t.output = dense_forward(t.flat, params.w_out, params.b_out);
  }
  check_finite(t.output, "cnn_forward output");
  return t;
}

Tensor cnn_forward(const Tensor& x, const CnnConfig& cfg, const CnnParams& params) {
  return cnn_forward_trace(x, cfg, params).output;
}

CnnGrads cnn_zero_grads(const CnnConfig& cfg, const CnnParams& params) {
  CnnGrads g;
  for (const auto& k : params.kernels) g.d_kernels.push_back(Tensor(k.shape));
  for (const auto& b : params.conv_biases) g.d_conv_biases.push_back(Tensor(b.shape));
  if (cfg.hidden_width > 0) {
    g.d_w_hidden = Tensor(params.w_hidden.shape);
    g.d_b_hidden = Tensor(params.b_hidden.shape);
  }
  g.d_w_out = Tensor(params.w_out.shape);
  g.d_b_out = Tensor(params.b_out.shape);
  return g;
}

void cnn_backward(const CnnTrace& trace, const CnnConfig& cfg, const CnnParams& params,
                  const Tensor& d_output, CnnGrads& grads) {
  Tensor d_flat;
  if (cfg.hidden_width > 0) {
    DenseGrads d_out = dense_backward(trace.hidden_act, params.w_out, d_output);
    axpy(1.0, d_out.d_w, grads.d_w_out);
    axpy(1.0, d_out.d_b, grads.d_b_out);
    Tensor d_hidden = relu_backward(trace.hidden_pre, d_out.d_x);
    DenseGrads d_hid = dense_backward(trace.flat, params.w_hidden, d_hidden);
    axpy(1.0, d_hid.d_w, grads.d_w_hidden);
    axpy(1.0, d_hid.d_b, grads.d_b_hidden);
    d_flat = d_hid.d_x;
  } else {
    DenseGrads d_out = dense_backward(trace.flat, params.w_out, d_output);
    axpy(1.0, d_out.d_w, grads.d_w_out);
    axpy(1.0, d_out.d_b, grads.d_b_out);
    d_flat = d_out.d_x;
  }

  const auto specs = cfg.blocks();
  const std::size_t n_blocks = specs.size();
  Tensor d_cur(trace.pooled.empty() ? trace.input.shape : trace.pooled.back().output.shape,
               d_flat.data);
  for (std::size_t i = n_blocks; i-- > 0;) {
    const Tensor& block_in = (i == 0) ? trace.input : trace.pooled[i - 1].output;
    Tensor d_act = maxpool2d_backward(trace.pooled[i], trace.conv_out[i].shape, d_cur);
    Tensor d_conv = relu_backward(trace.conv_out[i], d_act);
    Conv2dGrads cg = conv2d_backward(block_in, params.kernels[i], specs[i].stride,
                                     specs[i].padding, d_conv);
    axpy(1.0, cg.d_kernel, grads.d_kernels[i]);
    axpy(1.0, cg.d_bias, grads.d_conv_biases[i]);
    d_cur = cg.d_input;
  }
}

}  // namespace hqfl::nn
