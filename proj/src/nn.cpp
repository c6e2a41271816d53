// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/nn.hpp"

#include <cmath>
#include <numbers>

#include "artrec/error.hpp"
#include "artrec/text_io.hpp"

namespace artrec {

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kGelu: return "gelu";
  }
  return "?";
}

Activation activation_from_string(std::string_view text) {
  if (text == "relu") return Activation::kRelu;
  if (text == "tanh") return Activation::kTanh;
  if (text == "gelu") return Activation::kGelu;
  throw ConfigError("unknown activation '" + std::string(text) + "'");
}

void RecognizerConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("recognizer config: " + msg); };
  if (input_dim < 1) fail("input_dim must be positive");
  if (conv_channels < 1) fail("conv_channels must be positive");
  if (adapter_dims.empty()) {
    if (input_dim != conv_channels) fail("identity adapter needs input_dim == conv_channels");
  } else if (adapter_dims.back() != conv_channels) {
    fail("last adapter width must equal conv_channels");
  }
  for (int d : adapter_dims)
    if (d < 1) fail("adapter widths must be positive");
  if (conv_blocks < 0 || recurrent_blocks < 0) fail("block counts must be non-negative");
  if (kernel_width < 1 || kernel_width % 2 == 0) fail("kernel_width must be odd");
  if (hidden_size < 1) fail("hidden_size must be positive");
  if (classifier_dims.empty()) fail("classifier needs at least one layer");
  for (int d : classifier_dims)
    if (d < 1) fail("classifier widths must be positive");
  if (use_voicing && conv_blocks < 1) fail("voicing injection needs at least one conv block");
  if (logit_noise_std < 0.0) fail("logit_noise_std must be non-negative");
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::vector<int> parse_ints(const std::string& text, const std::string& ctx) {
  std::vector<int> out;
  if (trim(text).empty() || trim(text) == "none") return out;
  for (const auto& part : split(text, ',')) out.push_back(static_cast<int>(parse_int(part, ctx)));
  return out;
}

}  // namespace

std::map<std::string, std::string> RecognizerConfig::to_key_values() const {
  return {
      {"input_dim", std::to_string(input_dim)},
      {"adapter_dims", adapter_dims.empty() ? "none" : join_ints(adapter_dims)},
      {"conv_blocks", std::to_string(conv_blocks)},
      {"conv_channels", std::to_string(conv_channels)},
      {"kernel_width", std::to_string(kernel_width)},
      {"activation", std::string(to_string(activation))},
      {"recurrent_blocks", std::to_string(recurrent_blocks)},
      {"hidden_size", std::to_string(hidden_size)},
      {"bidirectional", bidirectional ? "true" : "false"},
      {"classifier_dims", join_ints(classifier_dims)},
      {"use_voicing", use_voicing ? "true" : "false"},
      {"logit_noise_std", format_double(logit_noise_std)},
  };
}

RecognizerConfig RecognizerConfig::from_key_values(const std::map<std::string, std::string>& kv) {
  RecognizerConfig cfg;
  for (const auto& [key, value] : kv) {
    const std::string ctx = "recognizer config key '" + key + "'";
    try {
      if (key == "input_dim") {
        cfg.input_dim = static_cast<int>(parse_int(value, ctx));
      } else if (key == "adapter_dims") {
        cfg.adapter_dims = parse_ints(value, ctx);
      } else if (key == "conv_blocks") {
        cfg.conv_blocks = static_cast<int>(parse_int(value, ctx));
      } else if (key == "conv_channels") {
        cfg.conv_channels = static_cast<int>(parse_int(value, ctx));
      } else if (key == "kernel_width") {
        cfg.kernel_width = static_cast<int>(parse_int(value, ctx));
      } else if (key == "activation") {
        cfg.activation = activation_from_string(value);
      } else if (key == "recurrent_blocks") {
        cfg.recurrent_blocks = static_cast<int>(parse_int(value, ctx));
      } else if (key == "hidden_size") {
        cfg.hidden_size = static_cast<int>(parse_int(value, ctx));
      } else if (key == "bidirectional") {
        cfg.bidirectional = parse_bool(value, ctx);
      } else if (key == "classifier_dims") {
        cfg.classifier_dims = parse_ints(value, ctx);
      } else if (key == "use_voicing") {
        cfg.use_voicing = parse_bool(value, ctx);
      } else if (key == "logit_noise_std") {
        cfg.logit_noise_std = parse_double(value, ctx);
      } else {
        throw ConfigError("unknown recognizer config key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Parameters.

std::size_t ModelParameters::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values) n += static_cast<std::size_t>(v.size());
  return n;
}

int ModelParameters::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw Error("no parameter named '" + name + "'");
}

ModelParameters ModelParameters::zeros_like() const {
  ModelParameters out;
  out.names = names;
  out.values.reserve(values.size());
  for (const auto& v : values) out.values.push_back(Eigen::MatrixXd::Zero(v.rows(), v.cols()));
  return out;
}

void ModelParameters::set_zero() {
  for (auto& v : values) v.setZero();
}

bool ModelParameters::same_layout(const ModelParameters& other) const {
  if (names != other.names) return false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].rows() != other.values[i].rows() || values[i].cols() != other.values[i].cols()) {
      return false;
    }
  }
  return true;
}

namespace {

struct LinearIdx {
  int weight;
  int bias;
};
struct ConvIdx {
  int weight;
  int bias;
  int scale;
  int shift;
};
struct GruIdx {
  int w_input;
  int w_hidden;
  int b_input;
  int b_hidden;
};

enum class Init { kFanIn, kZero, kOne, kOrthogonal };

struct Layout {
  std::vector<LinearIdx> adapter;
  std::vector<ConvIdx> conv;
  int voicing = -1;
  std::vector<std::vector<GruIdx>> recurrent;
  std::vector<LinearIdx> classifier;

  // Parallel to the parameter list.
  std::vector<Init> init;
  std::vector<int> fan_in;
};

Layout make_layout(const RecognizerConfig& cfg, ModelParameters& params) {
  cfg.validate();
  Layout layout;
  params.names.clear();
  params.values.clear();
  auto add = [&](std::string name, int rows, int cols, Init init, int fan_in) {
    params.names.push_back(std::move(name));
    params.values.push_back(Eigen::MatrixXd::Zero(rows, cols));
    layout.init.push_back(init);
    layout.fan_in.push_back(fan_in);
    return static_cast<int>(params.values.size()) - 1;
  };

  int width = cfg.input_dim;
  for (std::size_t i = 0; i < cfg.adapter_dims.size(); ++i) {
    const int out = cfg.adapter_dims[i];
    const std::string p = "adapter." + std::to_string(i);
    LinearIdx idx{};
    idx.weight = add(p + ".weight", out, width, Init::kFanIn, width);
    idx.bias = add(p + ".bias", out, 1, Init::kZero, width);
    layout.adapter.push_back(idx);
    width = out;
  }
  const int c = cfg.conv_channels;
  const int k = cfg.kernel_width;
  for (int b = 0; b < cfg.conv_blocks; ++b) {
    const std::string p = "conv." + std::to_string(b);
    ConvIdx idx{};
    idx.weight = add(p + ".weight", c, k * c, Init::kFanIn, k * c);
    idx.bias = add(p + ".bias", c, 1, Init::kZero, k * c);
    idx.scale = add(p + ".norm_scale", c, 1, Init::kOne, c);
    idx.shift = add(p + ".norm_shift", c, 1, Init::kZero, c);
    layout.conv.push_back(idx);
  }
  if (cfg.use_voicing) layout.voicing = add("voicing.projection", 3, c, Init::kFanIn, 3);

  width = c;
  const int h = cfg.hidden_size;
  const int directions = cfg.bidirectional ? 2 : 1;
  for (int b = 0; b < cfg.recurrent_blocks; ++b) {
    std::vector<GruIdx> block;
    for (int d = 0; d < directions; ++d) {
      const std::string p = "rnn." + std::to_string(b) + (d == 0 ? ".fwd" : ".bwd");
      GruIdx idx{};
      idx.w_input = add(p + ".w_input", 3 * h, width, Init::kFanIn, width);
      idx.w_hidden = add(p + ".w_hidden", 3 * h, h, Init::kOrthogonal, h);
      idx.b_input = add(p + ".b_input", 3 * h, 1, Init::kZero, width);
      idx.b_hidden = add(p + ".b_hidden", 3 * h, 1, Init::kZero, h);
      block.push_back(idx);
    }
    layout.recurrent.push_back(std::move(block));
    width = h * directions;
  }
  for (std::size_t i = 0; i < cfg.classifier_dims.size(); ++i) {
    const int out = cfg.classifier_dims[i];
    const std::string p = "classifier." + std::to_string(i);
    LinearIdx idx{};
    idx.weight = add(p + ".weight", out, width, Init::kFanIn, width);
    idx.bias = add(p + ".bias", out, 1, Init::kZero, width);
    layout.classifier.push_back(idx);
    width = out;
  }
  return layout;
}

Layout checked_layout(const RecognizerConfig& cfg, const ModelParameters& params) {
  ModelParameters expected;
  Layout layout = make_layout(cfg, expected);
  if (!expected.same_layout(params)) {
    throw Error("parameters do not match the recognizer config");
  }
  return layout;
}

}  // namespace

ModelParameters parameter_layout(const RecognizerConfig& cfg) {
  ModelParameters params;
  make_layout(cfg, params);
  return params;
}

ModelParameters init_parameters(const RecognizerConfig& cfg, std::uint64_t seed) {
  ModelParameters params;
  const Layout layout = make_layout(cfg, params);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& v = params.values[i];
    switch (layout.init[i]) {
      case Init::kZero: v.setZero(); break;
      case Init::kOne: v.setOnes(); break;
      case Init::kFanIn: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layout.fan_in[i]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index r = 0; r < v.rows(); ++r)
          for (Eigen::Index c = 0; c < v.cols(); ++c) v(r, c) = dist(rng);
        break;
      }
      case Init::kOrthogonal: {
        // One orthogonal H x H block per gate.
        const Eigen::Index h = v.cols();
        std::normal_distribution<double> dist(0.0, 1.0);
        for (Eigen::Index g = 0; g < v.rows() / h; ++g) {
          Eigen::MatrixXd a(h, h);
          for (Eigen::Index r = 0; r < h; ++r)
            for (Eigen::Index c = 0; c < h; ++c) a(r, c) = dist(rng);
          Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
          Eigen::MatrixXd q = qr.householderQ();
          const Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
          for (Eigen::Index c = 0; c < h; ++c)
            if (rmat(c, c) < 0) q.col(c) *= -1.0;
          v.block(g * h, 0, h, h) = q;
        }
        break;
      }
    }
  }
  return params;
}

// ---------------------------------------------------------------------------
// Layers.

namespace {

constexpr double kNormEpsilon = 1e-5;

double act_value(Activation act, double x) {
  switch (act) {
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kTanh: return std::tanh(x);
    case Activation::kGelu: return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  }
  return x;
}

double act_derivative(Activation act, double x) {
  switch (act) {
    case Activation::kRelu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::kGelu: {
      const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
      const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
      return cdf + x * pdf;
    }
  }
  return 1.0;
}

Eigen::MatrixXd activate(Activation act, const Eigen::MatrixXd& x) {
  return x.unaryExpr([act](double v) { return act_value(act, v); });
}

Eigen::MatrixXd activation_grad(Activation act, const Eigen::MatrixXd& pre,
                                const Eigen::MatrixXd& upstream) {
  return upstream.cwiseProduct(pre.unaryExpr([act](double v) { return act_derivative(act, v); }));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Dense stack; the activation follows every layer except the last.
Eigen::MatrixXd dense_forward(const std::vector<LinearIdx>& layers, const ModelParameters& params,
                              Activation act, Eigen::MatrixXd x,
                              std::vector<ForwardTrace::Dense>& cache) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    ForwardTrace::Dense d;
    const auto& w = params.values[static_cast<std::size_t>(layers[i].weight)];
    const auto& b = params.values[static_cast<std::size_t>(layers[i].bias)];
    d.pre = x * w.transpose();
    d.pre.rowwise() += b.col(0).transpose();
    d.activated = i + 1 < layers.size();
    d.input = std::move(x);
    x = d.activated ? activate(act, d.pre) : d.pre;
    cache.push_back(std::move(d));
  }
  return x;
}

Eigen::MatrixXd dense_backward(const std::vector<LinearIdx>& layers, const ModelParameters& params,
                               Activation act, const std::vector<ForwardTrace::Dense>& cache,
                               Eigen::MatrixXd grad, Gradients& grads, bool need_input_grad) {
  for (std::size_t i = layers.size(); i-- > 0;) {
    const auto& d = cache[i];
    if (d.activated) grad = activation_grad(act, d.pre, grad);
    const auto& w = params.values[static_cast<std::size_t>(layers[i].weight)];
    grads.values[static_cast<std::size_t>(layers[i].weight)].noalias() += grad.transpose() * d.input;
    grads.values[static_cast<std::size_t>(layers[i].bias)] += grad.colwise().sum().transpose();
    if (i > 0 || need_input_grad) {
      grad = grad * w;
    } else {
      grad.resize(0, 0);
    }
  }
  return grad;
}

Eigen::MatrixXd im2col(const Eigen::MatrixXd& x, int kernel) {
  const Eigen::Index t_len = x.rows();
  const Eigen::Index c = x.cols();
  const int pad = kernel / 2;
  Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(t_len, kernel * c);
  for (int k = 0; k < kernel; ++k) {
    const Eigen::Index shift = k - pad;
    const Eigen::Index src_begin = std::max<Eigen::Index>(0, shift);
    const Eigen::Index src_end = std::min<Eigen::Index>(t_len, t_len + shift);
    if (src_end <= src_begin) continue;
    cols.block(src_begin - shift, k * c, src_end - src_begin, c) =
        x.block(src_begin, 0, src_end - src_begin, c);
  }
  return cols;
}

void col2im_add(const Eigen::MatrixXd& dcols, int kernel, Eigen::MatrixXd& dx) {
  const Eigen::Index t_len = dx.rows();
  const Eigen::Index c = dx.cols();
  const int pad = kernel / 2;
  for (int k = 0; k < kernel; ++k) {
    const Eigen::Index shift = k - pad;
    const Eigen::Index src_begin = std::max<Eigen::Index>(0, shift);
    const Eigen::Index src_end = std::min<Eigen::Index>(t_len, t_len + shift);
    if (src_end <= src_begin) continue;
    dx.block(src_begin, 0, src_end - src_begin, c) +=
        dcols.block(src_begin - shift, k * c, src_end - src_begin, c);
  }
}

Eigen::MatrixXd conv_block_forward(const ConvIdx& idx, const ModelParameters& params,
                                   const RecognizerConfig& cfg, const Eigen::MatrixXd& x,
                                   ForwardTrace::ConvBlock& cache) {
  const auto& w = params.values[static_cast<std::size_t>(idx.weight)];
  const auto& b = params.values[static_cast<std::size_t>(idx.bias)];
  const auto& gamma = params.values[static_cast<std::size_t>(idx.scale)];
  const auto& beta = params.values[static_cast<std::size_t>(idx.shift)];

  cache.columns = im2col(x, cfg.kernel_width);
  cache.pre = cache.columns * w.transpose();
  cache.pre.rowwise() += b.col(0).transpose();
  const Eigen::MatrixXd a = activate(cfg.activation, cache.pre);

  // Per-frame layer norm over channels.
  const double c = static_cast<double>(a.cols());
  const Eigen::VectorXd mean = a.rowwise().sum() / c;
  const Eigen::MatrixXd centered = a.colwise() - mean;
  const Eigen::VectorXd var = centered.cwiseAbs2().rowwise().sum() / c;
  cache.inv_std = (var.array() + kNormEpsilon).rsqrt();
  cache.normalized = centered.array().colwise() * cache.inv_std.array();

  Eigen::MatrixXd y = cache.normalized.array().rowwise() * gamma.col(0).transpose().array();
  y.rowwise() += beta.col(0).transpose();
  return x + y;
}

Eigen::MatrixXd conv_block_backward(const ConvIdx& idx, const ModelParameters& params,
                                    const RecognizerConfig& cfg,
                                    const ForwardTrace::ConvBlock& cache,
                                    const Eigen::MatrixXd& dout, Gradients& grads) {
  const auto& w = params.values[static_cast<std::size_t>(idx.weight)];
  const auto& gamma = params.values[static_cast<std::size_t>(idx.scale)];

  grads.values[static_cast<std::size_t>(idx.scale)] +=
      dout.cwiseProduct(cache.normalized).colwise().sum().transpose();
  grads.values[static_cast<std::size_t>(idx.shift)] += dout.colwise().sum().transpose();

  const Eigen::MatrixXd dxhat = dout.array().rowwise() * gamma.col(0).transpose().array();
  const double c = static_cast<double>(dout.cols());
  const Eigen::VectorXd sum_dxhat = dxhat.rowwise().sum();
  const Eigen::VectorXd sum_dxhat_xhat = dxhat.cwiseProduct(cache.normalized).rowwise().sum();
  Eigen::MatrixXd da = (c * dxhat).colwise() - sum_dxhat;
  da.array() -= cache.normalized.array().colwise() * sum_dxhat_xhat.array();
  da = da.array().colwise() * (cache.inv_std.array() / c);

  const Eigen::MatrixXd dpre = activation_grad(cfg.activation, cache.pre, da);
  grads.values[static_cast<std::size_t>(idx.weight)].noalias() += dpre.transpose() * cache.columns;
  grads.values[static_cast<std::size_t>(idx.bias)] += dpre.colwise().sum().transpose();

  Eigen::MatrixXd dx = dout;  // residual path
  const Eigen::MatrixXd dcols = dpre * w;
  col2im_add(dcols, cfg.kernel_width, dx);
  return dx;
}

void gru_forward(const GruIdx& idx, const ModelParameters& params, int hidden,
                 const Eigen::MatrixXd& x, bool reverse, ForwardTrace::GruPass& pass) {
  const auto& wi = params.values[static_cast<std::size_t>(idx.w_input)];
  const auto& wh = params.values[static_cast<std::size_t>(idx.w_hidden)];
  const auto& bi = params.values[static_cast<std::size_t>(idx.b_input)];
  const auto& bh = params.values[static_cast<std::size_t>(idx.b_hidden)];
  const Eigen::Index t_len = x.rows();
  const Eigen::Index h = hidden;

  Eigen::MatrixXd gi = wi * x.transpose();  // 3H x T
  gi.colwise() += bi.col(0);
  pass.input = x;
  pass.r.resize(h, t_len);
  pass.z.resize(h, t_len);
  pass.n.resize(h, t_len);
  pass.hidden_n.resize(h, t_len);
  pass.h_prev.resize(h, t_len);
  pass.h.resize(h, t_len);

  Eigen::VectorXd state = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd gh(3 * h);
  for (Eigen::Index step = 0; step < t_len; ++step) {
    const Eigen::Index t = reverse ? t_len - 1 - step : step;
    gh.noalias() = wh * state;
    gh += bh.col(0);
    for (Eigen::Index j = 0; j < h; ++j) {
      const double r = sigmoid(gi(j, t) + gh(j));
      const double z = sigmoid(gi(h + j, t) + gh(h + j));
      const double hn = gh(2 * h + j);
      const double n = std::tanh(gi(2 * h + j, t) + r * hn);
      pass.r(j, t) = r;
      pass.z(j, t) = z;
      pass.n(j, t) = n;
      pass.hidden_n(j, t) = hn;
      pass.h_prev(j, t) = state(j);
    }
    for (Eigen::Index j = 0; j < h; ++j) {
      const double z = pass.z(j, t);
      state(j) = (1.0 - z) * pass.n(j, t) + z * state(j);
    }
    pass.h.col(t) = state;
  }
}

// `dh` is H x T, gradient w.r.t. the pass outputs. Returns T x in.
Eigen::MatrixXd gru_backward(const GruIdx& idx, const ModelParameters& params, int hidden,
                             const ForwardTrace::GruPass& pass, bool reverse,
                             const Eigen::MatrixXd& dh, Gradients& grads) {
  const auto& wi = params.values[static_cast<std::size_t>(idx.w_input)];
  const auto& wh = params.values[static_cast<std::size_t>(idx.w_hidden)];
  const Eigen::Index t_len = dh.cols();
  const Eigen::Index h = hidden;

  Eigen::MatrixXd dgi(3 * h, t_len);
  Eigen::MatrixXd dgh(3 * h, t_len);
  Eigen::VectorXd carry = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dgh_t(3 * h);
  for (Eigen::Index step = 0; step < t_len; ++step) {
    // Undo the forward order.
    const Eigen::Index t = reverse ? step : t_len - 1 - step;
    for (Eigen::Index j = 0; j < h; ++j) {
      const double g = dh(j, t) + carry(j);
      const double r = pass.r(j, t);
      const double z = pass.z(j, t);
      const double n = pass.n(j, t);
      const double dn = g * (1.0 - z);
      const double dz = g * (pass.h_prev(j, t) - n);
      carry(j) = g * z;
      const double dn_pre = dn * (1.0 - n * n);
      const double dr_pre = dn_pre * pass.hidden_n(j, t) * r * (1.0 - r);
      const double dz_pre = dz * z * (1.0 - z);
      dgi(j, t) = dr_pre;
      dgi(h + j, t) = dz_pre;
      dgi(2 * h + j, t) = dn_pre;
      dgh_t(j) = dr_pre;
      dgh_t(h + j) = dz_pre;
      dgh_t(2 * h + j) = dn_pre * r;
    }
    dgh.col(t) = dgh_t;
    carry.noalias() += wh.transpose() * dgh_t;
  }
  grads.values[static_cast<std::size_t>(idx.w_hidden)].noalias() += dgh * pass.h_prev.transpose();
  grads.values[static_cast<std::size_t>(idx.b_hidden)] += dgh.rowwise().sum();
  grads.values[static_cast<std::size_t>(idx.w_input)].noalias() += dgi * pass.input;
  grads.values[static_cast<std::size_t>(idx.b_input)] += dgi.rowwise().sum();
  return dgi.transpose() * wi;
}

}  // namespace

ForwardTrace forward(const ModelParameters& params, const RecognizerConfig& cfg,
                     const Eigen::MatrixXd& features, const Eigen::MatrixXd* voicing, Mode mode,
                     std::mt19937_64* rng) {
  const Layout layout = checked_layout(cfg, params);
  if (features.rows() < 1) throw Error("forward: empty sequence");
  if (features.cols() != cfg.input_dim) {
    throw Error("forward: feature width " + std::to_string(features.cols()) + " != input_dim " +
                std::to_string(cfg.input_dim));
  }
  if (!features.allFinite()) throw Error("forward: non-finite input features");
  if (cfg.use_voicing) {
    if (!voicing) throw Error("forward: voicing track required by the config");
    if (voicing->rows() != features.rows() || voicing->cols() != 3) {
      throw Error("forward: voicing track must be T x 3");
    }
    if (!voicing->allFinite()) throw Error("forward: non-finite voicing track");
  }
  if (mode == Mode::kTrain && cfg.logit_noise_std > 0.0 && !rng) {
    throw Error("forward: train mode with logit noise needs an rng");
  }

  ForwardTrace trace;
  trace.mode = mode;
  trace.frames = static_cast<int>(features.rows());

  Eigen::MatrixXd x = dense_forward(layout.adapter, params, cfg.activation, features, trace.adapter);
  trace.conv.resize(layout.conv.size());
  for (std::size_t b = 0; b < layout.conv.size(); ++b) {
    x = conv_block_forward(layout.conv[b], params, cfg, x, trace.conv[b]);
    if (b == 0 && cfg.use_voicing) {
      trace.voicing = *voicing;
      x.noalias() += *voicing * params.values[static_cast<std::size_t>(layout.voicing)];
    }
  }
  trace.pre_recurrent = x;

  const int h = cfg.hidden_size;
  for (const auto& block : layout.recurrent) {
    std::vector<ForwardTrace::GruPass> passes(block.size());
    Eigen::MatrixXd out(x.rows(), h * static_cast<Eigen::Index>(block.size()));
    for (std::size_t d = 0; d < block.size(); ++d) {
      gru_forward(block[d], params, h, x, d == 1, passes[d]);
      out.middleCols(static_cast<Eigen::Index>(d) * h, h) = passes[d].h.transpose();
    }
    trace.recurrent.push_back(std::move(passes));
    x = std::move(out);
  }
  trace.penultimate = x;

  trace.logits = dense_forward(layout.classifier, params, cfg.activation, x, trace.classifier);
  if (mode == Mode::kTrain && cfg.logit_noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.logit_noise_std);
    for (Eigen::Index t = 0; t < trace.logits.rows(); ++t)
      for (Eigen::Index v = 0; v < trace.logits.cols(); ++v) trace.logits(t, v) += noise(*rng);
  }
  return trace;
}

void backward_accumulate(const ForwardTrace& trace, const ModelParameters& params,
                         const RecognizerConfig& cfg, const Eigen::MatrixXd& logit_grad,
                         Gradients& grads, Eigen::MatrixXd* input_grad) {
  const Layout layout = checked_layout(cfg, params);
  if (!grads.same_layout(params)) throw Error("backward: gradient buffer layout mismatch");
  if (logit_grad.rows() != trace.frames || logit_grad.cols() != cfg.vocab_size()) {
    throw Error("backward: logit gradient must be T x V");
  }
  if (trace.classifier.size() != layout.classifier.size() ||
      trace.conv.size() != layout.conv.size() ||
      trace.recurrent.size() != layout.recurrent.size()) {
    throw Error("backward: trace does not match the config");
  }

  Eigen::MatrixXd grad = dense_backward(layout.classifier, params, cfg.activation,
                                        trace.classifier, logit_grad, grads, true);
  const int h = cfg.hidden_size;
  for (std::size_t b = layout.recurrent.size(); b-- > 0;) {
    const auto& block = layout.recurrent[b];
    Eigen::MatrixXd dx;
    for (std::size_t d = 0; d < block.size(); ++d) {
      const Eigen::MatrixXd dh =
          grad.middleCols(static_cast<Eigen::Index>(d) * h, h).transpose();
      Eigen::MatrixXd part = gru_backward(block[d], params, h, trace.recurrent[b][d], d == 1, dh, grads);
      if (d == 0) {
        dx = std::move(part);
      } else {
        dx += part;
      }
    }
    grad = std::move(dx);
  }

  for (std::size_t b = layout.conv.size(); b-- > 0;) {
    if (b == 0 && cfg.use_voicing) {
      grads.values[static_cast<std::size_t>(layout.voicing)].noalias() +=
          trace.voicing.transpose() * grad;
    }
    grad = conv_block_backward(layout.conv[b], params, cfg, trace.conv[b], grad, grads);
  }

  grad = dense_backward(layout.adapter, params, cfg.activation, trace.adapter, std::move(grad),
                        grads, input_grad != nullptr);
  if (input_grad) *input_grad = std::move(grad);
}

BackwardResult backward(const ForwardTrace& trace, const ModelParameters& params,
                        const RecognizerConfig& cfg, const Eigen::MatrixXd& logit_grad,
                        bool compute_input_grad) {
  BackwardResult result;
  result.grads = params.zeros_like();
  backward_accumulate(trace, params, cfg, logit_grad, result.grads,
                      compute_input_grad ? &result.input_grad : nullptr);
  return result;
}

}  // namespace artrec
