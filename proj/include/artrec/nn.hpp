// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace artrec {

enum class Activation { kRelu, kTanh, kGelu };

std::string_view to_string(Activation act);
Activation activation_from_string(std::string_view text);

/// Shape of the recognizer: adapter -> residual conv blocks -> recurrent
/// blocks -> classifier. Time resolution is preserved end to end.
struct RecognizerConfig {
  int input_dim = 1000;
  /// Output widths of the adapter's linear layers; the last one must equal
  /// conv_channels. Empty means identity (input_dim == conv_channels).
  std::vector<int> adapter_dims = {256, 80};
  int conv_blocks = 5;
  int conv_channels = 80;
  int kernel_width = 5;  // odd
  Activation activation = Activation::kGelu;
  int recurrent_blocks = 3;
  int hidden_size = 128;  // per direction
  bool bidirectional = true;
  /// Output widths of the classifier's linear layers; the last is V.
  std::vector<int> classifier_dims = {128, 50};
  bool use_voicing = false;
  double logit_noise_std = 0.1;

  int vocab_size() const { return classifier_dims.back(); }
  int recurrent_output_dim() const { return hidden_size * (bidirectional ? 2 : 1); }
  /// Width of the classifier input (the embedding features).
  int penultimate_dim() const {
    return recurrent_blocks > 0 ? recurrent_output_dim() : conv_channels;
  }

  /// Throws ConfigError on inconsistent shapes.
  void validate() const;

  std::map<std::string, std::string> to_key_values() const;
  static RecognizerConfig from_key_values(const std::map<std::string, std::string>& kv);
};

/// Named parameter arrays in declaration order. Vectors are n x 1 matrices.
struct ModelParameters {
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> values;

  std::size_t size() const { return values.size(); }
  std::size_t scalar_count() const;
  int index_of(const std::string& name) const;

  /// Same names and shapes, all zeros.
  ModelParameters zeros_like() const;
  void set_zero();
  bool same_layout(const ModelParameters& other) const;
};

using Gradients = ModelParameters;

/// Fan-in scaled uniform weights, zero biases, unit norm scales, orthogonal
/// recurrent matrices. Deterministic in (cfg, seed).
ModelParameters init_parameters(const RecognizerConfig& cfg, std::uint64_t seed);

/// Parameter names/shapes for `cfg`, zero-filled.
ModelParameters parameter_layout(const RecognizerConfig& cfg);

enum class Mode { kTrain, kEval };

/// Activations cached by forward() for backward().
struct ForwardTrace {
  struct Dense {
    Eigen::MatrixXd input;  // T x in
    Eigen::MatrixXd pre;    // T x out, before activation
    bool activated = false;
  };
  struct ConvBlock {
    Eigen::MatrixXd columns;  // T x (K*C) im2col of the block input
    Eigen::MatrixXd pre;      // conv output before activation
    Eigen::MatrixXd normalized;  // x-hat of the layer norm
    Eigen::VectorXd inv_std;     // per frame
  };
  struct GruPass {
    Eigen::MatrixXd input;   // T x in
    Eigen::MatrixXd r, z, n;  // H x T
    Eigen::MatrixXd hidden_n;  // H x T: W_hn h_prev + b_hn
    Eigen::MatrixXd h_prev;   // H x T
    Eigen::MatrixXd h;        // H x T
  };

  Mode mode = Mode::kEval;
  int frames = 0;
  std::vector<Dense> adapter;
  std::vector<ConvBlock> conv;
  Eigen::MatrixXd voicing;  // T x 3 when used
  Eigen::MatrixXd pre_recurrent;  // T x C, output of the conv stack (after voicing)
  std::vector<std::vector<GruPass>> recurrent;  // [block][direction]
  Eigen::MatrixXd penultimate;  // T x D
  std::vector<Dense> classifier;
  Eigen::MatrixXd logits;  // T x V (noise included in train mode)
};

/// Runs the network over one sequence. `voicing` must be given iff
/// cfg.use_voicing. In train mode Gaussian noise with cfg.logit_noise_std is
/// added to the logits using `rng`.
ForwardTrace forward(const ModelParameters& params, const RecognizerConfig& cfg,
                     const Eigen::MatrixXd& features, const Eigen::MatrixXd* voicing, Mode mode,
                     std::mt19937_64* rng = nullptr);

struct BackwardResult {
  Gradients grads;
  Eigen::MatrixXd input_grad;  // T x input_dim (empty unless requested)
};

/// Exact reverse-mode gradients; logit noise passes through unchanged.
BackwardResult backward(const ForwardTrace& trace, const ModelParameters& params,
                        const RecognizerConfig& cfg, const Eigen::MatrixXd& logit_grad,
                        bool compute_input_grad = true);

/// Accumulating variant used by the trainer: adds into `grads`.
void backward_accumulate(const ForwardTrace& trace, const ModelParameters& params,
                         const RecognizerConfig& cfg, const Eigen::MatrixXd& logit_grad,
                         Gradients& grads, Eigen::MatrixXd* input_grad);

}  // namespace artrec
