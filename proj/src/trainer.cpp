// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/trainer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "artrec/ctc.hpp"
#include "artrec/error.hpp"
#include "artrec/metrics.hpp"
#include "artrec/parallel.hpp"
#include "artrec/text_io.hpp"

namespace artrec {

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("train config: " + msg); };
  if (batch_size < 1) fail("batch_size must be positive");
  if (epochs < 1) fail("epochs must be positive");
  if (!(base_lr > 0.0) || !(max_lr >= base_lr)) fail("need 0 < base_lr <= max_lr");
  if (half_cycle_steps < 0) fail("half_cycle_steps must be >= 1 (or 0 for the default)");
  if (!(l2 >= 0.0)) fail("l2 must be non-negative");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    fail("adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) fail("adam epsilon must be positive");
  if (jobs < 1) fail("jobs must be positive");
}

std::map<std::string, std::string> TrainConfig::to_key_values() const {
  return {
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"adam_beta1", format_double(adam.beta1)},
      {"adam_beta2", format_double(adam.beta2)},
      {"adam_epsilon", format_double(adam.epsilon)},
      {"base_lr", format_double(base_lr)},
      {"max_lr", format_double(max_lr)},
      {"half_cycle_steps", std::to_string(half_cycle_steps)},
      {"l2", format_double(l2)},
      {"seed", std::to_string(seed)},
      {"patience", std::to_string(patience)},
  };
}

std::vector<std::string> TrainConfig::apply_key_values(
    const std::map<std::string, std::string>& kv) {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : kv) {
    const std::string ctx = "train config key '" + key + "'";
    try {
      if (key == "batch_size") {
        batch_size = static_cast<int>(parse_int(value, ctx));
      } else if (key == "epochs") {
        epochs = static_cast<int>(parse_int(value, ctx));
      } else if (key == "adam_beta1") {
        adam.beta1 = parse_double(value, ctx);
      } else if (key == "adam_beta2") {
        adam.beta2 = parse_double(value, ctx);
      } else if (key == "adam_epsilon") {
        adam.epsilon = parse_double(value, ctx);
      } else if (key == "base_lr") {
        base_lr = parse_double(value, ctx);
      } else if (key == "max_lr") {
        max_lr = parse_double(value, ctx);
      } else if (key == "half_cycle_steps") {
        half_cycle_steps = parse_int(value, ctx);
      } else if (key == "l2") {
        l2 = parse_double(value, ctx);
      } else if (key == "seed") {
        const long s = parse_int(value, ctx);
        if (s < 0) throw ConfigError(ctx + ": seed must be non-negative");
        seed = static_cast<std::uint64_t>(s);
      } else if (key == "patience") {
        patience = static_cast<int>(parse_int(value, ctx));
      } else if (key == "jobs") {
        jobs = static_cast<int>(parse_int(value, ctx));
      } else {
        unknown.push_back(key);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  return unknown;
}

double cyclic_lr(long step, double base_lr, double max_lr, long half_cycle) {
  if (step < 0) throw Error("cyclic_lr: negative step");
  if (half_cycle < 1) throw Error("cyclic_lr: half cycle must be >= 1");
  const long x = step % (2 * half_cycle);
  const double frac = x <= half_cycle ? static_cast<double>(x) / static_cast<double>(half_cycle)
                                      : static_cast<double>(2 * half_cycle - x) /
                                            static_cast<double>(half_cycle);
  return base_lr + (max_lr - base_lr) * frac;
}

OptimizerState OptimizerState::zeros_like(const ModelParameters& params) {
  OptimizerState s;
  s.m = params.zeros_like();
  s.v = params.zeros_like();
  return s;
}

void adam_step(ModelParameters& params, const Gradients& grads, OptimizerState& state, double lr,
               double l2, const AdamConfig& adam) {
  if (!params.same_layout(grads) || !params.same_layout(state.m) || !params.same_layout(state.v)) {
    throw Error("adam_step: parameter, gradient and state layouts differ");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads.values[i].allFinite()) {
      throw Error("non-finite gradient in parameter '" + grads.names[i] + "'");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(adam.beta1, t);
  const double c2 = 1.0 - std::pow(adam.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params.values[i];
    auto& m = state.m.values[i];
    auto& v = state.v.values[i];
    const Eigen::MatrixXd g = grads.values[i] + l2 * p;
    m = adam.beta1 * m + (1.0 - adam.beta1) * g;
    v = adam.beta2 * v + (1.0 - adam.beta2) * g.cwiseAbs2();
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + adam.epsilon);
  }
}

NormStats fit_norm_stats(const Corpus& corpus, const std::vector<std::string>& ids,
                         FeatureKind kind) {
  std::vector<Eigen::MatrixXd> raw;
  raw.reserve(ids.size());
  for (const auto& id : ids)
    raw.push_back(utterance_features(corpus.utterance(id), kind, corpus.sample_rate()));
  std::vector<const Eigen::MatrixXd*> ptrs;
  for (const auto& m : raw) ptrs.push_back(&m);
  return NormStats::fit(ptrs);
}

std::vector<Example> prepare_examples(const Corpus& corpus, const std::vector<std::string>& ids,
                                      const Vocabulary& vocab, FeatureKind kind,
                                      const NormStats& norm, bool use_voicing) {
  std::vector<Example> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto& u = corpus.utterance(id);
    Example ex;
    ex.id = id;
    ex.features = norm.apply(utterance_features(u, kind, corpus.sample_rate()));
    if (u.annotation) ex.target = target_sequence(u);
    if (use_voicing) {
      if (!u.annotation) throw ConfigError("voicing needs annotations; '" + id + "' has none");
      ex.voicing = voicing_track(u, vocab);
      if (ex.voicing.rows() != ex.features.rows()) {
        throw Error("utterance '" + id + "': voicing and feature frame counts differ");
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

PaddedBatch pad_batch(const std::vector<const Example*>& members) {
  PaddedBatch batch;
  Eigen::Index max_len = 0;
  for (const auto* ex : members) max_len = std::max(max_len, ex->features.rows());
  for (const auto* ex : members) {
    const Eigen::Index n = ex->features.rows();
    if (n < 1) throw Error("pad_batch: utterance '" + ex->id + "' is empty");
    Eigen::MatrixXd f(max_len, ex->features.cols());
    f.topRows(n) = ex->features;
    for (Eigen::Index t = n; t < max_len; ++t) f.row(t) = ex->features.row(n - 1);
    batch.features.push_back(std::move(f));
    if (ex->voicing.size() > 0) {
      Eigen::MatrixXd v(max_len, ex->voicing.cols());
      v.topRows(n) = ex->voicing;
      for (Eigen::Index t = n; t < max_len; ++t) v.row(t) = ex->voicing.row(n - 1);
      batch.voicing.push_back(std::move(v));
    } else {
      batch.voicing.emplace_back();
    }
    batch.lengths.push_back(static_cast<int>(n));
    batch.targets.push_back(ex->target);
  }
  return batch;
}

namespace {

std::mt19937_64 noise_rng(std::uint64_t seed, long step, std::size_t position) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(position)};
  return std::mt19937_64(seq);
}

}  // namespace

BatchResult batch_loss_and_gradient(const ModelParameters& params, const RecognizerConfig& cfg,
                                    const PaddedBatch& batch, Mode mode, std::uint64_t noise_seed,
                                    long step, int jobs) {
  const std::size_t n = batch.lengths.size();
  if (n == 0) throw Error("empty batch");
  std::vector<double> losses(n, 0.0);
  std::vector<Gradients> grads(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const int len = batch.lengths[i];
    const Eigen::MatrixXd x = batch.features[i].topRows(len);
    Eigen::MatrixXd v;
    if (cfg.use_voicing) v = batch.voicing[i].topRows(len);
    auto rng = noise_rng(noise_seed, step, i);
    const ForwardTrace trace =
        forward(params, cfg, x, cfg.use_voicing ? &v : nullptr, mode, &rng);
    const CtcResult ctc = ctc_loss(log_softmax(trace.logits), batch.targets[i]);
    losses[i] = ctc.loss;
    grads[i] = params.zeros_like();
    backward_accumulate(trace, params, cfg, ctc.grad / static_cast<double>(n), grads[i], nullptr);
  });
  // Fixed-order reduction keeps results independent of `jobs`.
  BatchResult result;
  result.grads = params.zeros_like();
  for (std::size_t i = 0; i < n; ++i) {
    result.loss += losses[i];
    for (std::size_t p = 0; p < params.size(); ++p) result.grads.values[p] += grads[i].values[p];
  }
  result.loss /= static_cast<double>(n);
  return result;
}

std::vector<std::vector<int>> decode_examples(const ModelParameters& params,
                                              const RecognizerConfig& cfg,
                                              const std::vector<Example>& examples, int jobs) {
  std::vector<std::vector<int>> out(examples.size());
  parallel_for(examples.size(), jobs, [&](std::size_t i) {
    const auto& ex = examples[i];
    const ForwardTrace trace = forward(params, cfg, ex.features,
                                       cfg.use_voicing ? &ex.voicing : nullptr, Mode::kEval);
    out[i] = greedy_decode_indices(trace.logits);
  });
  return out;
}

double evaluate_per(const ModelParameters& params, const RecognizerConfig& cfg,
                    const std::vector<Example>& examples, const Vocabulary& vocab, int jobs) {
  const auto decodes = decode_examples(params, cfg, examples, jobs);
  std::vector<RefHypPair> pairs;
  auto symbols = [&](const std::vector<int>& seq) {
    SymbolSeq s;
    for (int k : seq) s.push_back(vocab.symbol(k));
    return s;
  };
  for (std::size_t i = 0; i < examples.size(); ++i)
    pairs.emplace_back(symbols(examples[i].target), symbols(decodes[i]));
  return per(pairs);
}

TrainResult train(const std::vector<Example>& train_set, const std::vector<Example>& validation_set,
                  const Vocabulary& vocab, const RecognizerConfig& cfg, const TrainConfig& tcfg) {
  cfg.validate();
  tcfg.validate();
  if (train_set.empty()) throw Error("train: empty training split");
  if (validation_set.empty()) throw Error("train: empty validation split");
  if (cfg.vocab_size() != vocab.size()) {
    throw ConfigError("classifier width " + std::to_string(cfg.vocab_size()) +
                      " does not match vocabulary size " + std::to_string(vocab.size()));
  }
  std::vector<std::string> infeasible;
  for (const auto* set : {&train_set, &validation_set}) {
    for (const auto& ex : *set) {
      if (ctc_min_frames(ex.target) > ex.features.rows()) infeasible.push_back(ex.id);
    }
  }
  if (!infeasible.empty()) {
    std::string list;
    for (const auto& id : infeasible) list += (list.empty() ? "" : ", ") + id;
    throw Error("targets longer than their utterances (" + std::to_string(infeasible.size()) +
                "): " + list);
  }

  const long steps_per_epoch =
      (static_cast<long>(train_set.size()) + tcfg.batch_size - 1) / tcfg.batch_size;
  const long half_cycle = tcfg.half_cycle_steps > 0 ? tcfg.half_cycle_steps : 2 * steps_per_epoch;

  TrainResult result;
  ModelParameters params = init_parameters(cfg, tcfg.seed);
  OptimizerState opt = OptimizerState::zeros_like(params);
  std::mt19937_64 shuffle_rng(tcfg.seed ^ 0x5851f42d4c957f2dULL);
  const std::uint64_t noise_seed = tcfg.seed ^ 0xda3e39cb94b95bdbULL;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  long step = 0;
  bool have_best = false;
  int stale = 0;
  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (long b = 0; b < steps_per_epoch; ++b) {
      std::vector<const Example*> members;
      const std::size_t begin = static_cast<std::size_t>(b * tcfg.batch_size);
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(tcfg.batch_size));
      for (std::size_t i = begin; i < end; ++i) members.push_back(&train_set[order[i]]);
      const PaddedBatch batch = pad_batch(members);
      BatchResult br =
          batch_loss_and_gradient(params, cfg, batch, Mode::kTrain, noise_seed, step, tcfg.jobs);
      if (!std::isfinite(br.loss)) {
        throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                    ", step " + std::to_string(step));
      }
      const double lr = cyclic_lr(step, tcfg.base_lr, tcfg.max_lr, half_cycle);
      adam_step(params, br.grads, opt, lr, tcfg.l2, tcfg.adam);
      result.log.steps.push_back({step, lr, br.loss});
      epoch_loss += br.loss;
      ++step;
    }

    const double val_per = evaluate_per(params, cfg, validation_set, vocab, tcfg.jobs);
    result.log.epochs.push_back({epoch, val_per});
    spdlog::info("epoch {} mean loss {:.4f} val PER {}", epoch,
                 epoch_loss / static_cast<double>(steps_per_epoch), format_per(val_per));
    result.final_params = params;
    result.final_val_per = val_per;
    if (!have_best || val_per < result.best_val_per) {
      have_best = true;
      result.best_val_per = val_per;
      result.best_epoch = epoch;
      result.best_params = params;
      stale = 0;
    } else if (tcfg.patience >= 0 && ++stale > tcfg.patience) {
      spdlog::info("early stop after epoch {} ({} epochs without improvement)", epoch, stale);
      break;
    }
  }
  return result;
}

void write_step_log(const std::filesystem::path& path, const TrainingLog& log) {
  std::string out = "step,lr,loss\n";
  for (const auto& s : log.steps)
    out += std::to_string(s.step) + "," + format_double(s.lr) + "," + format_double(s.loss) + "\n";
  write_text_file(path, out);
}

void write_epoch_log(const std::filesystem::path& path, const TrainingLog& log) {
  std::string out = "epoch,val_per\n";
  for (const auto& e : log.epochs)
    out += std::to_string(e.epoch) + "," + format_double(e.val_per) + "\n";
  write_text_file(path, out);
}

}  // namespace artrec
