// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/embedding.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "artrec/error.hpp"
#include "artrec/parallel.hpp"
#include "artrec/text_io.hpp"

namespace artrec {

Eigen::MatrixXd extract_penultimate(const ModelParameters& params, const RecognizerConfig& cfg,
                                    const Eigen::MatrixXd& features,
                                    const Eigen::MatrixXd* voicing) {
  if (features.cols() != cfg.input_dim) {
    throw Error("features have width " + std::to_string(features.cols()) +
                " but the recognizer expects " + std::to_string(cfg.input_dim));
  }
  return forward(params, cfg, features, cfg.use_voicing ? voicing : nullptr, Mode::kEval)
      .penultimate;
}

LabeledFeatureSet collect_labeled_features(const Corpus& corpus, const std::vector<std::string>& ids,
                                           const Vocabulary& vocab,
                                           const PhoneticClassMap& class_map,
                                           const RecognizerView& model, bool per_segment_pooling,
                                           int jobs) {
  if (!model.params || !model.cfg || !model.norm) throw Error("incomplete recognizer view");
  std::vector<LabeledFeatureSet> parts(ids.size());
  parallel_for(ids.size(), jobs, [&](std::size_t u) {
    const auto& utt = corpus.utterance(ids[u]);
    if (!utt.annotation) return;
    const auto& annotation = *utt.annotation;
    const Eigen::MatrixXd x =
        model.norm->apply(utterance_features(utt, model.kind, corpus.sample_rate()));
    Eigen::MatrixXd v;
    if (model.cfg->use_voicing) v = voicing_track(utt, vocab);
    const Eigen::MatrixXd feats = extract_penultimate(*model.params, *model.cfg, x, &v);
    const auto segments = frame_segments(annotation, utt.num_frames(), utt.frame_rate);

    auto keep = [&](int seg, PhoneticClass& cls) {
      if (seg < 0) return false;
      const int token = annotation[static_cast<std::size_t>(seg)].token;
      if (!vocab.is_phonetic(token)) return false;
      cls = class_map.class_of(token);
      return cls != PhoneticClass::kOthers;
    };

    auto& part = parts[u];
    std::vector<Eigen::RowVectorXd> rows;
    if (per_segment_pooling) {
      for (std::size_t s = 0; s < annotation.size(); ++s) {
        PhoneticClass cls{};
        if (!keep(static_cast<int>(s), cls)) continue;
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(feats.cols());
        int count = 0;
        for (std::size_t t = 0; t < segments.size(); ++t) {
          if (segments[t] == static_cast<int>(s)) {
            sum += feats.row(static_cast<Eigen::Index>(t));
            ++count;
          }
        }
        if (count == 0) continue;
        rows.push_back(sum / count);
        part.labels.push_back(cls);
        part.point_ids.push_back(ids[u] + ":s" + std::to_string(s));
      }
    } else {
      for (std::size_t t = 0; t < segments.size(); ++t) {
        PhoneticClass cls{};
        if (!keep(segments[t], cls)) continue;
        rows.push_back(feats.row(static_cast<Eigen::Index>(t)));
        part.labels.push_back(cls);
        part.point_ids.push_back(ids[u] + ":f" + std::to_string(t));
      }
    }
    part.points.resize(static_cast<Eigen::Index>(rows.size()), feats.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) part.points.row(static_cast<Eigen::Index>(i)) = rows[i];
  });

  LabeledFeatureSet out;
  Eigen::Index n = 0;
  for (const auto& p : parts) n += static_cast<Eigen::Index>(p.size());
  out.points.resize(n, model.cfg->penultimate_dim());
  Eigen::Index row = 0;
  for (auto& p : parts) {
    if (p.size() == 0) continue;
    out.points.middleRows(row, p.points.rows()) = p.points;
    row += p.points.rows();
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    out.point_ids.insert(out.point_ids.end(), p.point_ids.begin(), p.point_ids.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// t-SNE.

void TsneConfig::validate(std::size_t n) const {
  auto fail = [](const std::string& msg) { throw ConfigError("t-SNE config: " + msg); };
  if (n < 4) fail("needs at least 4 points, got " + std::to_string(n));
  if (!(perplexity > 1.0) || !(perplexity < static_cast<double>(n) / 3.0)) {
    fail("perplexity " + format_double(perplexity) + " is infeasible for " + std::to_string(n) +
         " points (need 1 < perplexity < N/3)");
  }
  if (iterations < 1) fail("iterations must be positive");
  if (exaggeration_iterations < 0 || exaggeration_iterations > iterations) {
    fail("exaggeration_iterations must lie in [0, iterations]");
  }
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(exaggeration >= 1.0)) fail("exaggeration must be >= 1");
}

namespace {

constexpr double kEntropyTolerance = 1e-5;
constexpr int kMaxBisectionSteps = 200;
constexpr double kQFloor = 1e-12;

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double diff = x(i, k) - x(j, k);
        s += diff * diff;
      }
      d(i, j) = s;
      d(j, i) = s;
    }
  }
  return d;
}

Eigen::MatrixXd seeded_layout(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1e-4);
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = dist(rng);
    y(i, 1) = dist(rng);
  }
  return y;
}

// Student-t numerators (zero diagonal) and their sum.
Eigen::MatrixXd student_numerators(const Eigen::MatrixXd& y, double& total) {
  const Eigen::Index n = y.rows();
  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(n, n);
  total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dx = y(i, 0) - y(j, 0);
      const double dy = y(i, 1) - y(j, 1);
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      num(i, j) = v;
      num(j, i) = v;
      total += 2.0 * v;
    }
  }
  return num;
}

}  // namespace

TsneAffinities tsne_affinities(const Eigen::MatrixXd& points, double perplexity) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw Error("tsne_affinities: need at least 2 points");
  if (!points.allFinite()) throw Error("tsne_affinities: non-finite input");
  if (!(perplexity > 1.0)) throw ConfigError("tsne_affinities: perplexity must exceed 1");
  const Eigen::MatrixXd d = squared_distances(points);
  TsneAffinities out;
  out.p = Eigen::MatrixXd::Zero(n, n);
  if (d.maxCoeff() == 0.0) {
    out.degenerate = true;
    return out;
  }

  const double target = std::log(perplexity);
  Eigen::MatrixXd cond = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, d(i, j));
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    Eigen::VectorXd row(n);
    for (int step = 0; step < kMaxBisectionSteps; ++step) {
      double sum = 0.0;
      double weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
          row(j) = 0.0;
          continue;
        }
        const double shifted = d(i, j) - dmin;
        row(j) = std::exp(-beta * shifted);
        sum += row(j);
        weighted += shifted * row(j);
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      row /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < kEntropyTolerance) break;
      if (diff > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    cond.row(i) = row.transpose();
  }
  out.p = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
  return out;
}

double tsne_kl(const Eigen::MatrixXd& p, const Eigen::MatrixXd& embedding) {
  double total = 0.0;
  const Eigen::MatrixXd num = student_numerators(embedding, total);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      kl += p(i, j) * std::log(p(i, j) / std::max(num(i, j) / total, kQFloor));
    }
  }
  return kl;
}

TsneResult tsne(const Eigen::MatrixXd& points, const TsneConfig& cfg) {
  const Eigen::Index n = points.rows();
  cfg.validate(static_cast<std::size_t>(n));
  TsneResult result;
  const TsneAffinities aff = tsne_affinities(points, cfg.perplexity);
  Eigen::MatrixXd y = seeded_layout(n, cfg.seed);
  if (aff.degenerate) {
    result.degenerate = true;
    result.embedding = y.rowwise() - y.colwise().mean();
    return result;
  }

  Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd grad(n, 2);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const double exaggeration = iter < cfg.exaggeration_iterations ? cfg.exaggeration : 1.0;
    const double momentum =
        iter < cfg.momentum_switch_iteration ? cfg.initial_momentum : cfg.final_momentum;
    double total = 0.0;
    const Eigen::MatrixXd num = student_numerators(y, total);
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(num(i, j) / total, kQFloor);
        const double mult = (exaggeration * aff.p(i, j) - q) * num(i, j);
        grad(i, 0) += 4.0 * mult * (y(i, 0) - y(j, 0));
        grad(i, 1) += 4.0 * mult * (y(i, 1) - y(j, 1));
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < 2; ++k) {
        const bool same_sign = (grad(i, k) > 0.0) == (update(i, k) > 0.0);
        gains(i, k) = same_sign ? gains(i, k) * 0.8 : gains(i, k) + 0.2;
        gains(i, k) = std::max(gains(i, k), 0.01);
        update(i, k) = momentum * update(i, k) - cfg.learning_rate * gains(i, k) * grad(i, k);
      }
    }
    y += update;
    y = y.rowwise() - y.colwise().mean();
    if (iter + 1 == cfg.exaggeration_iterations) result.kl_after_exaggeration = tsne_kl(aff.p, y);
  }
  result.kl_final = tsne_kl(aff.p, y);
  if (cfg.exaggeration_iterations == 0) result.kl_after_exaggeration = result.kl_final;
  result.embedding = std::move(y);
  return result;
}

// ---------------------------------------------------------------------------
// Export.

void write_embedding_csv(const std::filesystem::path& path, const LabeledFeatureSet& set,
                         const Eigen::MatrixXd& embedding) {
  if (embedding.rows() != static_cast<Eigen::Index>(set.size()) || embedding.cols() != 2) {
    throw Error("embedding does not match the labelled set");
  }
  std::string out = "point_id,class,x,y\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out += set.point_ids[i] + "," + std::string(to_string(set.labels[i])) + "," +
           format_double(embedding(r, 0)) + "," + format_double(embedding(r, 1)) + "\n";
  }
  write_text_file(path, out);
}

void write_embedding_svg(const std::filesystem::path& path, const LabeledFeatureSet& set,
                         const Eigen::MatrixXd& embedding) {
  if (embedding.rows() != static_cast<Eigen::Index>(set.size()) || embedding.cols() != 2) {
    throw Error("embedding does not match the labelled set");
  }
  static constexpr std::array<const char*, kNumPhoneticClasses> kColors = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  constexpr double kSize = 600.0;
  constexpr double kMargin = 20.0;
  constexpr double kLegend = 170.0;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (embedding.rows() > 0) {
    x0 = embedding.col(0).minCoeff();
    x1 = embedding.col(0).maxCoeff();
    y0 = embedding.col(1).minCoeff();
    y1 = embedding.col(1).maxCoeff();
  }
  const double span = std::max({x1 - x0, y1 - y0, 1e-12});
  auto sx = [&](double v) { return kMargin + (v - x0) / span * (kSize - 2 * kMargin); };
  auto sy = [&](double v) { return kSize - kMargin - (v - y0) / span * (kSize - 2 * kMargin); };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kSize + kLegend, kSize);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.7\"/>\n",
                       sx(embedding(r, 0)), sy(embedding(r, 1)),
                       kColors[static_cast<std::size_t>(set.labels[i])]);
  }
  for (int c = 0; c < kNumNamedClasses; ++c) {
    const double y = kMargin + 20.0 * c;
    out += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"5\" fill=\"{}\"/>\n", kSize + 10.0,
                       y, kColors[static_cast<std::size_t>(c)]);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"12\" font-family=\"sans-serif\">{}</text>\n",
                       kSize + 20.0, y + 4.0, display_name(kAllPhoneticClasses[static_cast<std::size_t>(c)]));
  }
  out += "</svg>\n";
  write_text_file(path, out);
}

}  // namespace artrec
