// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/baseline.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <set>
#include <sstream>

#include "artrec/error.hpp"
#include "artrec/text_io.hpp"

namespace artrec {

namespace {

constexpr std::string_view kGlobalSymbol = "__global__";

// Running mean; exact when every sample is identical.
struct MeanAccumulator {
  std::array<double, kArticulatoryDim> mean{};
  long count = 0;

  void add(const ArticulatoryFrame& frame) {
    ++count;
    const double n = static_cast<double>(count);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += (frame.values[i] - mean[i]) / n;
  }
};

}  // namespace

MeanContourModel MeanContourModel::fit(const Corpus& corpus,
                                       const std::vector<std::string>& train_ids,
                                       const Vocabulary& vocab) {
  if (train_ids.empty()) throw Error("mean-contour fit: empty training split");
  std::map<std::string, MeanAccumulator> per_token;
  MeanAccumulator global;
  for (const auto& id : train_ids) {
    const auto& u = corpus.utterance(id);
    const auto labels = frame_labels(u, vocab);
    for (int t = 0; t < u.num_frames(); ++t) {
      const auto frame = assemble_articulatory_frame(u.frames[static_cast<std::size_t>(t)]);
      per_token[vocab.symbol(labels[static_cast<std::size_t>(t)])].add(frame);
      global.add(frame);
    }
  }
  if (global.count == 0) throw Error("mean-contour fit: training split has no frames");
  MeanContourModel model;
  for (const auto& [symbol, acc] : per_token) {
    Entry e;
    e.mean.values = acc.mean;
    e.support = acc.count;
    model.entries_.emplace(symbol, e);
  }
  Entry g;
  g.mean.values = global.mean;
  g.support = global.count;
  model.global_ = g;
  return model;
}

int synthesized_frame_count(const std::vector<PhoneSegment>& annotation, double frame_rate) {
  if (annotation.empty()) return 0;
  // Tolerate representation error in times that sit on the frame grid.
  return static_cast<int>(std::ceil(annotation.back().end * frame_rate - 1e-9));
}

std::vector<ArticulatoryFrame> MeanContourModel::synthesize(
    const std::vector<PhoneSegment>& annotation, double frame_rate,
    const Vocabulary& vocab) const {
  const int frames = synthesized_frame_count(annotation, frame_rate);
  const auto labels = frame_labels(annotation, frames, frame_rate, vocab);
  std::vector<ArticulatoryFrame> out;
  out.reserve(static_cast<std::size_t>(frames));
  std::set<std::string> warned;
  for (int label : labels) {
    const auto& symbol = vocab.symbol(label);
    if (const auto it = entries_.find(symbol); it != entries_.end()) {
      out.push_back(it->second.mean);
      continue;
    }
    if (!global_) {
      throw Error("mean-contour model has no entry for '" + symbol + "' and no global mean");
    }
    if (warned.insert(symbol).second) {
      spdlog::warn("mean-contour: token '{}' unseen in training, using the global mean", symbol);
    }
    out.push_back(global_->mean);
  }
  return out;
}

Corpus MeanContourModel::synthesize_corpus(const Corpus& source,
                                           const std::vector<std::string>& ids,
                                           const Vocabulary& vocab) const {
  std::vector<UtteranceRecord> utterances;
  CorpusSplit split;
  for (const auto& id : ids) {
    const auto& original = source.utterance(id);
    if (!original.annotation) throw Error("utterance " + id + " has no annotation to synthesize");
    UtteranceRecord u;
    u.id = id;
    u.frame_rate = original.frame_rate;
    u.annotation = original.annotation;
    for (const auto& frame : synthesize(*original.annotation, original.frame_rate, vocab)) {
      u.frames.push_back(split_articulatory_frame(frame));
    }
    utterances.push_back(std::move(u));
    split.test.push_back(id);
  }
  return Corpus(source.frame_rate(), 0, std::move(utterances), std::move(split));
}

void MeanContourModel::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  out << "symbol,channel,position,value,support_count\n";
  auto emit = [&](std::string_view symbol, const Entry& e) {
    for (int c = 0; c < 2; ++c) {
      for (int p = 0; p < kArticulatoryChannelSize; ++p) {
        out << symbol << ',' << c << ',' << p << ',' << format_double(e.mean.at(c, p)) << ','
            << e.support << '\n';
      }
    }
  };
  for (const auto& [symbol, e] : entries_) emit(symbol, e);
  if (global_) emit(kGlobalSymbol, *global_);
  write_text_file(path, out.str());
}

MeanContourModel MeanContourModel::load(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "symbol,channel,position,value,support_count") {
    throw Error(path.string() + ": missing header");
  }
  std::map<std::string, Entry> entries;
  std::map<std::string, int> filled;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    // Symbols may contain commas only in principle; split from the right.
    auto f = split(lines[i], ',');
    if (f.size() < 5) throw Error(where + ": expected 5 columns");
    std::string symbol = f[0];
    for (std::size_t k = 1; k + 4 < f.size(); ++k) symbol += "," + f[k];
    const auto n = f.size();
    const long channel = parse_int(f[n - 4], where);
    const long position = parse_int(f[n - 3], where);
    if (channel < 0 || channel > 1 || position < 0 || position >= kArticulatoryChannelSize) {
      throw Error(where + ": channel/position out of range");
    }
    auto& e = entries[symbol];
    e.mean.at(static_cast<int>(channel), static_cast<int>(position)) = parse_double(f[n - 2], where);
    e.support = parse_int(f[n - 1], where);
    ++filled[symbol];
  }
  MeanContourModel model;
  for (auto& [symbol, e] : entries) {
    if (filled[symbol] != kArticulatoryDim) {
      throw Error(path.string() + ": incomplete mean for '" + symbol + "'");
    }
    if (symbol == kGlobalSymbol) {
      model.global_ = e;
    } else {
      model.entries_.emplace(symbol, e);
    }
  }
  return model;
}

}  // namespace artrec
