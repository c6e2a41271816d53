// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "artrec/error.hpp"
#include "artrec/text_io.hpp"

namespace fs = std::filesystem;

namespace artrec {

std::optional<int> articulator_index(std::string_view name) {
  for (int i = 0; i < kNumArticulators; ++i)
    if (kArticulatorNames[static_cast<std::size_t>(i)] == name) return i;
  return std::nullopt;
}

std::string_view to_string(SplitName split) {
  switch (split) {
    case SplitName::kTrain: return "train";
    case SplitName::kValidation: return "validation";
    case SplitName::kTest: return "test";
  }
  return "?";
}

SplitName split_from_string(std::string_view text) {
  if (text == "train") return SplitName::kTrain;
  if (text == "validation" || text == "val") return SplitName::kValidation;
  if (text == "test") return SplitName::kTest;
  throw ConfigError("unknown split '" + std::string(text) + "'");
}

const std::vector<std::string>& CorpusSplit::ids(SplitName split) const {
  switch (split) {
    case SplitName::kTrain: return train;
    case SplitName::kValidation: return validation;
    case SplitName::kTest: return test;
  }
  return train;
}

Corpus::Corpus(double frame_rate, int sample_rate, std::vector<UtteranceRecord> utterances,
               CorpusSplit split)
    : frame_rate_(frame_rate), sample_rate_(sample_rate), split_(std::move(split)) {
  for (auto& u : utterances) {
    ids_.push_back(u.id);
    const std::string id = u.id;
    if (!utterances_.emplace(id, std::move(u)).second) throw Error("duplicate utterance id " + id);
  }
  std::sort(ids_.begin(), ids_.end());
  std::set<std::string> seen;
  for (auto which : {SplitName::kTrain, SplitName::kValidation, SplitName::kTest}) {
    for (const auto& id : split_.ids(which)) {
      if (!contains(id)) {
        throw Error(std::string(to_string(which)) + " split lists unknown utterance '" + id + "'");
      }
      if (!seen.insert(id).second) {
        throw Error("utterance '" + id + "' appears in more than one split");
      }
    }
  }
}

bool Corpus::contains(std::string_view id) const {
  return utterances_.find(id) != utterances_.end();
}

const UtteranceRecord& Corpus::utterance(std::string_view id) const {
  const auto it = utterances_.find(id);
  if (it == utterances_.end()) throw Error("unknown utterance '" + std::string(id) + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// Frame labelling.

std::vector<int> frame_segments(const std::vector<PhoneSegment>& annotation, int num_frames,
                                double frame_rate) {
  std::vector<int> out(static_cast<std::size_t>(num_frames), -1);
  std::size_t seg = 0;
  for (int t = 0; t < num_frames; ++t) {
    const double mid = (t + 0.5) / frame_rate;
    while (seg < annotation.size() && annotation[seg].end <= mid) ++seg;
    if (seg < annotation.size() && annotation[seg].start <= mid) {
      out[static_cast<std::size_t>(t)] = static_cast<int>(seg);
    }
  }
  return out;
}

std::vector<int> frame_labels(const std::vector<PhoneSegment>& annotation, int num_frames,
                              double frame_rate, const Vocabulary& vocab) {
  const int silence = vocab.silence_index().value_or(Vocabulary::kBlankIndex);
  std::vector<int> labels(static_cast<std::size_t>(num_frames), silence);
  const auto segments = frame_segments(annotation, num_frames, frame_rate);
  for (std::size_t t = 0; t < segments.size(); ++t)
    if (segments[t] >= 0) labels[t] = annotation[static_cast<std::size_t>(segments[t])].token;
  return labels;
}

std::vector<int> frame_labels(const UtteranceRecord& utterance, const Vocabulary& vocab) {
  static const std::vector<PhoneSegment> kEmpty;
  return frame_labels(utterance.annotation ? *utterance.annotation : kEmpty,
                      utterance.num_frames(), utterance.frame_rate, vocab);
}

std::vector<int> target_sequence(const UtteranceRecord& utterance) {
  std::vector<int> target;
  if (!utterance.annotation) return target;
  for (const auto& seg : *utterance.annotation) target.push_back(seg.token);
  return target;
}

std::string check_annotation(const std::vector<PhoneSegment>& annotation, int num_frames,
                             double frame_rate, const Vocabulary& vocab) {
  const double slack = 1.0 / frame_rate + 1e-9;
  for (std::size_t i = 0; i < annotation.size(); ++i) {
    const auto& seg = annotation[i];
    const std::string where = "segment " + std::to_string(i);
    if (!vocab.contains(seg.symbol)) return where + ": unknown token '" + seg.symbol + "'";
    if (!(seg.end > seg.start)) return where + ": end must be greater than start";
    if (seg.start < 0.0) return where + ": negative start time";
    if (i > 0 && seg.start < annotation[i - 1].end) {
      return where + ": overlaps or precedes the previous segment";
    }
  }
  if (!annotation.empty()) {
    const double duration = num_frames / frame_rate;
    const double last_end = annotation.back().end;
    if (std::abs(last_end - duration) > slack) {
      return "annotation ends at " + format_double(last_end) + " s but the contours span " +
             format_double(duration) + " s";
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Reading.

namespace {

constexpr std::string_view kContoursHeader = "frame,articulator,point_index,x,y";
constexpr std::string_view kAnnotationHeader = "start\tend\tsymbol";

struct Meta {
  double frame_rate = 50.0;
  int sample_rate = 0;
};

Meta read_meta(const fs::path& root) {
  Meta meta;
  const auto path = root / "meta.txt";
  if (!fs::exists(path)) return meta;
  for (const auto& [key, value] : parse_key_value_text(
           [&] {
             std::ostringstream s;
             for (const auto& l : read_lines(path)) s << l << '\n';
             return s.str();
           }(),
           path.string())) {
    if (key == "frame_rate") {
      meta.frame_rate = parse_double(value, path.string());
    } else if (key == "sample_rate") {
      meta.sample_rate = static_cast<int>(parse_int(value, path.string()));
    } else if (key != "generator_seed" && key != "source") {
      throw Error(path.string() + ": unknown key '" + key + "'");
    }
  }
  if (!(meta.frame_rate > 0.0)) throw Error(path.string() + ": frame_rate must be positive");
  return meta;
}

std::vector<ContourFrame> read_contours(const fs::path& path, const std::string& id) {
  std::ifstream in(path);
  if (!in) throw Error("utterance " + id + ": missing " + path.filename().string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != kContoursHeader) {
    throw Error("utterance " + id + ": contours.csv must start with header '" +
                std::string(kContoursHeader) + "'");
  }

  std::vector<ContourFrame> frames;
  // Per frame, per articulator slot (10 named + upper incisor), point bitmap.
  std::vector<std::array<std::uint64_t, kNumArticulators + 1>> seen;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = "utterance " + id + ": contours.csv:" + std::to_string(line_no);
    const auto f = split(line, ',');
    if (f.size() != 5) throw Error(where + ": expected 5 columns");
    const long frame = parse_int(f[0], where);
    if (frame < 0) throw Error(where + ": negative frame index");
    const auto art = articulator_index(f[1]);
    if (!art && f[1] != kUpperIncisor) throw Error(where + ": unknown articulator '" + f[1] + "'");
    const long point = parse_int(f[2], where);
    if (point < 0 || point >= kPointsPerContour) {
      throw Error("utterance " + id + ": frame " + std::to_string(frame) + ": articulator '" +
                  f[1] + "' has point index " + std::to_string(point) + " (expected 0.." +
                  std::to_string(kPointsPerContour - 1) + ")");
    }
    const Point p{parse_double(f[3], where), parse_double(f[4], where)};

    if (static_cast<std::size_t>(frame) >= frames.size()) {
      frames.resize(static_cast<std::size_t>(frame) + 1);
      seen.resize(static_cast<std::size_t>(frame) + 1, {});
    }
    auto& fr = frames[static_cast<std::size_t>(frame)];
    const std::size_t slot = art ? static_cast<std::size_t>(*art) : kNumArticulators;
    auto& bits = seen[static_cast<std::size_t>(frame)][slot];
    const std::uint64_t bit = std::uint64_t{1} << point;
    if (bits & bit) {
      throw Error(where + ": duplicate point " + std::to_string(point) + " of '" + f[1] + "'");
    }
    bits |= bit;
    if (art) {
      fr.articulators[static_cast<std::size_t>(*art)][static_cast<std::size_t>(point)] = p;
    } else {
      if (!fr.upper_incisor) fr.upper_incisor.emplace();
      (*fr.upper_incisor)[static_cast<std::size_t>(point)] = p;
    }
  }

  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (std::size_t a = 0; a <= kNumArticulators; ++a) {
      const auto bits = seen[t][a];
      if (a == kNumArticulators && bits == 0) continue;  // upper incisor is optional
      const std::string name(a < kNumArticulators ? kArticulatorNames[a] : kUpperIncisor);
      const int count = std::popcount(bits);
      if (count == 0) {
        throw Error("utterance " + id + ": frame " + std::to_string(t) +
                    ": missing articulator '" + name + "'");
      }
      if (count != kPointsPerContour) {
        throw Error("utterance " + id + ": frame " + std::to_string(t) + ": articulator '" +
                    name + "' has " + std::to_string(count) + " points (expected " +
                    std::to_string(kPointsPerContour) + ")");
      }
    }
  }
  return frames;
}

std::vector<PhoneSegment> read_annotation(const fs::path& path, const std::string& id,
                                          const Vocabulary& vocab) {
  std::vector<PhoneSegment> segments;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    if (i == 0 && trim(lines[i]) == kAnnotationHeader) continue;
    const std::string where = "utterance " + id + ": annotation.tsv:" + std::to_string(i + 1);
    const auto f = split(lines[i], '\t');
    if (f.size() != 3) throw Error(where + ": expected start<TAB>end<TAB>symbol");
    PhoneSegment seg;
    seg.start = parse_double(f[0], where);
    seg.end = parse_double(f[1], where);
    seg.symbol = f[2];
    if (!vocab.contains(seg.symbol)) throw Error(where + ": unknown token '" + seg.symbol + "'");
    seg.token = vocab.index_of(seg.symbol);
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<float> read_audio(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) throw Error(path.string() + ": size is not a multiple of 4 bytes");
  std::vector<float> samples(bytes.size() / 4);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(bytes[i * 4 + b]);
    samples[i] = std::bit_cast<float>(v);
  }
  return samples;
}

UtteranceRecord read_utterance(const fs::path& dir, const std::string& id, const Meta& meta,
                               const Vocabulary& vocab) {
  UtteranceRecord u;
  u.id = id;
  u.frame_rate = meta.frame_rate;
  u.frames = read_contours(dir / "contours.csv", id);
  if (fs::exists(dir / "annotation.tsv")) {
    u.annotation = read_annotation(dir / "annotation.tsv", id, vocab);
    const auto problem = check_annotation(*u.annotation, u.num_frames(), u.frame_rate, vocab);
    if (!problem.empty()) throw Error("utterance " + id + ": annotation " + problem);
  }
  if (fs::exists(dir / "audio.f32")) u.audio = read_audio(dir / "audio.f32");
  return u;
}

std::vector<std::string> read_id_list(const fs::path& path) {
  std::vector<std::string> ids;
  for (const auto& line : read_lines(path)) {
    const auto id = trim(line);
    if (!id.empty()) ids.emplace_back(id);
  }
  return ids;
}

struct Listing {
  Meta meta;
  std::vector<std::string> ids;
  CorpusSplit split;
};

Listing list_corpus(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error("corpus directory not found: " + root.string());
  Listing listing;
  listing.meta = read_meta(root);
  const auto utt_dir = root / "utterances";
  if (!fs::is_directory(utt_dir)) throw Error("missing directory " + utt_dir.string());
  for (const auto& entry : fs::directory_iterator(utt_dir)) {
    if (entry.is_directory()) listing.ids.push_back(entry.path().filename().string());
  }
  std::sort(listing.ids.begin(), listing.ids.end());
  const auto splits = root / "splits";
  for (auto which : {SplitName::kTrain, SplitName::kValidation, SplitName::kTest}) {
    const auto path = splits / (std::string(to_string(which)) + ".txt");
    if (!fs::exists(path)) throw Error("missing split file " + path.string());
    auto ids = read_id_list(path);
    switch (which) {
      case SplitName::kTrain: listing.split.train = std::move(ids); break;
      case SplitName::kValidation: listing.split.validation = std::move(ids); break;
      case SplitName::kTest: listing.split.test = std::move(ids); break;
    }
  }
  return listing;
}

}  // namespace

Corpus load_corpus(const fs::path& root, const Vocabulary& vocab) {
  auto listing = list_corpus(root);
  std::vector<UtteranceRecord> utterances;
  utterances.reserve(listing.ids.size());
  for (const auto& id : listing.ids) {
    utterances.push_back(read_utterance(root / "utterances" / id, id, listing.meta, vocab));
  }
  return Corpus(listing.meta.frame_rate, listing.meta.sample_rate, std::move(utterances),
                std::move(listing.split));
}

std::vector<std::string> validate_corpus(const fs::path& root, const Vocabulary& vocab) {
  std::vector<std::string> findings;
  Listing listing;
  try {
    listing = list_corpus(root);
  } catch (const Error& e) {
    findings.emplace_back(e.what());
    return findings;
  }
  const std::set<std::string> known(listing.ids.begin(), listing.ids.end());
  for (const auto& id : listing.ids) {
    try {
      read_utterance(root / "utterances" / id, id, listing.meta, vocab);
    } catch (const Error& e) {
      findings.emplace_back(e.what());
    }
  }
  std::set<std::string> seen;
  for (auto which : {SplitName::kTrain, SplitName::kValidation, SplitName::kTest}) {
    for (const auto& id : listing.split.ids(which)) {
      if (!known.count(id)) {
        findings.push_back(std::string(to_string(which)) + " split lists unknown utterance '" +
                           id + "'");
      }
      if (!seen.insert(id).second) {
        findings.push_back("utterance '" + id + "' appears in more than one split");
      }
    }
  }
  return findings;
}

// ---------------------------------------------------------------------------
// Writing.

namespace {

void write_contours(const fs::path& path, const UtteranceRecord& u) {
  std::string out;
  out.reserve(u.frames.size() * 550 * 40);
  out.append(kContoursHeader).push_back('\n');
  auto emit = [&](std::size_t t, std::string_view name, const ArticulatorContour& c) {
    for (std::size_t p = 0; p < c.size(); ++p) {
      out += std::to_string(t);
      out += ',';
      out += name;
      out += ',';
      out += std::to_string(p);
      out += ',';
      out += format_double(c[p].x);
      out += ',';
      out += format_double(c[p].y);
      out += '\n';
    }
  };
  for (std::size_t t = 0; t < u.frames.size(); ++t) {
    const auto& fr = u.frames[t];
    for (std::size_t a = 0; a < kNumArticulators; ++a) emit(t, kArticulatorNames[a], fr.articulators[a]);
    if (fr.upper_incisor) emit(t, kUpperIncisor, *fr.upper_incisor);
  }
  write_text_file(path, out);
}

void write_annotation(const fs::path& path, const std::vector<PhoneSegment>& segments) {
  std::ostringstream out;
  out << kAnnotationHeader << '\n';
  for (const auto& seg : segments) {
    out << format_double_min_decimals(seg.start, 6) << '\t'
        << format_double_min_decimals(seg.end, 6) << '\t' << seg.symbol << '\n';
  }
  write_text_file(path, out.str());
}

void write_audio(const fs::path& path, const std::vector<float>& samples) {
  std::string bytes(samples.size() * 4, '\0');
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto v = std::bit_cast<std::uint32_t>(samples[i]);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((v >> (8 * b)) & 0xFF);
  }
  write_text_file(path, bytes);
}

}  // namespace

void write_corpus(const Corpus& corpus, const fs::path& root, const CorpusProvenance& provenance) {
  fs::create_directories(root / "utterances");
  std::ostringstream meta;
  meta << "frame_rate=" << format_double(corpus.frame_rate()) << '\n';
  if (corpus.sample_rate() > 0) meta << "sample_rate=" << corpus.sample_rate() << '\n';
  if (provenance.generator_seed) meta << "generator_seed=" << *provenance.generator_seed << '\n';
  if (!provenance.source.empty()) meta << "source=" << provenance.source << '\n';
  write_text_file(root / "meta.txt", meta.str());
  for (const auto& id : corpus.ids()) {
    const auto& u = corpus.utterance(id);
    const auto dir = root / "utterances" / id;
    fs::create_directories(dir);
    write_contours(dir / "contours.csv", u);
    if (u.annotation) write_annotation(dir / "annotation.tsv", *u.annotation);
    if (!u.audio.empty()) write_audio(dir / "audio.f32", u.audio);
  }
  for (auto which : {SplitName::kTrain, SplitName::kValidation, SplitName::kTest}) {
    std::ostringstream out;
    for (const auto& id : corpus.split_ids(which)) out << id << '\n';
    write_text_file(root / "splits" / (std::string(to_string(which)) + ".txt"), out.str());
  }
}

// ---------------------------------------------------------------------------
// Synthetic generator.

namespace {

// Stream separation so prototypes do not depend on utterance-level settings.
constexpr std::uint64_t kPrototypeStream = 0x9e3779b97f4a7c15ULL;

ContourFrame base_shape() {
  ContourFrame frame;
  for (std::size_t a = 0; a < kNumArticulators; ++a) {
    const double angle = 0.3 * static_cast<double>(a);
    for (std::size_t p = 0; p < kPointsPerContour; ++p) {
      const double s = static_cast<double>(p) / (kPointsPerContour - 1);
      frame.articulators[a][p] = {static_cast<double>(a) + 2.0 * s * std::cos(angle),
                                  2.0 * s * std::sin(angle) - static_cast<double>(a) * 0.5};
    }
  }
  return frame;
}

ContourFrame random_prototype(std::mt19937_64& rng, double scale) {
  ContourFrame frame = base_shape();
  std::normal_distribution<double> coef(0.0, scale);
  for (auto& contour : frame.articulators) {
    // Smooth displacement: offset + tilt + bend, independently per axis.
    const double ox = coef(rng), tx = coef(rng), bx = coef(rng);
    const double oy = coef(rng), ty = coef(rng), by = coef(rng);
    for (std::size_t p = 0; p < kPointsPerContour; ++p) {
      const double s = static_cast<double>(p) / (kPointsPerContour - 1);
      const double u = 2.0 * s - 1.0;
      const double bend = std::sin(std::numbers::pi * s);
      contour[p].x += ox + tx * u + bx * bend;
      contour[p].y += oy + ty * u + by * bend;
    }
  }
  return frame;
}

ContourFrame blend(const ContourFrame& a, const ContourFrame& b, double w) {
  ContourFrame out;
  for (std::size_t k = 0; k < kNumArticulators; ++k) {
    for (std::size_t p = 0; p < kPointsPerContour; ++p) {
      const auto& pa = a.articulators[k][p];
      const auto& pb = b.articulators[k][p];
      out.articulators[k][p] = {(1.0 - w) * pa.x + w * pb.x, (1.0 - w) * pa.y + w * pb.y};
    }
  }
  return out;
}

std::vector<std::string> emitted_symbols(const GeneratorConfig& cfg, const Vocabulary& vocab) {
  std::vector<std::string> symbols = cfg.tokens;
  if (cfg.edge_silence_max > 0) {
    const auto sil = vocab.silence_index();
    if (!sil) throw ConfigError("edge silence requested but the vocabulary has no silence token");
    symbols.push_back(vocab.symbol(*sil));
  }
  return symbols;
}

void check_generator_config(const GeneratorConfig& cfg, const Vocabulary& vocab) {
  if (cfg.tokens.empty()) throw ConfigError("generator: empty token inventory");
  for (const auto& s : cfg.tokens) {
    if (!vocab.contains(s)) throw ConfigError("generator: token '" + s + "' not in vocabulary");
    if (vocab.token(vocab.index_of(s)).kind == TokenKind::kBlank) {
      throw ConfigError("generator: the blank token cannot be emitted");
    }
  }
  for (const auto& [from, to] : cfg.shared_prototypes) {
    if (std::find(cfg.tokens.begin(), cfg.tokens.end(), from) == cfg.tokens.end() ||
        std::find(cfg.tokens.begin(), cfg.tokens.end(), to) == cfg.tokens.end()) {
      throw ConfigError("generator: shared prototype " + from + "->" + to +
                        " must name generated tokens");
    }
    if (cfg.shared_prototypes.count(to)) {
      throw ConfigError("generator: shared prototype chains are not supported (" + to + ")");
    }
  }
  if (cfg.min_tokens < 1 || cfg.max_tokens < cfg.min_tokens) {
    throw ConfigError("generator: need 1 <= min_tokens <= max_tokens");
  }
  if (cfg.min_duration < 1 || cfg.max_duration < cfg.min_duration) {
    throw ConfigError("generator: need 1 <= min_duration <= max_duration");
  }
  if (cfg.edge_silence_max < cfg.edge_silence_min || cfg.edge_silence_min < 0) {
    throw ConfigError("generator: need 0 <= edge_silence_min <= edge_silence_max");
  }
  if (cfg.edge_silence_max > 0 && cfg.edge_silence_min < 1) {
    throw ConfigError("generator: edge_silence_min must be >= 1 when edge silence is enabled");
  }
  int shortest = cfg.min_duration;
  if (cfg.edge_silence_max > 0) shortest = std::min(shortest, cfg.edge_silence_min);
  if (cfg.ramp_frames < 0 || cfg.ramp_frames > shortest) {
    throw ConfigError("generator: ramp_frames (" + std::to_string(cfg.ramp_frames) +
                      ") longer than the shortest segment (" + std::to_string(shortest) + ")");
  }
  if (cfg.tokens.size() < 2 && !cfg.allow_repeats && cfg.max_tokens > 1) {
    throw ConfigError("generator: a single token needs allow_repeats=true");
  }
  if (cfg.noise_std < 0.0 || cfg.prototype_scale < 0.0) {
    throw ConfigError("generator: noise_std and prototype_scale must be non-negative");
  }
  if (!(cfg.frame_rate > 0.0)) throw ConfigError("generator: frame_rate must be positive");
  if (cfg.sample_rate > 0 && std::fmod(cfg.sample_rate, cfg.frame_rate) != 0.0) {
    throw ConfigError("generator: sample_rate must be a multiple of frame_rate");
  }
  if (cfg.num_train < 0 || cfg.num_validation < 0 || cfg.num_test < 0) {
    throw ConfigError("generator: split sizes must be non-negative");
  }
}

}  // namespace

PrototypeSet make_prototypes(const GeneratorConfig& cfg, const Vocabulary& vocab,
                             std::uint64_t seed) {
  check_generator_config(cfg, vocab);
  std::mt19937_64 rng(seed ^ kPrototypeStream);
  std::uniform_real_distribution<double> freq(200.0, 4000.0);
  PrototypeSet set;
  for (const auto& symbol : emitted_symbols(cfg, vocab)) {
    // Draw for every symbol, even explicit or shared ones, so the stream
    // does not depend on which overrides are configured.
    ContourFrame proto = random_prototype(rng, cfg.prototype_scale);
    std::vector<double> tones = {freq(rng), freq(rng), freq(rng)};
    if (const auto it = cfg.prototypes.find(symbol); it != cfg.prototypes.end()) proto = it->second;
    set.contours[symbol] = proto;
    set.tones[symbol] = tones;
  }
  for (const auto& [from, to] : cfg.shared_prototypes) set.contours[from] = set.contours.at(to);
  return set;
}

double prototype_spread(const PrototypeSet& prototypes) {
  if (prototypes.contours.empty()) return 0.0;
  const double n = static_cast<double>(prototypes.contours.size());
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < kNumArticulators; ++a) {
    for (std::size_t p = 0; p < kPointsPerContour; ++p) {
      double mx = 0.0, my = 0.0;
      for (const auto& [_, c] : prototypes.contours) {
        mx += c.articulators[a][p].x;
        my += c.articulators[a][p].y;
      }
      mx /= n;
      my /= n;
      for (const auto& [_, c] : prototypes.contours) {
        const double dx = c.articulators[a][p].x - mx;
        const double dy = c.articulators[a][p].y - my;
        sum_sq += dx * dx + dy * dy;
        count += 2;
      }
    }
  }
  return std::sqrt(sum_sq / static_cast<double>(count));
}

Corpus generate_synthetic_corpus(const GeneratorConfig& cfg, const Vocabulary& vocab,
                                 std::uint64_t seed) {
  const PrototypeSet protos = make_prototypes(cfg, vocab, seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int total = cfg.num_train + cfg.num_validation + cfg.num_test;
  const std::string silence =
      cfg.edge_silence_max > 0 ? vocab.symbol(*vocab.silence_index()) : std::string();
  const int hop = cfg.sample_rate > 0 ? static_cast<int>(cfg.sample_rate / cfg.frame_rate) : 0;

  auto uniform_int = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  std::vector<UtteranceRecord> utterances;
  CorpusSplit split;
  for (int n = 0; n < total; ++n) {
    char id_buf[32];
    std::snprintf(id_buf, sizeof(id_buf), "utt%05d", n);
    UtteranceRecord u;
    u.id = id_buf;
    u.frame_rate = cfg.frame_rate;

    // Segment plan: symbols and frame durations.
    std::vector<std::string> symbols;
    std::vector<int> durations;
    if (!silence.empty()) {
      symbols.push_back(silence);
      durations.push_back(uniform_int(cfg.edge_silence_min, cfg.edge_silence_max));
    }
    const int length = uniform_int(cfg.min_tokens, cfg.max_tokens);
    std::string previous;
    for (int i = 0; i < length; ++i) {
      std::string symbol;
      do {
        symbol = cfg.tokens[static_cast<std::size_t>(
            uniform_int(0, static_cast<int>(cfg.tokens.size()) - 1))];
      } while (!cfg.allow_repeats && symbol == previous);
      previous = symbol;
      symbols.push_back(symbol);
      durations.push_back(uniform_int(cfg.min_duration, cfg.max_duration));
    }
    if (!silence.empty()) {
      symbols.push_back(silence);
      durations.push_back(uniform_int(cfg.edge_silence_min, cfg.edge_silence_max));
    }

    // Per-frame (segment, weight-of-next-segment) plan.
    int num_frames = 0;
    std::vector<int> starts;
    for (int d : durations) {
      starts.push_back(num_frames);
      num_frames += d;
    }
    std::vector<int> seg_of(static_cast<std::size_t>(num_frames));
    for (std::size_t s = 0; s < durations.size(); ++s) {
      for (int t = starts[s]; t < starts[s] + durations[s]; ++t) seg_of[static_cast<std::size_t>(t)] = static_cast<int>(s);
    }
    // Blend partner and weight per frame; weight 0 means pure prototype.
    std::vector<std::pair<int, double>> mix(static_cast<std::size_t>(num_frames), {-1, 0.0});
    std::vector<int> base(seg_of);
    const int ramp = cfg.ramp_frames;
    for (std::size_t s = 1; s < durations.size(); ++s) {
      const int boundary = starts[s];
      const int first = boundary - ramp / 2;
      for (int j = 0; j < ramp; ++j) {
        const auto t = static_cast<std::size_t>(first + j);
        base[t] = static_cast<int>(s) - 1;
        mix[t] = {static_cast<int>(s), static_cast<double>(j + 1) / (ramp + 1)};
      }
    }

    u.frames.resize(static_cast<std::size_t>(num_frames));
    for (int t = 0; t < num_frames; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      const auto& from = protos.contours.at(symbols[static_cast<std::size_t>(base[ti])]);
      ContourFrame frame = from;
      if (mix[ti].first >= 0) {
        frame = blend(from, protos.contours.at(symbols[static_cast<std::size_t>(mix[ti].first)]),
                      mix[ti].second);
      }
      if (cfg.noise_std > 0.0) {
        for (auto& contour : frame.articulators) {
          for (auto& p : contour) {
            p.x += cfg.noise_std * noise(rng);
            p.y += cfg.noise_std * noise(rng);
          }
        }
      }
      u.frames[ti] = frame;
    }

    if (hop > 0) {
      u.audio.resize(static_cast<std::size_t>(num_frames) * static_cast<std::size_t>(hop));
      const double sr = cfg.sample_rate;
      for (int t = 0; t < num_frames; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        const auto& tones_a = protos.tones.at(symbols[static_cast<std::size_t>(base[ti])]);
        const std::vector<double>* tones_b = nullptr;
        double w = 0.0;
        if (mix[ti].first >= 0) {
          tones_b = &protos.tones.at(symbols[static_cast<std::size_t>(mix[ti].first)]);
          w = mix[ti].second;
        }
        for (int k = 0; k < hop; ++k) {
          const double n_abs = static_cast<double>(t) * hop + k;
          double v = 0.0;
          for (double f : tones_a) v += (1.0 - w) * 0.3 * std::sin(2.0 * std::numbers::pi * f * n_abs / sr);
          if (tones_b) {
            for (double f : *tones_b) v += w * 0.3 * std::sin(2.0 * std::numbers::pi * f * n_abs / sr);
          }
          v += cfg.audio_noise_std * noise(rng);
          u.audio[ti * static_cast<std::size_t>(hop) + static_cast<std::size_t>(k)] = static_cast<float>(v);
        }
      }
    }

    std::vector<PhoneSegment> annotation;
    for (std::size_t s = 0; s < symbols.size(); ++s) {
      PhoneSegment seg;
      seg.symbol = symbols[s];
      seg.token = vocab.index_of(symbols[s]);
      seg.start = starts[s] / cfg.frame_rate;
      seg.end = (starts[s] + durations[s]) / cfg.frame_rate;
      annotation.push_back(std::move(seg));
    }
    u.annotation = std::move(annotation);

    if (n < cfg.num_train) {
      split.train.push_back(u.id);
    } else if (n < cfg.num_train + cfg.num_validation) {
      split.validation.push_back(u.id);
    } else {
      split.test.push_back(u.id);
    }
    utterances.push_back(std::move(u));
  }
  return Corpus(cfg.frame_rate, cfg.sample_rate, std::move(utterances), std::move(split));
}

GeneratorConfig parse_generator_config(const std::map<std::string, std::string>& kv) {
  GeneratorConfig cfg;
  for (const auto& [key, value] : kv) {
    const std::string ctx = "generator config key '" + key + "'";
    auto as_int = [&] { return static_cast<int>(parse_int(value, ctx)); };
    if (key == "tokens") {
      cfg.tokens.clear();
      for (const auto& t : split(value, ',')) {
        if (!trim(t).empty()) cfg.tokens.emplace_back(trim(t));
      }
    } else if (key == "shared_prototypes") {
      // a:b,c:d  (a copies b's prototype)
      for (const auto& pair : split(value, ',')) {
        if (trim(pair).empty()) continue;
        const auto parts = split(trim(pair), ':');
        if (parts.size() != 2) throw ConfigError(ctx + ": expected from:to pairs");
        cfg.shared_prototypes[std::string(trim(parts[0]))] = std::string(trim(parts[1]));
      }
    } else if (key == "prototype_scale") {
      cfg.prototype_scale = parse_double(value, ctx);
    } else if (key == "num_train") {
      cfg.num_train = as_int();
    } else if (key == "num_validation") {
      cfg.num_validation = as_int();
    } else if (key == "num_test") {
      cfg.num_test = as_int();
    } else if (key == "min_tokens") {
      cfg.min_tokens = as_int();
    } else if (key == "max_tokens") {
      cfg.max_tokens = as_int();
    } else if (key == "min_duration") {
      cfg.min_duration = as_int();
    } else if (key == "max_duration") {
      cfg.max_duration = as_int();
    } else if (key == "edge_silence_min") {
      cfg.edge_silence_min = as_int();
    } else if (key == "edge_silence_max") {
      cfg.edge_silence_max = as_int();
    } else if (key == "allow_repeats") {
      cfg.allow_repeats = parse_bool(value, ctx);
    } else if (key == "ramp_frames") {
      cfg.ramp_frames = as_int();
    } else if (key == "noise_std") {
      cfg.noise_std = parse_double(value, ctx);
    } else if (key == "frame_rate") {
      cfg.frame_rate = parse_double(value, ctx);
    } else if (key == "sample_rate") {
      cfg.sample_rate = as_int();
    } else if (key == "audio_noise_std") {
      cfg.audio_noise_std = parse_double(value, ctx);
    } else {
      throw ConfigError("unknown generator config key '" + key + "'");
    }
  }
  return cfg;
}

}  // namespace artrec
