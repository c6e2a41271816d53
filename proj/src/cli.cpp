// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <ostream>

#include "artrec/baseline.hpp"
#include "artrec/checkpoint.hpp"
#include "artrec/corpus.hpp"
#include "artrec/ctc.hpp"
#include "artrec/embedding.hpp"
#include "artrec/error.hpp"
#include "artrec/metrics.hpp"
#include "artrec/text_io.hpp"
#include "artrec/vocabulary.hpp"

namespace artrec {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCheckpointFile = "model.ckpt";
constexpr const char* kNormStatsFile = "norm_stats.csv";
constexpr const char* kVocabularyFile = "vocabulary.tsv";
constexpr const char* kClassTableFile = "class_table.tsv";

std::vector<int> parse_dims(const std::string& value, const std::string& ctx) {
  std::vector<int> dims;
  if (trim(value).empty() || trim(value) == "none") return dims;
  for (const auto& part : split(value, ',')) {
    const long d = parse_int(part, ctx);
    if (d < 1) throw ConfigError(ctx + ": widths must be positive");
    dims.push_back(static_cast<int>(d));
  }
  return dims;
}

fs::path existing_path(const std::string& value, const fs::path& base_dir, const std::string& key) {
  fs::path p(value);
  if (p.is_relative()) p = base_dir / p;
  if (!fs::exists(p)) throw ConfigError("run config key '" + key + "': " + p.string() + " does not exist");
  return p;
}

}  // namespace

RunConfig parse_run_config(const std::map<std::string, std::string>& kv, const fs::path& base_dir) {
  RunConfig run;
  std::map<std::string, std::string> train_kv;
  bool have_corpus = false;
  for (const auto& [key, value] : kv) {
    const std::string ctx = "run config key '" + key + "'";
    try {
      if (key == "corpus") {
        run.corpus = existing_path(value, base_dir, key);
        have_corpus = true;
      } else if (key == "out") {
        run.out = value;
      } else if (key == "vocabulary") {
        run.vocabulary = existing_path(value, base_dir, key);
      } else if (key == "class_table") {
        run.class_table = existing_path(value, base_dir, key);
      } else if (key == "feature_kind") {
        run.feature_kind = feature_kind_from_string(value);
      } else if (key == "use_voicing") {
        run.use_voicing = parse_bool(value, ctx);
      } else if (key == "adapter_dims") {
        run.recognizer.adapter_dims = parse_dims(value, ctx);
        run.adapter_dims_set = true;
      } else if (key == "conv_blocks") {
        run.recognizer.conv_blocks = static_cast<int>(parse_int(value, ctx));
      } else if (key == "conv_channels") {
        run.recognizer.conv_channels = static_cast<int>(parse_int(value, ctx));
      } else if (key == "kernel_width") {
        run.recognizer.kernel_width = static_cast<int>(parse_int(value, ctx));
      } else if (key == "activation") {
        run.recognizer.activation = activation_from_string(value);
      } else if (key == "recurrent_blocks") {
        run.recognizer.recurrent_blocks = static_cast<int>(parse_int(value, ctx));
      } else if (key == "hidden_size") {
        run.recognizer.hidden_size = static_cast<int>(parse_int(value, ctx));
      } else if (key == "bidirectional") {
        run.recognizer.bidirectional = parse_bool(value, ctx);
      } else if (key == "classifier_hidden_dims") {
        run.recognizer.classifier_dims = parse_dims(value, ctx);
        run.recognizer.classifier_dims.push_back(1);  // replaced by V at train time
      } else if (key == "logit_noise_std") {
        run.recognizer.logit_noise_std = parse_double(value, ctx);
      } else {
        train_kv[key] = value;
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  const auto unknown = run.train.apply_key_values(train_kv);
  if (!unknown.empty()) throw ConfigError("unknown run config key '" + unknown.front() + "'");
  if (!have_corpus) throw ConfigError("run config: 'corpus' is required");
  if (run.out.empty()) throw ConfigError("run config: 'out' is required");
  run.train.validate();
  return run;
}

fs::path resolve_output_path(const fs::path& path) {
  if (path.is_absolute()) return path;
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root) / path;
  return path;
}

namespace {

struct Inventory {
  Vocabulary vocab;
  PhoneticClassMap classes;
};

Inventory load_inventory(const std::optional<fs::path>& vocabulary,
                         const std::optional<fs::path>& class_table) {
  Inventory inv{vocabulary ? Vocabulary::build(read_vocabulary_spec(*vocabulary))
                           : default_vocabulary(),
                {}};
  if (class_table) {
    inv.classes = PhoneticClassMap::build(inv.vocab, read_class_table(*class_table));
  } else if (vocabulary) {
    // A custom inventory keeps whatever default class entries it shares.
    std::vector<std::pair<std::string, PhoneticClass>> table;
    for (const auto& entry : default_class_table())
      if (inv.vocab.contains(entry.first)) table.push_back(entry);
    inv.classes = PhoneticClassMap::build(inv.vocab, table);
  } else {
    inv.classes = default_class_map(inv.vocab);
  }
  return inv;
}

std::optional<fs::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (!fs::exists(s)) throw ConfigError(s + " does not exist");
  return fs::path(s);
}

void require_dir(const std::string& path, const std::string& what) {
  if (!fs::is_directory(path)) throw ConfigError(what + " " + path + " is not a directory");
}

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& sets) {
  std::map<std::string, std::string> kv;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    kv[std::string(trim(s.substr(0, eq)))] = std::string(trim(s.substr(eq + 1)));
  }
  return kv;
}

std::string join_symbols(const SymbolSeq& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) out += (i ? " " : "") + seq[i];
  return out;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string vocabulary;
  std::vector<std::string> sets;
  bool force = false;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  if (!fs::exists(a.config)) throw ConfigError("config file " + a.config + " does not exist");
  auto kv = read_key_value_file(a.config);
  for (const auto& [k, v] : parse_overrides(a.sets)) kv[k] = v;
  GeneratorConfig gcfg;
  try {
    gcfg = parse_generator_config(kv);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const Inventory inv = load_inventory(optional_path(a.vocabulary), std::nullopt);
  const fs::path target = resolve_output_path(a.out);
  if (fs::exists(target) && !fs::is_empty(target)) {
    if (!a.force) throw ConfigError(target.string() + " exists and is not empty (use --force)");
    fs::remove_all(target);
  }
  const Corpus corpus = generate_synthetic_corpus(gcfg, inv.vocab, a.seed);
  write_corpus(corpus, target, {a.seed, "generator"});
  out << "wrote " << corpus.ids().size() << " utterances to " << target.string() << "\n";
  return kExitOk;
}

struct ValidateArgs {
  std::string corpus;
  std::string vocabulary;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  require_dir(a.corpus, "corpus");
  const Inventory inv = load_inventory(optional_path(a.vocabulary), std::nullopt);
  const auto findings = validate_corpus(a.corpus, inv.vocab);
  for (const auto& f : findings) out << f << "\n";
  out << findings.size() << " finding(s)\n";
  return findings.empty() ? kExitOk : kExitFailure;
}

struct FitBaselineArgs {
  std::string corpus;
  std::string out;
  std::string vocabulary;
  std::string synthesize = "test";
};

int cmd_fit_baseline(const FitBaselineArgs& a, std::ostream& out) {
  require_dir(a.corpus, "corpus");
  const Inventory inv = load_inventory(optional_path(a.vocabulary), std::nullopt);
  const Corpus corpus = load_corpus(a.corpus, inv.vocab);
  const auto& train_ids = corpus.split_ids(SplitName::kTrain);
  if (train_ids.empty()) throw Error("corpus has an empty train split");
  const MeanContourModel model = MeanContourModel::fit(corpus, train_ids, inv.vocab);
  const fs::path target = resolve_output_path(a.out);
  model.save(target / "mean_contours.csv");
  out << "fitted " << model.entries().size() << " token means\n";
  if (a.synthesize != "none") {
    const auto ids = corpus.split_ids(split_from_string(a.synthesize));
    const Corpus synth = model.synthesize_corpus(corpus, ids, inv.vocab);
    write_corpus(synth, target / "synthesized", {std::nullopt, "mean-contour"});
    out << "synthesized " << ids.size() << " utterances to " << (target / "synthesized").string()
        << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> jobs;
  std::string out;
  std::vector<std::string> sets;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  if (!fs::exists(a.config)) throw ConfigError("config file " + a.config + " does not exist");
  auto kv = read_key_value_file(a.config);
  for (const auto& [k, v] : parse_overrides(a.sets)) kv[k] = v;
  if (a.seed) kv["seed"] = std::to_string(*a.seed);
  if (a.epochs) kv["epochs"] = std::to_string(*a.epochs);
  if (a.jobs) kv["jobs"] = std::to_string(*a.jobs);
  if (!a.out.empty()) kv["out"] = a.out;
  RunConfig run = parse_run_config(kv, fs::path(a.config).parent_path());

  const Inventory inv = load_inventory(run.vocabulary, run.class_table);
  const Corpus corpus = load_corpus(run.corpus, inv.vocab);
  const auto& train_ids = corpus.split_ids(SplitName::kTrain);
  const auto& val_ids = corpus.split_ids(SplitName::kValidation);
  if (train_ids.empty() || val_ids.empty()) {
    throw ConfigError("training needs non-empty train and validation splits");
  }
  for (const auto* ids : {&train_ids, &val_ids}) {
    for (const auto& id : *ids) {
      if (!corpus.utterance(id).annotation) {
        throw ConfigError(std::string(run.use_voicing ? "use_voicing=true needs" : "training needs") +
                          " annotations; utterance '" + id + "' has none");
      }
    }
  }

  const NormStats norm = fit_norm_stats(corpus, train_ids, run.feature_kind);
  const auto train_set =
      prepare_examples(corpus, train_ids, inv.vocab, run.feature_kind, norm, run.use_voicing);
  const auto val_set =
      prepare_examples(corpus, val_ids, inv.vocab, run.feature_kind, norm, run.use_voicing);

  RecognizerConfig rcfg = run.recognizer;
  rcfg.input_dim = static_cast<int>(train_set.front().features.cols());
  if (!run.adapter_dims_set && run.feature_kind == FeatureKind::kAcoustic) rcfg.adapter_dims.clear();
  rcfg.classifier_dims.back() = inv.vocab.size();
  rcfg.use_voicing = run.use_voicing;
  try {
    rcfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (feature width " + std::to_string(rcfg.input_dim) + ")");
  }

  const TrainResult result = train(train_set, val_set, inv.vocab, rcfg, run.train);

  // A relative `out` from the file follows the other file paths unless an
  // output root is set; --out follows the usual output rule.
  fs::path target = resolve_output_path(run.out);
  const char* root = std::getenv(kOutputRootEnv);
  if (a.out.empty() && run.out.is_relative() && !(root && *root)) {
    target = fs::path(a.config).parent_path() / run.out;
  }
  fs::create_directories(target);
  Checkpoint ckpt{rcfg, result.best_params,
                  {{"feature_kind", std::string(to_string(run.feature_kind))},
                   {"best_epoch", std::to_string(result.best_epoch)},
                   {"seed", std::to_string(run.train.seed)}}};
  save_checkpoint(target / kCheckpointFile, ckpt);
  write_norm_stats(target / kNormStatsFile, norm);
  write_vocabulary_spec(target / kVocabularyFile, inv.vocab);
  write_class_table(target / kClassTableFile, inv.vocab, inv.classes);
  write_step_log(target / "train_steps.csv", result.log);
  write_epoch_log(target / "train_epochs.csv", result.log);

  std::string resolved;
  for (const auto& [k, v] : kv) resolved += k + "=" + v + "\n";
  write_text_file(target / "run.cfg", resolved);

  out << "best epoch " << result.best_epoch << " of " << result.log.epochs.size() << "\n";
  out << "PER=" << format_per(result.best_val_per) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct LoadedModel {
  Checkpoint ckpt;
  NormStats norm;
  Inventory inv;
  FeatureKind kind = FeatureKind::kArticulatory;
};

LoadedModel load_model_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("model directory " + dir.string() + " not found");
  LoadedModel m{load_checkpoint(dir / kCheckpointFile), read_norm_stats(dir / kNormStatsFile),
                load_inventory(dir / kVocabularyFile, dir / kClassTableFile),
                FeatureKind::kArticulatory};
  if (auto it = m.ckpt.metadata.find("feature_kind"); it != m.ckpt.metadata.end()) {
    m.kind = feature_kind_from_string(it->second);
  }
  if (m.ckpt.config.vocab_size() != m.inv.vocab.size()) {
    throw Error("checkpoint classifier width does not match " + (dir / kVocabularyFile).string());
  }
  if (m.norm.dim() != m.ckpt.config.input_dim) {
    throw Error("normalization statistics do not match the checkpoint input width");
  }
  return m;
}

// Utterances of `ids` with reference annotations and features from `source`.
Corpus evaluation_corpus(const Corpus& ref, const std::vector<std::string>& ids,
                         const std::string& source, const std::string& external_dir,
                         const LoadedModel& model, const fs::path& out_dir) {
  CorpusSplit split;
  split.test = ids;
  if (source == "true") {
    std::vector<UtteranceRecord> utts;
    for (const auto& id : ids) utts.push_back(ref.utterance(id));
    return Corpus(ref.frame_rate(), ref.sample_rate(), std::move(utts), split);
  }
  if (source == "mean-contour") {
    if (model.kind != FeatureKind::kArticulatory) {
      throw ConfigError("mean-contour synthesis produces contours; the checkpoint expects " +
                        std::string(to_string(model.kind)) + " features");
    }
    const auto& train_ids = ref.split_ids(SplitName::kTrain);
    if (train_ids.empty()) throw Error("corpus has an empty train split to fit the baseline on");
    const MeanContourModel baseline = MeanContourModel::fit(ref, train_ids, model.inv.vocab);
    baseline.save(out_dir / "mean_contours.csv");
    return baseline.synthesize_corpus(ref, ids, model.inv.vocab);
  }
  if (source == "external") {
    require_dir(external_dir, "external source");
    const Corpus ext = load_corpus(external_dir, model.inv.vocab);
    std::vector<UtteranceRecord> utts;
    for (const auto& id : ids) {
      if (!ext.contains(id)) throw Error("external source is missing utterance '" + id + "'");
      UtteranceRecord u = ext.utterance(id);
      u.annotation = ref.utterance(id).annotation;
      utts.push_back(std::move(u));
    }
    return Corpus(ext.frame_rate(), ext.sample_rate(), std::move(utts), split);
  }
  throw ConfigError("unknown feature source '" + source + "' (true|mean-contour|external)");
}

struct EvaluateArgs {
  std::string model;
  std::string corpus;
  std::string split = "test";
  std::vector<std::string> source{"true"};
  std::string out;
  bool phonetic_only = false;
  bool embedding = false;
  double perplexity = 30.0;
  bool pooling = true;
  int jobs = 1;
};

struct EmbedArgs {
  std::string model;
  std::string corpus;
  std::string split = "test";
  std::string out;
  double perplexity = 30.0;
  int iterations = 1000;
  bool pooling = true;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void write_embedding(const Corpus& corpus, const std::vector<std::string>& ids,
                     const LoadedModel& model, const fs::path& target, double perplexity,
                     int iterations, bool pooling, std::uint64_t seed, int jobs,
                     std::ostream& out) {
  const RecognizerView view{&model.ckpt.params, &model.ckpt.config, &model.norm, model.kind};
  const LabeledFeatureSet set =
      collect_labeled_features(corpus, ids, model.inv.vocab, model.inv.classes, view, pooling, jobs);
  TsneConfig tcfg;
  tcfg.perplexity = perplexity;
  tcfg.iterations = iterations;
  tcfg.exaggeration_iterations = std::min(tcfg.exaggeration_iterations, iterations);
  tcfg.momentum_switch_iteration = std::min(tcfg.momentum_switch_iteration, iterations);
  tcfg.seed = seed;
  const TsneResult res = tsne(set.points, tcfg);
  write_embedding_csv(target / "embedding.csv", set, res.embedding);
  write_embedding_svg(target / "embedding.svg", set, res.embedding);
  out << "embedded " << set.size() << " points (KL " << format_double(res.kl_final) << ")\n";
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const std::string source = a.source.front();
  std::string external_dir;
  if (source == "external") {
    if (a.source.size() != 2) throw ConfigError("--source external needs a directory");
    external_dir = a.source[1];
  } else if (a.source.size() != 1) {
    throw ConfigError("--source " + source + " takes no directory");
  }
  require_dir(a.corpus, "corpus");
  const LoadedModel model = load_model_dir(a.model);
  const Corpus ref = load_corpus(a.corpus, model.inv.vocab);
  const auto& ids = ref.split_ids(split_from_string(a.split));
  if (ids.empty()) throw Error("split '" + a.split + "' is empty");
  for (const auto& id : ids) {
    if (!ref.utterance(id).annotation) throw Error("utterance '" + id + "' has no annotation to score against");
  }
  const fs::path target = resolve_output_path(a.out);
  fs::create_directories(target);

  const Corpus eval = evaluation_corpus(ref, ids, source, external_dir, model, target);
  const auto examples = prepare_examples(eval, ids, model.inv.vocab, model.kind, model.norm,
                                         model.ckpt.config.use_voicing);
  for (const auto& ex : examples) {
    if (ex.features.cols() != model.ckpt.config.input_dim) {
      throw Error("utterance '" + ex.id + "' has feature width " +
                  std::to_string(ex.features.cols()) + ", checkpoint expects " +
                  std::to_string(model.ckpt.config.input_dim));
    }
  }
  const auto decodes = decode_examples(model.ckpt.params, model.ckpt.config, examples, a.jobs);

  std::vector<AlignmentResult> alignments;
  std::string tsv = "id\treference\thypothesis\tdistance\n";
  for (std::size_t i = 0; i < examples.size(); ++i) {
    SymbolSeq ref_seq, hyp_seq;
    for (int k : examples[i].target) ref_seq.push_back(model.inv.vocab.symbol(k));
    for (int k : decodes[i]) hyp_seq.push_back(model.inv.vocab.symbol(k));
    if (a.phonetic_only) {
      ref_seq = phonetic_only(ref_seq, model.inv.vocab);
      hyp_seq = phonetic_only(hyp_seq, model.inv.vocab);
    }
    alignments.push_back(levenshtein_align(ref_seq, hyp_seq));
    tsv += examples[i].id + "\t" + join_symbols(ref_seq) + "\t" + join_symbols(hyp_seq) + "\t" +
           std::to_string(alignments.back().distance) + "\n";
  }
  const double rate = per(alignments);
  write_text_file(target / "decodes.tsv", tsv);
  write_text_file(target / "per.txt", "PER=" + format_per(rate) + "\n");
  write_confusion_matrix_csv(target / "confusion_raw.csv",
                             confusion_matrix(alignments, model.inv.classes, false));
  write_confusion_matrix_csv(target / "confusion_normalized.csv",
                             confusion_matrix(alignments, model.inv.classes, true));
  if (a.embedding) {
    write_embedding(eval, ids, model, target, a.perplexity, 1000, a.pooling, 0, a.jobs, out);
  }
  out << "PER=" << format_per(rate) << "\n";
  return kExitOk;
}

int cmd_embed(const EmbedArgs& a, std::ostream& out) {
  require_dir(a.corpus, "corpus");
  const LoadedModel model = load_model_dir(a.model);
  const Corpus corpus = load_corpus(a.corpus, model.inv.vocab);
  const auto& ids = corpus.split_ids(split_from_string(a.split));
  const fs::path target = resolve_output_path(a.out);
  fs::create_directories(target);
  write_embedding(corpus, ids, model, target, a.perplexity, a.iterations, a.pooling, a.seed,
                  a.jobs, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phoneme recognition from articulatory contours"};
  app.name("artrec");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a seeded synthetic corpus");
  g->add_option("--config", gen.config, "Generator config (key=value)")->required();
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen.out, "Output corpus directory")->required();
  g->add_option("--vocabulary", gen.vocabulary, "Vocabulary spec TSV");
  g->add_option("--set", gen.sets, "Override a config key (key=value)");
  g->add_flag("--force", gen.force, "Replace a non-empty output directory");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Check a corpus directory");
  v->add_option("--corpus", val.corpus)->required();
  v->add_option("--vocabulary", val.vocabulary);

  FitBaselineArgs fit;
  auto* f = app.add_subcommand("fit-baseline", "Fit the mean-contour synthesizer");
  f->add_option("--corpus", fit.corpus)->required();
  f->add_option("--out", fit.out)->required();
  f->add_option("--vocabulary", fit.vocabulary);
  f->add_option("--synthesize", fit.synthesize, "Split to synthesize (train|validation|test|none)");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a recognizer from a run config");
  t->add_option("--config", tr.config, "Run config (key=value)")->required();
  t->add_option("--seed", tr.seed);
  t->add_option("--epochs", tr.epochs);
  t->add_option("--jobs", tr.jobs);
  t->add_option("--out", tr.out);
  t->add_option("--set", tr.sets, "Override a config key (key=value)");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Decode a split and score it");
  e->add_option("--model", ev.model, "Training output directory")->required();
  e->add_option("--corpus", ev.corpus)->required();
  e->add_option("--split", ev.split);
  e->add_option("--source", ev.source, "true | mean-contour | external <dir>")->expected(1, 2);
  e->add_option("--out", ev.out)->required();
  e->add_flag("--phonetic-only", ev.phonetic_only, "Score phonetic tokens only");
  e->add_flag("--embedding", ev.embedding, "Also write a t-SNE embedding");
  e->add_option("--perplexity", ev.perplexity);
  e->add_option("--pooling", ev.pooling, "Pool frames per segment");
  e->add_option("--jobs", ev.jobs);

  EmbedArgs em;
  auto* m = app.add_subcommand("embed", "Project penultimate features with t-SNE");
  m->add_option("--model", em.model)->required();
  m->add_option("--corpus", em.corpus)->required();
  m->add_option("--split", em.split);
  m->add_option("--out", em.out)->required();
  m->add_option("--perplexity", em.perplexity);
  m->add_option("--iterations", em.iterations);
  m->add_option("--pooling", em.pooling);
  m->add_option("--seed", em.seed);
  m->add_option("--jobs", em.jobs);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*v) return cmd_validate(val, out);
    if (*f) return cmd_fit_baseline(fit, out);
    if (*t) return cmd_train(tr, out);
    if (*e) return cmd_evaluate(ev, out);
    if (*m) return cmd_embed(em, out);
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace artrec
