// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "artrec/cli.hpp"
#include "artrec/text_io.hpp"

using namespace artrec;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) return false;
  }
  std::size_t other_files = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) other_files += e.is_regular_file();
  return files == other_files && files > 0;
}

// Shared scratch area: a toy corpus and a tiny recognizer config.
struct Fixture {
  fs::path root;
  Fixture() {
    root = fs::temp_directory_path() / "artrec_test_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    write_text_file(root / "toy.cfg",
                    "tokens=a,i,p,t\nnum_train=8\nnum_validation=3\nnum_test=3\n"
                    "min_tokens=2\nmax_tokens=3\nmin_duration=3\nmax_duration=4\n"
                    "edge_silence_min=2\nedge_silence_max=2\nramp_frames=2\nnoise_std=0.05\n");
    write_text_file(root / "run.cfg",
                    "corpus=corpus\nout=run\nadapter_dims=8\nconv_blocks=1\nconv_channels=8\n"
                    "recurrent_blocks=1\nhidden_size=4\nclassifier_hidden_dims=8\n"
                    "epochs=3\nbatch_size=4\npatience=-1\n");
  }
  fs::path operator/(const std::string& s) const { return root / s; }
};

}  // namespace

TEST_CASE("usage and exit codes") {
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"generate", "--seed", "1"}).code == kExitUsage);

  const auto missing = run({"generate", "--config", "/nonexistent/toy.cfg", "--out", "x"});
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find("/nonexistent/toy.cfg") != std::string::npos);
}

TEST_CASE("pipeline") {
  Fixture fx;
  const std::string corpus = (fx / "corpus").string();

  // generate is deterministic and refuses to clobber.
  REQUIRE(run({"generate", "--config", (fx / "toy.cfg").string(), "--seed", "7", "--out", corpus})
              .code == kExitOk);
  REQUIRE(run({"generate", "--config", (fx / "toy.cfg").string(), "--seed", "7", "--out",
               (fx / "again").string()})
              .code == kExitOk);
  CHECK(same_tree(fx / "corpus", fx / "again"));
  CHECK(run({"generate", "--config", (fx / "toy.cfg").string(), "--seed", "7", "--out", corpus})
            .code == kExitUsage);
  CHECK(run({"generate", "--config", (fx / "toy.cfg").string(), "--seed", "8", "--out",
             (fx / "again").string(), "--force"})
            .code == kExitOk);
  CHECK_FALSE(same_tree(fx / "corpus", fx / "again"));
  CHECK(slurp(fx / "corpus" / "meta.txt").find("generator_seed=7") != std::string::npos);

  const auto valid = run({"validate", "--corpus", corpus});
  CHECK(valid.code == kExitOk);
  CHECK(valid.out.find("0 finding(s)") != std::string::npos);

  // fit-baseline output validates too.
  REQUIRE(run({"fit-baseline", "--corpus", corpus, "--out", (fx / "baseline").string()}).code ==
          kExitOk);
  CHECK(fs::exists(fx / "baseline" / "mean_contours.csv"));
  CHECK(run({"validate", "--corpus", (fx / "baseline" / "synthesized").string()}).code == kExitOk);

  // train twice: identical PER line.
  const auto t1 = run({"train", "--config", (fx / "run.cfg").string(), "--seed", "3"});
  REQUIRE_MESSAGE(t1.code == kExitOk, t1.err);
  for (const char* f : {"model.ckpt", "norm_stats.csv", "train_steps.csv", "train_epochs.csv",
                        "vocabulary.tsv", "class_table.tsv"}) {
    CHECK(fs::exists(fx / "run" / f));
  }
  const auto t2 = run({"train", "--config", (fx / "run.cfg").string(), "--seed", "3", "--out",
                       (fx / "run2").string()});
  REQUIRE(t2.code == kExitOk);
  const auto per_line = [](const std::string& s) { return s.substr(s.find("PER=")); };
  CHECK(per_line(t1.out) == per_line(t2.out));
  CHECK(slurp(fx / "run" / "train_steps.csv") == slurp(fx / "run2" / "train_steps.csv"));

  // evaluate with each source.
  const std::string model = (fx / "run").string();
  const auto ev = run({"evaluate", "--model", model, "--corpus", corpus, "--split", "test",
                       "--out", (fx / "eval_true").string()});
  REQUIRE_MESSAGE(ev.code == kExitOk, ev.err);
  CHECK(ev.out.find("PER=") != std::string::npos);
  for (const char* f : {"decodes.tsv", "per.txt", "confusion_raw.csv", "confusion_normalized.csv"}) {
    CHECK(fs::exists(fx / "eval_true" / f));
  }
  const auto mc = run({"evaluate", "--model", model, "--corpus", corpus, "--split", "test",
                       "--source", "mean-contour", "--out", (fx / "eval_mc").string()});
  CHECK_MESSAGE(mc.code == kExitOk, mc.err);
  CHECK(fs::exists(fx / "eval_mc" / "mean_contours.csv"));

  // External source missing a test utterance.
  const auto ext_dir = fx / "external";
  fs::copy(fx / "corpus", ext_dir, fs::copy_options::recursive);
  const auto test_ids = read_lines(fx / "corpus" / "splits" / "test.txt");
  fs::remove_all(ext_dir / "utterances" / test_ids.front());
  write_text_file(ext_dir / "splits" / "test.txt", test_ids[1] + "\n" + test_ids[2] + "\n");
  const auto ext = run({"evaluate", "--model", model, "--corpus", corpus, "--split", "test",
                        "--source", "external", ext_dir.string(), "--out",
                        (fx / "eval_ext").string()});
  CHECK(ext.code != kExitOk);
  CHECK(ext.err.find(test_ids.front()) != std::string::npos);

  // Config errors.
  const auto unknown = run({"train", "--config", (fx / "run.cfg").string(), "--set", "bogus=1"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("bogus") != std::string::npos);

  fs::copy(fx / "corpus", fx / "bare", fs::copy_options::recursive);
  for (const auto& e : fs::recursive_directory_iterator(fx / "bare")) {
    if (e.path().filename() == "annotation.tsv") fs::remove(e.path());
  }
  const auto bare = run({"train", "--config", (fx / "run.cfg").string(), "--set",
                         "corpus=" + (fx / "bare").string(), "--set", "use_voicing=true"});
  CHECK(bare.code == kExitUsage);
  CHECK(bare.err.find("use_voicing") != std::string::npos);

  fs::remove_all(fx.root);
}

TEST_CASE("output root override") {
  const auto root = fs::temp_directory_path() / "artrec_test_outroot";
  ::setenv(kOutputRootEnv, root.c_str(), 1);
  CHECK(resolve_output_path("a/b") == root / "a/b");
  CHECK(resolve_output_path("/abs/x") == fs::path("/abs/x"));
  ::unsetenv(kOutputRootEnv);
  CHECK(resolve_output_path("a/b") == fs::path("a/b"));
}
