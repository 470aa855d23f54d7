#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "scnn/io.hpp"

// End-to-end checks against the installed binary; SCNN_CLI_PATH comes from
// the build so the tests always exercise the matching executable.

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

RunResult run_cli(const std::string& args) {
  static const fs::path log_dir = [] {
    const fs::path d = fs::temp_directory_path() / "scnn-cli-logs";
    fs::create_directories(d);
    return d;
  }();
  const fs::path out_log = log_dir / "stdout.log";
  const fs::path err_log = log_dir / "stderr.log";
  const std::string cmd = std::string(SCNN_CLI_PATH) + " " + args + " > " +
                          quoted(out_log) + " 2> " + quoted(err_log);
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = fs::exists(out_log) ? scnn::read_file(out_log.string()) : "";
  r.err = fs::exists(err_log) ? scnn::read_file(err_log.string()) : "";
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  return scnn::split_lines(text);
}

std::size_t column_count(const std::string& line) {
  return std::count(line.begin(), line.end(), '\t') + 1;
}

class Cli : public ::testing::Test {
 protected:
  static fs::path root;
  static fs::path train_corpus, test_corpus, sentiment_corpus;
  static fs::path tiny_config, models_config, models_dir;
  static bool fixture_ok;

  static void SetUpTestSuite() {
    root = fs::temp_directory_path() / "scnn-cli-tests";
    fs::remove_all(root);
    fs::create_directories(root);

    train_corpus = root / "sarcasm-train.tsv";
    test_corpus = root / "sarcasm-test.tsv";
    sentiment_corpus = root / "sentiment.tsv";
    models_dir = root / "models";
    tiny_config = root / "tiny.ini";
    models_config = root / "models.ini";

    // Small everything: the point here is plumbing, not accuracy.
    const std::string tiny =
        "[model]\n"
        "embed_dim = 12\n"
        "max_epochs = 2\n"
        "\n"
        "[svm]\n"
        "kernel = rbf\n"
        "C = 8\n"
        "gamma = 0.01\n";
    scnn::atomic_write_file(tiny_config.string(), tiny);

    fixture_ok = true;
    auto step = [&](const std::string& args) {
      if (!fixture_ok) return;
      const RunResult r = run_cli(args);
      if (r.code != 0) {
        fixture_ok = false;
        ADD_FAILURE() << "fixture command failed (" << r.code << "): " << args << "\n"
                      << r.err;
      }
    };

    step("synth --task sarcasm --size 36 --seed 5 --out " + quoted(train_corpus));
    step("synth --task sarcasm --size 24 --seed 6 --out " + quoted(test_corpus));
    step("synth --task sentiment --size 30 --seed 2 --out " + quoted(sentiment_corpus));
    step("train --model baseline --data " + quoted(train_corpus) + " --seed 3 --config " +
         quoted(tiny_config) + " --out " + quoted(models_dir) + " --quiet");
    step("train --model sentiment --data " + quoted(sentiment_corpus) +
         " --seed 3 --config " + quoted(tiny_config) + " --out " + quoted(models_dir) +
         " --quiet");

    const std::string with_models =
        scnn::read_file(tiny_config.string()) +
        "\n[models]\n"
        "baseline = " + (models_dir / "baseline.scnn").string() + "\n" +
        "sentiment = " + (models_dir / "sentiment.scnn").string() + "\n";
    scnn::atomic_write_file(models_config.string(), with_models);
  }

  void SetUp() override { ASSERT_TRUE(fixture_ok) << "shared fixture failed to build"; }
};

fs::path Cli::root;
fs::path Cli::train_corpus;
fs::path Cli::test_corpus;
fs::path Cli::sentiment_corpus;
fs::path Cli::tiny_config;
fs::path Cli::models_config;
fs::path Cli::models_dir;
bool Cli::fixture_ok = false;

}  // namespace

TEST_F(Cli, SynthIsDeterministicAndManifested) {
  const fs::path a = root / "det-a.tsv";
  const fs::path b = root / "det-b.tsv";
  const fs::path c = root / "det-c.tsv";
  ASSERT_EQ(run_cli("synth --task sarcasm --size 20 --seed 9 --out " + quoted(a)).code, 0);
  ASSERT_EQ(run_cli("synth --task sarcasm --size 20 --seed 9 --out " + quoted(b)).code, 0);
  ASSERT_EQ(run_cli("synth --task sarcasm --size 20 --seed 10 --out " + quoted(c)).code, 0);
  EXPECT_EQ(scnn::read_file(a.string()), scnn::read_file(b.string()));
  EXPECT_NE(scnn::read_file(a.string()), scnn::read_file(c.string()));

  const std::string manifest = scnn::read_file((a.string() + ".manifest"));
  EXPECT_NE(manifest.find("command = synth"), std::string::npos);
  EXPECT_NE(manifest.find("seed = 9"), std::string::npos);
  EXPECT_NE(manifest.find("output.fingerprint = "), std::string::npos);
}

TEST_F(Cli, SynthUsageAndConfigErrors) {
  EXPECT_EQ(run_cli("synth --task sarcasm --size 20").code, 1);  // no --out
  const fs::path out = root / "bad-mechanism.tsv";
  const RunResult r =
      run_cli("synth --task sarcasm --mechanism irony --out " + quoted(out));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("mechanism"), std::string::npos);
}

TEST_F(Cli, PrepCleansAndIsIdempotent) {
  const fs::path raw = root / "raw.tsv";
  const fs::path once = root / "prep1.tsv";
  const fs::path twice = root / "prep2.tsv";
  scnn::atomic_write_file(raw.string(),
                          "sarcastic\tI LOVE Mondays http://x.example @bob #mondays\n"
                          "non-sarcastic\thttp://only.a.url\n");

  const RunResult r1 = run_cli("prep --data " + quoted(raw) + " --out " + quoted(once));
  ASSERT_EQ(r1.code, 0);
  EXPECT_NE(r1.out.find("prepared 2 records (1 empty after cleaning)"), std::string::npos);

  const std::string cleaned = scnn::read_file(once.string());
  EXPECT_EQ(cleaned.find("http"), std::string::npos);
  EXPECT_EQ(cleaned.find("LOVE"), std::string::npos);
  EXPECT_NE(cleaned.find("love"), std::string::npos);
  EXPECT_NE(cleaned.find("non-sarcastic\t\n"), std::string::npos);  // emptied, kept

  const RunResult r2 = run_cli("prep --data " + quoted(once) + " --out " + quoted(twice));
  ASSERT_EQ(r2.code, 0);
  EXPECT_EQ(scnn::read_file(once.string()), scnn::read_file(twice.string()));
}

TEST_F(Cli, PrepRejectsCorpusWithoutTabs) {
  const fs::path raw = root / "broken.tsv";
  scnn::atomic_write_file(raw.string(), "sarcastic\tfine line\nno tab at all\n");
  const RunResult r =
      run_cli("prep --data " + quoted(raw) + " --out " + quoted(root / "broken-out.tsv"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST_F(Cli, TrainWritesCheckpointAndManifest) {
  const std::string checkpoint = scnn::read_file((models_dir / "baseline.scnn").string());
  ASSERT_GE(checkpoint.size(), 4u);
  EXPECT_EQ(checkpoint.substr(0, 4), "SCNN");

  const std::string manifest = scnn::read_file((models_dir / "baseline.manifest").string());
  EXPECT_NE(manifest.find("command = train"), std::string::npos);
  EXPECT_NE(manifest.find("model = baseline"), std::string::npos);
  EXPECT_NE(manifest.find("dataset.train = "), std::string::npos);
  EXPECT_NE(manifest.find("output.fingerprint = "), std::string::npos);

  EXPECT_EQ(run_cli("train --model baseline --out " + quoted(root / "nowhere")).code, 1);
  EXPECT_EQ(run_cli("train --model baseline --data " + quoted(root / "missing.tsv") +
                    " --out " + quoted(root / "nowhere"))
                .code,
            2);
  EXPECT_EQ(run_cli("train --model sorcery --data " + quoted(train_corpus) + " --out " +
                    quoted(root / "nowhere"))
                .code,
            1);
}

TEST_F(Cli, ExtractEmitsOneRowPerTweet) {
  const fs::path out = root / "features-b.tsv";
  ASSERT_EQ(run_cli("extract --model " + quoted(models_dir / "baseline.scnn") + " --data " +
                    quoted(test_corpus) + " --out " + quoted(out) + " --quiet")
                .code,
            0);
  const auto rows = lines_of(scnn::read_file(out.string()));
  ASSERT_EQ(rows.size(), 24u);
  for (const auto& row : rows) {
    EXPECT_EQ(column_count(row), 2u + 100u);  // id, label, fc activations
  }
}

TEST_F(Cli, SvmTrainIsDeterministicOnExtractedFeatures) {
  const fs::path features = root / "features-train.tsv";
  ASSERT_EQ(run_cli("extract --model " + quoted(models_dir / "baseline.scnn") + " --data " +
                    quoted(train_corpus) + " --out " + quoted(features) + " --quiet")
                .code,
            0);

  const fs::path svm_a = root / "svm-a.scnn";
  const fs::path svm_b = root / "svm-b.scnn";
  ASSERT_EQ(run_cli("svm-train --data " + quoted(features) + " --config " +
                    quoted(tiny_config) + " --out " + quoted(svm_a) + " --quiet")
                .code,
            0);
  ASSERT_EQ(run_cli("svm-train --data " + quoted(features) + " --config " +
                    quoted(tiny_config) + " --out " + quoted(svm_b) + " --quiet")
                .code,
            0);
  const std::string bytes = scnn::read_file(svm_a.string());
  EXPECT_EQ(bytes, scnn::read_file(svm_b.string()));
  EXPECT_EQ(bytes.substr(0, 4), "SCNN");

  // Three-class features cannot feed the binary SVM.
  const fs::path sentiment_features = root / "features-s3.tsv";
  ASSERT_EQ(run_cli("extract --model " + quoted(models_dir / "baseline.scnn") + " --data " +
                    quoted(sentiment_corpus) + " --out " + quoted(sentiment_features) +
                    " --quiet")
                .code,
            0);
  EXPECT_EQ(run_cli("svm-train --data " + quoted(sentiment_features) + " --out " +
                    quoted(root / "svm-bad.scnn"))
                .code,
            2);
}

TEST_F(Cli, FuseConcatenatesConfiguredModels) {
  const fs::path out = root / "fused.tsv";
  ASSERT_EQ(run_cli("fuse --features B+S --data " + quoted(test_corpus) + " --config " +
                    quoted(models_config) + " --out " + quoted(out) + " --quiet")
                .code,
            0);
  const auto rows = lines_of(scnn::read_file(out.string()));
  ASSERT_EQ(rows.size(), 24u);
  EXPECT_EQ(column_count(rows.front()), 2u + 100u + 100u);

  // Static fusion only makes sense inside experiments; missing models are
  // config errors too.
  EXPECT_EQ(run_cli("fuse --features static:B+S --data " + quoted(test_corpus) +
                    " --config " + quoted(models_config) + " --out " +
                    quoted(root / "fused-bad.tsv"))
                .code,
            1);
  EXPECT_EQ(run_cli("fuse --features B+E --data " + quoted(test_corpus) + " --config " +
                    quoted(models_config) + " --out " + quoted(root / "fused-bad.tsv"))
                .code,
            1);
}

TEST_F(Cli, ExperimentWritesReportsAndRerunsIdentically) {
  const std::string config_text = scnn::read_file(models_config.string()) +
                                  "\n[experiment]\n"
                                  "fusions = B\n"
                                  "k = 2\n"
                                  "\n[data]\n"
                                  "train = " + train_corpus.string() + "\n" +
                                  "test = " + test_corpus.string() + "\n";
  const fs::path config = root / "experiment.ini";
  scnn::atomic_write_file(config.string(), config_text);

  const fs::path out1 = root / "exp-run1";
  const fs::path out2 = root / "exp-run2";
  const RunResult r1 =
      run_cli("experiment --config " + quoted(config) + " --seed 4 --out " + quoted(out1));
  ASSERT_EQ(r1.code, 0) << r1.err;
  EXPECT_NE(r1.out.find("features"), std::string::npos);  // table echoed

  const std::string tsv = scnn::read_file((out1 / "results.tsv").string());
  EXPECT_NE(tsv.find("B\t1\t"), std::string::npos);
  EXPECT_NE(tsv.find("B\t2\t"), std::string::npos);
  EXPECT_NE(tsv.find("B\tmean\t"), std::string::npos);
  EXPECT_NE(tsv.find("B\tcross\t"), std::string::npos);
  EXPECT_FALSE(scnn::read_file((out1 / "results.txt").string()).empty());

  const std::string manifest = scnn::read_file((out1 / "manifest").string());
  EXPECT_NE(manifest.find("command = experiment"), std::string::npos);
  EXPECT_NE(manifest.find("dataset.train = "), std::string::npos);
  EXPECT_NE(manifest.find("k = 2"), std::string::npos);

  const RunResult r2 = run_cli("experiment --config " + quoted(config) +
                               " --seed 4 --out " + quoted(out2) + " --quiet");
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_EQ(tsv, scnn::read_file((out2 / "results.tsv").string()));
  EXPECT_EQ(scnn::read_file((out1 / "results.txt").string()),
            scnn::read_file((out2 / "results.txt").string()));
}

TEST_F(Cli, ExperimentRejectsUnknownFusionToken) {
  const std::string config_text = scnn::read_file(tiny_config.string()) +
                                  "\n[experiment]\nfusions = X\nk = 2\n\n[data]\ntrain = " +
                                  train_corpus.string() + "\n";
  const fs::path config = root / "bad-fusion.ini";
  scnn::atomic_write_file(config.string(), config_text);
  const RunResult r =
      run_cli("experiment --config " + quoted(config) + " --out " + quoted(root / "exp-bad"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("X"), std::string::npos);
}

TEST_F(Cli, CrossDatasetNeedsATestCorpus) {
  const std::string base = scnn::read_file(tiny_config.string()) +
                           "\n[experiment]\nfusions = B\nk = 2\n\n[data]\ntrain = " +
                           train_corpus.string() + "\n";
  const fs::path config = root / "cross-missing.ini";
  scnn::atomic_write_file(config.string(), base);
  EXPECT_EQ(run_cli("cross-dataset --config " + quoted(config) + " --out " +
                    quoted(root / "cross-bad"))
                .code,
            1);

  const fs::path config_full = root / "cross-full.ini";
  scnn::atomic_write_file(config_full.string(),
                          base + "test = " + test_corpus.string() + "\n");
  const fs::path out = root / "cross-run";
  ASSERT_EQ(run_cli("cross-dataset --config " + quoted(config_full) + " --out " +
                    quoted(out) + " --quiet")
                .code,
            0);
  const auto rows = lines_of(scnn::read_file((out / "results.tsv").string()));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NE(rows.front().find("B\tcross\t"), std::string::npos);
}

TEST_F(Cli, CorrelateRanksProbePairs) {
  const fs::path out = root / "correlate.tsv";
  const RunResult r = run_cli(
      "correlate --data " + quoted(test_corpus) +
      " --pairs 'baseline:sarcastic,sentiment:positive' --config " + quoted(models_config) +
      " --out " + quoted(out) + " --quiet");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines_of(scnn::read_file(out.string()));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "feature_a\tfeature_b\trho\tt\tp_value\tsignificant");
  EXPECT_EQ(rows[1].rfind("baseline:sarcastic\tsentiment:positive\t", 0), 0u);
  const double rho = std::stod(rows[1].substr(rows[1].find("positive\t") + 9));
  EXPECT_GE(rho, -1.0);
  EXPECT_LE(rho, 1.0);

  EXPECT_EQ(run_cli("correlate --data " + quoted(test_corpus) +
                    " --pairs 'baseline:nope,sentiment:positive' --config " +
                    quoted(models_config) + " --out " + quoted(root / "correlate-bad.tsv"))
                .code,
            1);
}

TEST_F(Cli, PcaProjectsFeatures) {
  const fs::path out = root / "pca.tsv";
  ASSERT_EQ(run_cli("pca --model " + quoted(models_dir / "baseline.scnn") + " --data " +
                    quoted(test_corpus) + " --out " + quoted(out) + " --quiet")
                .code,
            0);
  const auto rows = lines_of(scnn::read_file(out.string()));
  ASSERT_EQ(rows.size(), 25u);  // header + 24 tweets
  EXPECT_EQ(rows.front(), "id\tx\ty\tlabel");
  EXPECT_EQ(column_count(rows[1]), 4u);

  const fs::path out3 = root / "pca3.tsv";
  ASSERT_EQ(run_cli("pca --model " + quoted(models_dir / "baseline.scnn") + " --data " +
                    quoted(test_corpus) + " --dims 3 --out " + quoted(out3) + " --quiet")
                .code,
            0);
  EXPECT_EQ(lines_of(scnn::read_file(out3.string())).front(), "id\tc1\tc2\tc3\tlabel");
}

TEST_F(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run_cli("").code, 1);
  EXPECT_EQ(run_cli("conjure").code, 1);
}
