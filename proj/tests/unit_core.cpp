#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <set>

#include "scnn/embeddings.hpp"
#include "scnn/io.hpp"
#include "scnn/rng.hpp"
#include "scnn/tensor.hpp"
#include "scnn/text.hpp"
#include "scnn/vocab.hpp"

namespace fs = std::filesystem;
using namespace scnn;

namespace {

fs::path temp_dir(const char* tag) {
  fs::path p = fs::temp_directory_path() / (std::string("scnn_core_") + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Tensor, ShapeAndAccess) {
  Tensor t({2, 3});
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.size(), 6u);
  t.at(1, 2) = 4.5;
  EXPECT_DOUBLE_EQ(t[5], 4.5);
  EXPECT_EQ(t.shape_string(), "[2x3]");

  Tensor lit = Tensor::from_rows({{1, 2}, {3, 4}});
  EXPECT_DOUBLE_EQ(lit.at(1, 0), 3.0);
  EXPECT_TRUE(lit.all_finite());
}

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  EXPECT_THROW(Tensor({3}, {1.0, 2.0}), ShapeError);
  EXPECT_THROW(Tensor::from_rows({{1, 2}, {3}}), ShapeError);
}

TEST(Rng, DeterministicStreams) {
  Rng a = Rng::stream(42, 1);
  Rng b = Rng::stream(42, 1);
  Rng c = Rng::stream(42, 2);
  bool diverged = false;
  for (int i = 0; i < 20; ++i) {
    const double va = a.uniform();
    EXPECT_DOUBLE_EQ(va, b.uniform());
    if (va != c.uniform()) diverged = true;
    EXPECT_GE(va, 0.0);
    EXPECT_LT(va, 1.0);
  }
  EXPECT_TRUE(diverged);
}

TEST(Rng, UniformRangeAndShuffle) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.uniform(-0.25, 0.25);
    EXPECT_GE(v, -0.25);
    EXPECT_LT(v, 0.25);
  }
  std::vector<int> xs{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> original = xs;
  Rng r1(3), r2(3);
  r1.shuffle(xs);
  std::vector<int> ys = original;
  r2.shuffle(ys);
  EXPECT_EQ(xs, ys);
  std::multiset<int> ms(xs.begin(), xs.end());
  EXPECT_EQ(ms, std::multiset<int>(original.begin(), original.end()));
}

TEST(Io, AtomicWriteAndRead) {
  const fs::path dir = temp_dir("io");
  const fs::path file = dir / "nested" / "a.txt";
  atomic_write_file(file, "hello\n");
  EXPECT_EQ(read_file(file), "hello\n");
  EXPECT_FALSE(fs::exists(file.string() + ".tmp"));
  EXPECT_THROW(read_file(dir / "missing.txt"), DataError);
}

TEST(Io, SplitLines) {
  const auto lines = split_lines("a\nb\r\n\nc");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[1], "b");
  EXPECT_EQ(lines[2], "");
  EXPECT_EQ(lines[3], "c");
  EXPECT_EQ(split_lines("x\n").size(), 1u);
}

TEST(Text, CleanTweetStripsNoise) {
  EXPECT_EQ(clean_tweet("I love this http://t.co/xyz so much"), "I love this so much");
  EXPECT_EQ(clean_tweet("@user thanks #blessed"), "thanks");
  EXPECT_EQ(clean_tweet("  spaced   out  "), "spaced out");
}

TEST(Text, TokenizeKeepsEmoticons) {
  const auto toks = tokenize("Great, just great :( really!!");
  const std::vector<std::string> want{"great", ",", "just", "great", ":(",
                                      "really", "!", "!"};
  EXPECT_EQ(toks, want);
}

TEST(Text, PrepPipelineIsIdempotent) {
  const std::string raw = "WOW @you I love #mondays http://x.io/a :D so much!";
  auto once = tokenize(clean_tweet(raw));
  std::string joined;
  for (const auto& t : once) {
    if (!joined.empty()) joined.push_back(' ');
    joined += t;
  }
  EXPECT_EQ(tokenize(clean_tweet(joined)), once);
}

TEST(Vocab, BuildOrdersByFrequencyThenToken) {
  Vocabulary v = Vocabulary::build({{"b", "a", "b"}, {"c", "a", "b"}}, 1);
  // b appears 3 times, a twice, c once.
  EXPECT_EQ(v.index_of("b"), 2u);
  EXPECT_EQ(v.index_of("a"), 3u);
  EXPECT_EQ(v.index_of("c"), 4u);
  EXPECT_EQ(v.index_of("zzz"), Vocabulary::kUnk);
  EXPECT_EQ(v.token_at(0), "<pad>");
  EXPECT_EQ(v.token_at(1), "<unk>");

  Vocabulary pruned = Vocabulary::build({{"b", "a", "b"}, {"c", "a", "b"}}, 2);
  EXPECT_TRUE(pruned.contains("a"));
  EXPECT_FALSE(pruned.contains("c"));
  EXPECT_THROW(Vocabulary::build({}, 0), ConfigError);
}

TEST(Vocab, EncodePadsAndTruncates) {
  Vocabulary v = Vocabulary::build({{"x", "y"}}, 1);
  const auto padded = encode({"x", "nope"}, v, 4);
  const std::vector<std::size_t> want{v.index_of("x"), Vocabulary::kUnk,
                                      Vocabulary::kPad, Vocabulary::kPad};
  EXPECT_EQ(padded, want);
  EXPECT_EQ(encode({"x", "y", "x"}, v, 2).size(), 2u);
  EXPECT_THROW(encode({"x"}, v, 0), ConfigError);
}

TEST(Embeddings, PadRowStaysZero) {
  Vocabulary v = Vocabulary::build({{"hi", "there"}}, 1);
  EmbeddingMatrix m = random_embeddings(v, 5, 99);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(m.row(0)[j], 0.0);
  const Tensor e = m.embed({v.index_of("hi"), Vocabulary::kPad});
  EXPECT_EQ(e.rows(), 2u);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(e.at(1, j), 0.0);
  EXPECT_THROW(m.embed({99}), DataError);
}

TEST(Embeddings, OovRowsDependOnlyOnTokenAndSeed) {
  const auto a = oov_row("word", 8, 5);
  const auto b = oov_row("word", 8, 5);
  const auto c = oov_row("word", 8, 6);
  const auto d = oov_row("words", 8, 5);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(a, d);
}

TEST(Embeddings, BinaryFileRoundTripIsBitExact) {
  const std::vector<std::string> tokens{"alpha", "beta", "x"};
  const std::vector<std::vector<float>> vecs{
      {1.0f, -2.5f, 3.25f}, {0.0f, 1e-30f, -7.0f}, {9.5f, 0.125f, -0.0f}};
  const std::string bytes = format_embedding_file(tokens, vecs);
  const PretrainedEmbeddings pre = PretrainedEmbeddings::parse(bytes);
  EXPECT_EQ(pre.size(), 3u);
  EXPECT_EQ(pre.dim(), 3u);
  const std::string again = format_embedding_file(pre.tokens(), [&] {
    std::vector<std::vector<float>> out;
    for (const auto& t : pre.tokens()) out.push_back(*pre.find(t));
    return out;
  }());
  EXPECT_EQ(bytes, again);

  const fs::path dir = temp_dir("emb");
  write_embedding_file(dir / "w.bin", tokens, vecs);
  EXPECT_EQ(read_file(dir / "w.bin"), bytes);
}

TEST(Embeddings, ParserReportsByteOffsets) {
  const std::string good = format_embedding_file({"ab"}, {{1.0f, 2.0f}});
  EXPECT_NO_THROW(PretrainedEmbeddings::parse(good));

  try {
    PretrainedEmbeddings::parse(good.substr(0, good.size() - 2));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
  EXPECT_THROW(PretrainedEmbeddings::parse("2 2\nab "), ParseError);
  EXPECT_THROW(PretrainedEmbeddings::parse("nonsense"), ParseError);
  EXPECT_THROW(PretrainedEmbeddings::parse(good + "trailing"), ParseError);
}

TEST(Embeddings, FromPretrainedFallsBackToOov) {
  Vocabulary v = Vocabulary::build({{"known", "missing"}}, 1);
  const PretrainedEmbeddings pre =
      PretrainedEmbeddings::parse(format_embedding_file({"known"}, {{1.0f, 2.0f}}));
  EmbeddingMatrix m = embeddings_from_pretrained(v, pre, 11);
  const std::size_t ki = v.index_of("known");
  EXPECT_DOUBLE_EQ(m.row(ki)[0], 1.0);
  EXPECT_DOUBLE_EQ(m.row(ki)[1], 2.0);
  const auto fallback = oov_row("missing", 2, 11);
  EXPECT_DOUBLE_EQ(m.row(v.index_of("missing"))[0], fallback[0]);
}
