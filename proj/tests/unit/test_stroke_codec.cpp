#include <random>
#include <set>

#include <gtest/gtest.h>

#include "strokegestalt/error.hpp"
#include "strokegestalt/stroke_codec.hpp"
#include "strokegestalt/text.hpp"

namespace sg = strokegestalt;

namespace {

const sg::StrokeTable& latin() {
  static const auto t = sg::load_stroke_table(STROKEGESTALT_DATA_DIR "/strokes/latin_digits.strokes");
  return t;
}

}  // namespace

TEST(StrokeTable, LatinTableCoversAlphabet) {
  const auto& t = latin();
  EXPECT_EQ(t.stroke_count(), 9);
  EXPECT_EQ(t.vocab_size(), 11);
  EXPECT_EQ(t.start_id(), 10);
  EXPECT_EQ(t.entries().size(), 36u);
  for (char c : std::string("0123456789abcdefghijklmnopqrstuvwxyz")) {
    ASSERT_TRUE(t.contains(static_cast<char32_t>(c))) << c;
    for (int id : t.decompose(static_cast<char32_t>(c))) {
      EXPECT_GE(id, 1);
      EXPECT_LE(id, 9);
    }
  }
}

TEST(StrokeTable, DigitsFollowTheWritingOrder) {
  const auto& t = latin();
  const int h = t.stroke_id("horizontal"), v = t.stroke_id("vertical");
  EXPECT_EQ(t.decompose(U'1'), std::vector<int>({v}));
  EXPECT_EQ(t.decompose(U'7'), std::vector<int>({h, v}));
}

TEST(StrokeTable, DecompositionsAreDistinct) {
  std::set<std::vector<int>> seen;
  for (const auto& [c, ids] : latin().entries()) EXPECT_TRUE(seen.insert(ids).second);
}

TEST(StrokeTable, UppercaseFoldsToLowercase) {
  EXPECT_EQ(latin().decompose(U'Q'), latin().decompose(U'q'));
}

TEST(StrokeTable, UnknownCharacterThrows) {
  EXPECT_THROW(latin().decompose(U'é'), sg::CodecError);
  EXPECT_THROW(latin().stroke_id("spiral"), sg::CodecError);
}

TEST(StrokeTable, ChineseSampleTableLoads) {
  const auto t = sg::load_stroke_table(STROKEGESTALT_DATA_DIR "/strokes/chinese.strokes");
  EXPECT_EQ(t.stroke_count(), 5);
  EXPECT_EQ(t.decompose(U'十').size(), 2u);  // 十: horizontal, vertical
}

TEST(StrokeTable, HashIgnoresCommentsAndOrder) {
  const auto a = sg::parse_stroke_table("script demo strokes 2\nstroke 1 h\nstroke 2 v\nchar a 1\nchar b 2,1\n");
  const auto b = sg::parse_stroke_table("# comment\nscript demo strokes 2\nstroke 2 v\nstroke 1 h\nchar b 2,1\nchar a 1 # x\n");
  const auto c = sg::parse_stroke_table("script demo strokes 2\nstroke 1 h\nstroke 2 v\nchar a 1\nchar b 1,2\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.hash().size(), 64u);
}

TEST(StrokeTable, ParserRejectsBrokenTables) {
  EXPECT_THROW(sg::parse_stroke_table("stroke 1 h\nchar a 1\n"), sg::CodecError);
  EXPECT_THROW(sg::parse_stroke_table("script d strokes 1\nstroke 1 h\nchar a 1\nchar a 1\n"), sg::CodecError);
  EXPECT_THROW(sg::parse_stroke_table("script d strokes 1\nstroke 1 h\nchar a 2\n"), sg::CodecError);
  EXPECT_THROW(sg::parse_stroke_table("script d strokes 1\nstroke 1 h\nchar a 0\n"), sg::CodecError);
  EXPECT_THROW(sg::parse_stroke_table("script d strokes 2\nstroke 1 h\nchar a 1\n"), sg::CodecError);
  try {
    sg::parse_stroke_table("script d strokes 1\nstroke 1 h\nchar a 3\n");
    FAIL();
  } catch (const sg::CodecError& e) {
    EXPECT_NE(std::string(e.what()).find("out of range"), std::string::npos);
  }
}

TEST(EncodeLabel, ExampleWord) {
  const auto& t = latin();
  const auto label = sg::encode_label(t, "It7!");
  std::vector<int> expect;
  for (char32_t c : {U'i', U't', U'7'}) {
    const auto& d = t.decompose(c);
    expect.insert(expect.end(), d.begin(), d.end());
  }
  expect.push_back(0);
  EXPECT_EQ(label.ids, expect);
}

TEST(EncodeLabel, LengthLawOnRandomStrings) {
  const auto& t = latin();
  const std::string alphabet = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ.,!-' ";
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1), len(1, 16);
  int checked = 0;
  while (checked < 1000) {
    std::string s;
    const auto n = len(rng);
    for (size_t k = 0; k < n; ++k) s.push_back(alphabet[pick(rng)]);
    const auto norm = sg::normalize_text(s);
    if (norm.empty()) {
      EXPECT_THROW(sg::encode_label(t, s), sg::CodecError);
      continue;
    }
    size_t expected = 1;
    for (char c : norm) expected += t.decompose(static_cast<char32_t>(c)).size();
    const auto label = sg::encode_label(t, s);
    ASSERT_EQ(label.size(), expected) << s;
    ASSERT_EQ(label.ids.back(), 0);
    for (size_t i = 0; i + 1 < label.size(); ++i) ASSERT_NE(label.ids[i], 0);
    ++checked;
  }
}

TEST(EncodeLabel, Errors) {
  EXPECT_THROW(sg::encode_label(latin(), ""), sg::CodecError);
  EXPECT_THROW(sg::encode_label(latin(), "!!"), sg::CodecError);
  EXPECT_THROW(sg::encode_label(latin(), "caf\xC3\xA9"), sg::CodecError);
}

TEST(ShiftRight, PrependsStartAndDropsLast) {
  const auto label = sg::encode_label(latin(), "7");
  const auto shifted = sg::shift_right(label, latin().start_id());
  ASSERT_EQ(shifted.size(), label.size());
  EXPECT_EQ(shifted[0], latin().start_id());
  for (size_t i = 1; i < shifted.size(); ++i) EXPECT_EQ(shifted[i], label.ids[i - 1]);
}
