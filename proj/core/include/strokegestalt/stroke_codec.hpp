#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace strokegestalt {

using StrokeId = int;

/// Character to basic-stroke decomposition for one script.
///
/// Stroke ids run 1..stroke_count(). Id 0 is the end-of-sequence marker and
/// stroke_count() + 1 is reserved as the decoder start symbol, so a recognizer
/// over this table needs stroke_count() + 2 embedding rows.
class StrokeTable {
 public:
  static constexpr StrokeId kEosId = 0;

  /// Validates every invariant; throws CodecError on violation.
  StrokeTable(std::string script_name, std::vector<std::string> stroke_names,
              std::map<char32_t, std::vector<StrokeId>> char_to_strokes);

  const std::string& script_name() const { return script_name_; }
  int stroke_count() const { return static_cast<int>(stroke_names_.size()); }
  StrokeId eos_id() const { return kEosId; }
  StrokeId start_id() const { return stroke_count() + 1; }
  /// Embedding rows needed by a decoder: strokes + eos + start.
  int vocab_size() const { return stroke_count() + 2; }

  const std::vector<std::string>& stroke_names() const { return stroke_names_; }
  const std::map<char32_t, std::vector<StrokeId>>& entries() const { return char_to_strokes_; }

  /// Id of a named basic stroke; throws CodecError if unknown.
  StrokeId stroke_id(std::string_view name) const;

  /// Case-folds and looks up; throws CodecError("unknown character ...").
  const std::vector<StrokeId>& decompose(char32_t c) const;
  bool contains(char32_t c) const;

  /// SHA-256 over a canonical serialization (comments and ordering in the
  /// source file do not affect it).
  const std::string& hash() const { return hash_; }

 private:
  std::string script_name_;
  std::vector<std::string> stroke_names_;
  std::map<char32_t, std::vector<StrokeId>> char_to_strokes_;
  std::string hash_;
};

/// Parses the `.strokes` text format:
///   script <name> strokes <k>
///   stroke <id> <name>
///   char <glyph|U+XXXX> <id>[,<id>...]
/// `#` starts a comment.
StrokeTable parse_stroke_table(std::string_view text, std::string_view origin = "<memory>");
StrokeTable load_stroke_table(const std::filesystem::path& path);

/// Ids terminated by exactly one eos.
struct StrokeLabel {
  std::vector<StrokeId> ids;
  std::string source_text;

  size_t size() const { return ids.size(); }
};

std::vector<StrokeId> decompose_char(const StrokeTable& table, char32_t c);

/// Concatenated per-character decompositions plus trailing eos. The text is
/// normalized first; throws CodecError on empty or undecomposable text.
StrokeLabel encode_label(const StrokeTable& table, std::string_view text);

/// [start, s_1, ..., s_{n-1}]: teacher-forcing input for a label of length n.
std::vector<StrokeId> shift_right(const StrokeLabel& label, StrokeId start_id);
std::vector<int> shift_right(const std::vector<int>& ids, int start_id);

}  // namespace strokegestalt
