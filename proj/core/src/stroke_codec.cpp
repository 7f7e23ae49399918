#include "strokegestalt/stroke_codec.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "strokegestalt/error.hpp"
#include "strokegestalt/hash.hpp"
#include "strokegestalt/text.hpp"

namespace strokegestalt {

namespace {

std::string describe(char32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(c));
  return "'" + utf8_encode(c) + "' (" + buf + ")";
}

const std::u32string kLatinDigitDomain = U"abcdefghijklmnopqrstuvwxyz0123456789";

}  // namespace

StrokeTable::StrokeTable(std::string script_name, std::vector<std::string> stroke_names,
                         std::map<char32_t, std::vector<StrokeId>> char_to_strokes)
    : script_name_(std::move(script_name)),
      stroke_names_(std::move(stroke_names)),
      char_to_strokes_(std::move(char_to_strokes)) {
  if (stroke_names_.empty()) throw CodecError("stroke table declares no basic strokes");
  const int k = stroke_count();
  for (const auto& [c, ids] : char_to_strokes_) {
    if (ids.empty()) throw CodecError("empty stroke sequence for " + describe(c));
    for (StrokeId id : ids) {
      if (id == kEosId) throw CodecError("eos id used inside sequence of " + describe(c));
      if (id < 1 || id > k) {
        throw CodecError("stroke id out of range: " + std::to_string(id) + " for " + describe(c) +
                         " (valid 1.." + std::to_string(k) + ")");
      }
    }
  }
  if (script_name_ == "latin_digits") {
    if (k != 9) throw CodecError("latin_digits table must declare 9 basic strokes");
    for (char32_t c : kLatinDigitDomain) {
      if (!char_to_strokes_.contains(c)) {
        throw CodecError("missing required character " + describe(c) + " for script latin_digits");
      }
    }
    if (char_to_strokes_.size() != kLatinDigitDomain.size()) {
      throw CodecError("latin_digits table must cover exactly a-z and 0-9");
    }
  } else if (script_name_ == "chinese") {
    if (k != 5) throw CodecError("chinese table must declare 5 basic strokes");
  }

  std::ostringstream canon;
  canon << "script " << script_name_ << " strokes " << k << '\n';
  for (int i = 0; i < k; ++i) canon << "stroke " << (i + 1) << ' ' << stroke_names_[i] << '\n';
  for (const auto& [c, ids] : char_to_strokes_) {
    canon << "char " << static_cast<unsigned>(c);
    for (StrokeId id : ids) canon << ' ' << id;
    canon << '\n';
  }
  hash_ = sha256_hex(canon.str());
}

StrokeId StrokeTable::stroke_id(std::string_view name) const {
  auto it = std::find(stroke_names_.begin(), stroke_names_.end(), name);
  if (it == stroke_names_.end()) throw CodecError("unknown stroke name: " + std::string(name));
  return static_cast<StrokeId>(it - stroke_names_.begin()) + 1;
}

bool StrokeTable::contains(char32_t c) const {
  return char_to_strokes_.contains(fold_case(c));
}

const std::vector<StrokeId>& StrokeTable::decompose(char32_t c) const {
  auto it = char_to_strokes_.find(fold_case(c));
  if (it == char_to_strokes_.end()) {
    throw CodecError("unknown character " + describe(c) + " for script " + script_name_);
  }
  return it->second;
}

namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream is{std::string(line)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

int parse_int(std::string_view s, std::string_view what, std::string_view where) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw CodecError(std::string(where) + ": invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

char32_t parse_glyph(const std::string& tok, const std::string& where) {
  if (tok.size() > 2 && (tok[0] == 'U' || tok[0] == 'u') && tok[1] == '+') {
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(tok.data() + 2, tok.data() + tok.size(), v, 16);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw CodecError(where + ": invalid code point '" + tok + "'");
    }
    return static_cast<char32_t>(v);
  }
  const auto cps = utf8_decode(tok);
  if (cps.size() != 1) throw CodecError(where + ": expected a single glyph, got '" + tok + "'");
  return cps[0];
}

}  // namespace

StrokeTable parse_stroke_table(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::string script;
  int declared = -1;
  std::map<int, std::string> strokes;
  std::map<char32_t, std::vector<StrokeId>> entries;

  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);

    if (toks[0] == "script") {
      if (toks.size() != 4 || toks[2] != "strokes") {
        throw CodecError(where + ": expected 'script <name> strokes <k>'");
      }
      if (!script.empty()) throw CodecError(where + ": duplicate script header");
      script = toks[1];
      declared = parse_int(toks[3], "stroke count", where);
    } else if (toks[0] == "stroke") {
      if (script.empty()) throw CodecError(where + ": stroke before script header");
      if (toks.size() != 3) throw CodecError(where + ": expected 'stroke <id> <name>'");
      const int id = parse_int(toks[1], "stroke id", where);
      if (id < 1 || id > declared) {
        throw CodecError(where + ": stroke id out of range: " + toks[1]);
      }
      if (!strokes.emplace(id, toks[2]).second) {
        throw CodecError(where + ": duplicate stroke id " + toks[1]);
      }
    } else if (toks[0] == "char") {
      if (script.empty()) throw CodecError(where + ": char before script header");
      if (toks.size() != 3) throw CodecError(where + ": expected 'char <glyph> <id>[,<id>...]'");
      const char32_t c = parse_glyph(toks[1], where);
      std::vector<StrokeId> ids;
      std::string_view rest = toks[2];
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        ids.push_back(parse_int(rest.substr(0, comma), "stroke id", where));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      for (StrokeId id : ids) {
        if (id < 1 || id > declared) {
          throw CodecError(where + ": stroke id out of range: " + std::to_string(id));
        }
      }
      if (!entries.emplace(c, std::move(ids)).second) {
        throw CodecError(where + ": duplicate character entry " + toks[1]);
      }
    } else {
      throw CodecError(where + ": unknown directive '" + toks[0] + "'");
    }
  }

  if (script.empty()) throw CodecError(std::string(origin) + ": missing script header");
  if (static_cast<int>(strokes.size()) != declared) {
    throw CodecError(std::string(origin) + ": declared " + std::to_string(declared) +
                     " strokes but defined " + std::to_string(strokes.size()));
  }
  std::vector<std::string> names;
  for (const auto& [id, name] : strokes) names.push_back(name);
  return StrokeTable(std::move(script), std::move(names), std::move(entries));
}

StrokeTable load_stroke_table(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CodecError("cannot open stroke table: " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_stroke_table(ss.str(), path.string());
}

std::vector<StrokeId> decompose_char(const StrokeTable& table, char32_t c) {
  return table.decompose(c);
}

StrokeLabel encode_label(const StrokeTable& table, std::string_view text) {
  const std::string norm = normalize_text(text);
  if (norm.empty()) throw CodecError("cannot encode empty text");
  StrokeLabel label;
  label.source_text = std::string(text);
  for (char32_t c : utf8_decode(norm)) {
    if (!table.contains(c)) {
      throw CodecError("unencodable character " + describe(c) + " in '" + std::string(text) + "'");
    }
    const auto& ids = table.decompose(c);
    label.ids.insert(label.ids.end(), ids.begin(), ids.end());
  }
  label.ids.push_back(StrokeTable::kEosId);
  return label;
}

std::vector<int> shift_right(const std::vector<int>& ids, int start_id) {
  std::vector<int> out;
  if (ids.empty()) return out;
  out.reserve(ids.size());
  out.push_back(start_id);
  out.insert(out.end(), ids.begin(), ids.end() - 1);
  return out;
}

std::vector<StrokeId> shift_right(const StrokeLabel& label, StrokeId start_id) {
  return shift_right(label.ids, start_id);
}

}  // namespace strokegestalt
