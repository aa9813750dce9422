// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "style/style.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "common/embedded_assets.hpp"
#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/text.hpp"

namespace previz::style {

namespace {

struct LevelRow {
  ResemblanceLevel level;
  std::string_view name;
  int skip_at_20;
  double strength;
  bool blend;
};

constexpr LevelRow kLevelTable[] = {
    {ResemblanceLevel::kStrict, "Strict", 5, 0.7, true},
    {ResemblanceLevel::kFaithful, "Faithful", 1, 0.7, true},
    {ResemblanceLevel::kFlexible, "Flexible", 0, 0.7, true},
    {ResemblanceLevel::kLoose, "Loose", 0, 0.3, false},
};

constexpr std::pair<StyleTag, std::string_view> kStyleNames[] = {
    {StyleTag::kAnime, "Anime"},         {StyleTag::kCartoon3D, "Cartoon3D"},
    {StyleTag::kPixelArt, "PixelArt"},   {StyleTag::kRealism, "Realism"},
    {StyleTag::kCinematic, "Cinematic"},
};

bool is_blank(std::string_view s) { return text::trim(s).empty(); }

std::string substitute(std::string_view pattern, std::string_view key, std::string_view value) {
  std::string out;
  const std::string needle = "{" + std::string(key) + "}";
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = pattern.find(needle, pos);
    if (hit == std::string_view::npos) break;
    out.append(pattern.substr(pos, hit - pos));
    out.append(value);
    pos = hit + needle.size();
  }
  out.append(pattern.substr(pos));
  return out;
}

std::string join_nonempty(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const auto& p : parts) {
    if (is_blank(p)) continue;
    if (!out.empty()) out.append(sep);
    out.append(p);
  }
  return out;
}

// Non-comment lines with their 1-based numbers, schema line checked.
std::vector<std::pair<int, std::vector<std::string>>> read_records(std::string_view body,
                                                                   std::string_view schema) {
  std::vector<std::pair<int, std::vector<std::string>>> out;
  bool seen_schema = false;
  int line_no = 0;
  for (auto raw : text::split_lines(body)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!seen_schema) {
      if (line != schema) {
        const auto slash = schema.find('/');
        if (line.substr(0, slash + 1) == schema.substr(0, slash + 1)) {
          fail(Errc::kSchemaVersionMismatch, "unsupported schema '" + std::string(line) + "'");
        }
        fail(Errc::kSchemaError, "expected header '" + std::string(schema) + "'");
      }
      seen_schema = true;
      continue;
    }
    out.emplace_back(line_no, text::tokenize(line));
  }
  if (!seen_schema) fail(Errc::kSchemaError, "missing header '" + std::string(schema) + "'");
  return out;
}

[[noreturn]] void bad_line(int line_no, const std::string& what) {
  fail(Errc::kSchemaError, "line " + std::to_string(line_no) + ": " + what);
}

StyleTag style_or_fail(int line_no, const std::string& name) {
  const auto tag = parse_style(name);
  if (!tag) bad_line(line_no, "unknown style '" + name + "'");
  return *tag;
}

LoraRef parse_lora(int line_no, const std::vector<std::string>& tok, std::size_t at) {
  if (tok.size() != at + 3 || tok[at] != "lora") bad_line(line_no, "expected lora <asset> <weight>");
  const auto w = text::parse_double(tok[at + 2]);
  if (!w || !(*w > 0 && *w <= 1)) bad_line(line_no, "lora weight must be in (0, 1]");
  if (tok[at + 1].empty()) bad_line(line_no, "empty lora asset");
  return {tok[at + 1], *w};
}

}  // namespace

std::string_view level_name(ResemblanceLevel level) {
  for (const auto& row : kLevelTable) {
    if (row.level == level) return row.name;
  }
  return "?";
}

std::optional<ResemblanceLevel> parse_level(std::string_view name) {
  for (const auto& row : kLevelTable) {
    if (row.name == name) return row.level;
  }
  return std::nullopt;
}

GuidanceParams resemblance_params(ResemblanceLevel level, int total_steps) {
  if (total_steps < 1) fail(Errc::kInvalidArgument, "total_steps must be at least 1");
  for (const auto& row : kLevelTable) {
    if (row.level != level) continue;
    GuidanceParams p;
    p.total_steps = total_steps;
    // Integer rounding, half away from zero: skip*total is exact.
    const long long num = static_cast<long long>(row.skip_at_20) * total_steps;
    long long skip = (2 * num + kReferenceSteps) / (2 * kReferenceSteps);
    p.skip_steps = static_cast<int>(std::min<long long>(skip, total_steps - 1));
    p.control_strength = row.strength;
    p.use_latent_blend = row.blend;
    return p;
  }
  fail(Errc::kInvalidArgument, "unknown resemblance level");
}

std::string_view style_name(StyleTag tag) {
  for (const auto& [t, n] : kStyleNames) {
    if (t == tag) return n;
  }
  return "?";
}

std::optional<StyleTag> parse_style(std::string_view name) {
  for (const auto& [t, n] : kStyleNames) {
    if (n == name) return t;
  }
  return std::nullopt;
}

PromptTemplate parse_prompt_template(std::string_view body) {
  PromptTemplate t;
  t.lexicon.clear();
  for (const auto& [line_no, tok] : read_records(body, kPromptSchema)) {
    const std::string& key = tok[0];
    if (key == "style") {
      if (tok.size() < 3) bad_line(line_no, "style needs a name and at least one term");
      const StyleTag tag = style_or_fail(line_no, tok[1]);
      if (t.lexicon.count(tag)) bad_line(line_no, "duplicate style '" + tok[1] + "'");
      t.lexicon[tag].assign(tok.begin() + 2, tok.end());
    } else if (key == "mood" || key == "genre" || key == "character" || key == "motion") {
      if (tok.size() != 2) bad_line(line_no, key + " takes one quoted pattern");
      (key == "mood"        ? t.mood_clause
       : key == "genre"     ? t.genre_clause
       : key == "character" ? t.character_clause
                            : t.motion_clause) = tok[1];
    } else if (key == "order") {
      static const std::set<std::string> kParts = {"style", "description", "mood", "genre"};
      t.order.assign(tok.begin() + 1, tok.end());
      std::set<std::string> seen;
      for (const auto& part : t.order) {
        if (!kParts.count(part)) bad_line(line_no, "unknown clause '" + part + "'");
        if (!seen.insert(part).second) bad_line(line_no, "clause '" + part + "' repeated");
      }
      if (!seen.count("description")) bad_line(line_no, "order must include description");
    } else {
      bad_line(line_no, "unknown directive '" + key + "'");
    }
  }
  for (const auto& [tag, name] : kStyleNames) {
    if (!t.lexicon.count(tag)) {
      fail(Errc::kSchemaError, "template has no lexicon for style " + std::string(name));
    }
  }
  return t;
}

const PromptTemplate& default_prompt_template() {
  static const PromptTemplate t = parse_prompt_template(assets::kDefaultPromptTemplate);
  return t;
}

PromptBundle compose_prompt(const PromptFields& fields, const PromptTemplate& tmpl,
                            LanguageModelClient* language_model) {
  if (is_blank(fields.background_description)) {
    fail(Errc::kMissingDescription, "background description is empty");
  }
  PromptBundle b;
  b.style_tag = fields.style;
  b.mood_tone = fields.mood_tone;
  b.genre = fields.genre;

  std::vector<std::string> parts;
  for (const auto& part : tmpl.order) {
    if (part == "style") {
      const auto it = tmpl.lexicon.find(fields.style);
      if (it != tmpl.lexicon.end()) parts.push_back(join_nonempty(it->second, ", "));
    } else if (part == "description") {
      parts.push_back(fields.background_description);
    } else if (part == "mood") {
      if (!is_blank(fields.mood_tone)) parts.push_back(substitute(tmpl.mood_clause, "mood", fields.mood_tone));
    } else if (part == "genre") {
      if (!is_blank(fields.genre)) parts.push_back(substitute(tmpl.genre_clause, "genre", fields.genre));
    }
  }
  b.background_prompt = join_nonempty(parts, ", ");

  for (const auto& c : fields.characters) {
    if (c.character_id.empty()) fail(Errc::kInvalidArgument, "character field without id");
    if (b.per_character.count(c.character_id)) {
      fail(Errc::kDuplicateId, "character '" + c.character_id + "' listed twice");
    }
    if (is_blank(c.description)) continue;
    b.per_character[c.character_id] = substitute(tmpl.character_clause, "identity", c.description);
  }
  if (fields.motion && !is_blank(*fields.motion)) {
    b.motion_prompt = substitute(tmpl.motion_clause, "motion", *fields.motion);
  }

  if (language_model) {
    auto expanded = language_model->expand(fields, b.background_prompt);
    if (expanded) {
      const std::string trimmed(text::trim(*expanded));
      if (!trimmed.empty() && trimmed.find(fields.background_description) != std::string::npos) {
        b.background_prompt = trimmed;
        b.from_language_model = true;
      }
    }
  }

  if (fields.seed) {
    b.seed = *fields.seed;
  } else {
    std::string key = b.background_prompt;
    for (const auto& [id, p] : b.per_character) key += "\n" + id + "=" + p;
    if (b.motion_prompt) key += "\nmotion=" + *b.motion_prompt;
    b.seed = fnv1a64(key);
  }
  return b;
}

const StyleEntry* StyleRegistry::find_style(StyleTag tag) const {
  for (const auto& s : styles) {
    if (s.tag == tag) return &s;
  }
  return nullptr;
}

const CharacterProfile* StyleRegistry::find_character(std::string_view id) const {
  for (const auto& c : characters) {
    if (c.character_id == id) return &c;
  }
  return nullptr;
}

StyleRegistry parse_style_registry(std::string_view body) {
  StyleRegistry r;
  for (const auto& [line_no, tok] : read_records(body, kStylesSchema)) {
    if (tok[0] == "style") {
      if (tok.size() < 3) bad_line(line_no, "style <name> prompt-only | lora <asset> <weight>");
      StyleEntry e;
      e.tag = style_or_fail(line_no, tok[1]);
      if (r.find_style(e.tag)) fail(Errc::kDuplicateId, "style '" + tok[1] + "' listed twice");
      if (tok[2] == "prompt-only") {
        if (tok.size() != 3) bad_line(line_no, "trailing tokens after prompt-only");
      } else {
        e.lora = parse_lora(line_no, tok, 2);
      }
      r.styles.push_back(std::move(e));
    } else if (tok[0] == "character") {
      if (tok.size() != 4 && tok.size() != 7) {
        bad_line(line_no, "character <id> <name> <identity> [lora <asset> <weight>]");
      }
      CharacterProfile c;
      c.character_id = tok[1];
      c.display_name = tok[2];
      c.identity_prompt = tok[3];
      if (c.character_id.empty()) bad_line(line_no, "empty character id");
      if (r.find_character(c.character_id)) {
        fail(Errc::kDuplicateId, "character '" + c.character_id + "' listed twice");
      }
      if (tok.size() == 7) c.lora = parse_lora(line_no, tok, 4);
      r.characters.push_back(std::move(c));
    } else {
      bad_line(line_no, "unknown directive '" + tok[0] + "'");
    }
  }
  return r;
}

std::string write_style_registry(const StyleRegistry& r) {
  std::string out(kStylesSchema);
  out += "\n";
  auto lora = [](const LoraRef& l) {
    return " lora " + text::quote(l.asset) + " " + text::format_double(l.weight);
  };
  for (const auto& s : r.styles) {
    out += "style " + std::string(style_name(s.tag));
    out += s.lora ? lora(*s.lora) : std::string(" prompt-only");
    out += "\n";
  }
  for (const auto& c : r.characters) {
    out += "character " + text::quote(c.character_id) + " " + text::quote(c.display_name) + " " +
           text::quote(c.identity_prompt);
    if (c.lora) out += lora(*c.lora);
    out += "\n";
  }
  return out;
}

const StyleRegistry& default_style_registry() {
  static const StyleRegistry r = parse_style_registry(assets::kDefaultStyleRegistry);
  return r;
}

RegionalConditioning assemble_regional(const raster::MaskSet& masks,
                                       std::span<const CharacterProfile> profiles,
                                       const PromptBundle& bundle, const RegionalOptions& options) {
  RegionalConditioning rc;
  std::vector<LoraRef> style_loras;
  if (options.style_lora) style_loras.push_back(*options.style_lora);

  for (const auto& m : masks.characters) {
    const auto it = std::find_if(profiles.begin(), profiles.end(),
                                 [&](const CharacterProfile& p) { return p.character_id == m.character; });
    if (it == profiles.end()) {
      fail(Errc::kUnmatchedMask, "mask for '" + m.character + "' has no character profile");
    }
    Region r;
    r.kind = RegionKind::kCharacter;
    r.character_id = m.character;
    const auto ref = options.mask_refs.find(m.character);
    r.mask_ref = ref != options.mask_refs.end() ? ref->second : "mask:" + m.character;
    std::vector<std::string> parts = {it->identity_prompt};
    const auto extra = bundle.per_character.find(m.character);
    if (extra != bundle.per_character.end() && extra->second != it->identity_prompt) {
      parts.push_back(extra->second);
    }
    r.prompt = join_nonempty(parts, ", ");
    if (r.prompt.empty()) r.prompt = it->display_name.empty() ? m.character : it->display_name;
    if (it->lora) r.loras.push_back(*it->lora);
    r.loras.insert(r.loras.end(), style_loras.begin(), style_loras.end());
    r.alpha = &m.alpha;
    rc.regions.push_back(std::move(r));
  }

  for (const auto& p : options.painted) {
    if (p.mask_ref.empty() || is_blank(p.prompt)) {
      fail(Errc::kInvalidArgument, "painted region needs a mask and a prompt");
    }
    Region r;
    r.kind = RegionKind::kPainted;
    r.mask_ref = p.mask_ref;
    r.prompt = p.prompt;
    r.loras = style_loras;
    rc.regions.push_back(std::move(r));
  }

  Region bg;
  bg.kind = RegionKind::kBackground;
  bg.mask_ref = options.background_mask_ref;
  bg.prompt = bundle.background_prompt;
  bg.loras = style_loras;
  bg.alpha = &masks.background;
  rc.regions.push_back(std::move(bg));
  return rc;
}

std::string_view video_mode_name(VideoGuidanceMode mode) {
  return mode == VideoGuidanceMode::kResemble ? "Resemble" : "Creative";
}

std::optional<VideoGuidanceMode> parse_video_mode(std::string_view name) {
  if (name == "Resemble") return VideoGuidanceMode::kResemble;
  if (name == "Creative") return VideoGuidanceMode::kCreative;
  return std::nullopt;
}

double video_guidance(VideoGuidanceMode mode, const VideoGuidanceConfig& config) {
  if (mode == VideoGuidanceMode::kResemble) return 1.0;
  if (!(config.creative_weight >= 0 && config.creative_weight <= 1)) {
    fail(Errc::kInvalidArgument, "creative weight must be in [0, 1]");
  }
  return config.creative_weight;
}

}  // namespace previz::style
