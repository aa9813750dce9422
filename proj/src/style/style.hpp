// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// Resemblance levels, prompt composition, the style/character registry and
// regional conditioning assembly.

#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "raster/raster.hpp"

namespace previz::style {

inline constexpr std::string_view kPromptSchema = "previz-prompt/1";
inline constexpr std::string_view kStylesSchema = "previz-styles/1";
inline constexpr int kReferenceSteps = 20;

enum class ResemblanceLevel { kStrict, kFaithful, kFlexible, kLoose };

std::string_view level_name(ResemblanceLevel level);
std::optional<ResemblanceLevel> parse_level(std::string_view name);
inline constexpr ResemblanceLevel kAllLevels[] = {ResemblanceLevel::kStrict, ResemblanceLevel::kFaithful,
                                                  ResemblanceLevel::kFlexible, ResemblanceLevel::kLoose};

struct GuidanceParams {
  int total_steps = kReferenceSteps;
  int skip_steps = 0;
  double control_strength = 0.7;
  bool use_latent_blend = true;

  friend bool operator==(const GuidanceParams&, const GuidanceParams&) = default;
};

// Skip counts are defined at 20 steps and scale as round(skip * total / 20),
// capped so at least one step runs.
GuidanceParams resemblance_params(ResemblanceLevel level, int total_steps = kReferenceSteps);

enum class StyleTag { kAnime, kCartoon3D, kPixelArt, kRealism, kCinematic };

std::string_view style_name(StyleTag tag);
std::optional<StyleTag> parse_style(std::string_view name);

struct CharacterField {
  std::string character_id;
  std::string description;
};

struct PromptFields {
  StyleTag style = StyleTag::kCinematic;
  std::string mood_tone;
  std::string genre;
  std::string background_description;
  std::vector<CharacterField> characters;
  std::optional<std::string> motion;  // video only
  std::optional<std::uint64_t> seed;  // derived from the text when absent
};

struct PromptBundle {
  std::string background_prompt;
  StyleTag style_tag = StyleTag::kCinematic;
  std::string mood_tone;
  std::string genre;
  std::map<std::string, std::string> per_character;
  std::optional<std::string> motion_prompt;
  std::uint64_t seed = 0;
  bool from_language_model = false;

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

// Parsed "previz-prompt/1" template.
struct PromptTemplate {
  std::map<StyleTag, std::vector<std::string>> lexicon;
  std::string mood_clause = "{mood} mood";
  std::string genre_clause = "{genre} film";
  std::string character_clause = "{identity}";
  std::string motion_clause = "{motion}";
  std::vector<std::string> order = {"style", "description", "mood", "genre"};
};

PromptTemplate parse_prompt_template(std::string_view text);
const PromptTemplate& default_prompt_template();

// Optional prompt expander. Returning nullopt selects the template path.
class LanguageModelClient {
 public:
  virtual ~LanguageModelClient() = default;
  virtual std::optional<std::string> expand(const PromptFields& fields,
                                            const std::string& template_prompt) = 0;
};

// POST <path> with {"schema":"previz-lm/1","fields":{...},"template_prompt":...};
// expects {"prompt": "..."}.
class HttpLanguageModelClient : public LanguageModelClient {
 public:
  HttpLanguageModelClient(std::string base_url, std::string path = "/v1/expand",
                          std::chrono::milliseconds timeout = std::chrono::seconds(10));
  std::optional<std::string> expand(const PromptFields& fields,
                                    const std::string& template_prompt) override;

 private:
  std::string base_url_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

std::string fields_to_json(const PromptFields& fields);

// Template expansion, optionally replaced by the language model. A model
// answer that drops the verbatim description is discarded.
PromptBundle compose_prompt(const PromptFields& fields,
                            const PromptTemplate& tmpl = default_prompt_template(),
                            LanguageModelClient* language_model = nullptr);

struct LoraRef {
  std::string asset;
  double weight = 1.0;  // (0, 1]

  friend bool operator==(const LoraRef&, const LoraRef&) = default;
};

struct StyleEntry {
  StyleTag tag = StyleTag::kCinematic;
  std::optional<LoraRef> lora;  // nullopt: prompt-only style

  friend bool operator==(const StyleEntry&, const StyleEntry&) = default;
};

struct CharacterProfile {
  std::string character_id;
  std::string display_name;
  std::string identity_prompt;
  std::optional<LoraRef> lora;

  friend bool operator==(const CharacterProfile&, const CharacterProfile&) = default;
};

struct StyleRegistry {
  std::vector<StyleEntry> styles;
  std::vector<CharacterProfile> characters;

  const StyleEntry* find_style(StyleTag tag) const;
  const CharacterProfile* find_character(std::string_view id) const;

  friend bool operator==(const StyleRegistry&, const StyleRegistry&) = default;
};

StyleRegistry parse_style_registry(std::string_view text);
std::string write_style_registry(const StyleRegistry& registry);
const StyleRegistry& default_style_registry();

enum class RegionKind { kCharacter, kPainted, kBackground };

struct Region {
  RegionKind kind = RegionKind::kBackground;
  std::string character_id;  // empty for background and painted regions
  std::string mask_ref;
  std::string prompt;
  std::vector<LoraRef> loras;
  const GrayImage* alpha = nullptr;  // borrowed from the MaskSet, may be null

  friend bool operator==(const Region& a, const Region& b) {
    return a.kind == b.kind && a.character_id == b.character_id && a.mask_ref == b.mask_ref &&
           a.prompt == b.prompt && a.loras == b.loras;
  }
};

struct RegionalConditioning {
  std::vector<Region> regions;  // characters, painted, then exactly one background

  const Region& background() const { return regions.back(); }
};

// Brush-authored region with its own local prompt.
struct PaintedRegion {
  std::string mask_ref;
  std::string prompt;
};

struct RegionalOptions {
  // Mask refs by character id; missing entries become "mask:<character>".
  std::map<std::string, std::string> mask_refs;
  std::string background_mask_ref = "mask:background";
  std::optional<LoraRef> style_lora;
  std::vector<PaintedRegion> painted;
};

RegionalConditioning assemble_regional(const raster::MaskSet& masks,
                                       std::span<const CharacterProfile> profiles,
                                       const PromptBundle& bundle,
                                       const RegionalOptions& options = {});

enum class VideoGuidanceMode { kResemble, kCreative };

std::string_view video_mode_name(VideoGuidanceMode mode);
std::optional<VideoGuidanceMode> parse_video_mode(std::string_view name);

struct VideoGuidanceConfig {
  double creative_weight = 0.35;
};

double video_guidance(VideoGuidanceMode mode, const VideoGuidanceConfig& config = {});

}  // namespace previz::style
