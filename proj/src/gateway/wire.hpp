// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

// nlohmann::json codecs for gateway and style types. Decoders throw
// Error(kInvalidRequest) on malformed input.

#pragma once

#include "gateway/gateway.hpp"
#include "json.hpp"

namespace previz::gateway::wire {

using nlohmann::json;

json encode(const AssetRef& r);
AssetRef decode_asset_ref(const json& j);

json encode(const style::PromptBundle& b);
style::PromptBundle decode_bundle(const json& j);

json encode(const style::GuidanceParams& g);
style::GuidanceParams decode_guidance(const json& j);

json encode(const style::LoraRef& l);
style::LoraRef decode_lora(const json& j);

json encode(const RegionSpec& r);
RegionSpec decode_region(const json& j);

json encode(const ImageJobRequest& r);
ImageJobRequest decode_image_request(const json& j);

json encode(const VideoJobRequest& r);
VideoJobRequest decode_video_request(const json& j);

json encode(const JobRecord& r);
JobRecord decode_job_record(const json& j);

std::string_view region_kind_name(style::RegionKind k);

}  // namespace previz::gateway::wire
