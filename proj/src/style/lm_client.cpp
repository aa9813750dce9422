// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include <future>
#include <memory>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "style/style.hpp"

namespace previz::style {

using nlohmann::json;

std::string fields_to_json(const PromptFields& f) {
  json chars = json::array();
  for (const auto& c : f.characters) {
    chars.push_back({{"character_id", c.character_id}, {"description", c.description}});
  }
  json j = {{"style", style_name(f.style)},
            {"mood_tone", f.mood_tone},
            {"genre", f.genre},
            {"background_description", f.background_description},
            {"characters", chars}};
  if (f.motion) j["motion"] = *f.motion;
  return j.dump();
}

HttpLanguageModelClient::HttpLanguageModelClient(std::string base_url, std::string path,
                                                 std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), path_(std::move(path)), timeout_(timeout) {}

std::optional<std::string> HttpLanguageModelClient::expand(const PromptFields& fields,
                                                           const std::string& template_prompt) {
  json req = {{"schema", "previz-lm/1"},
              {"fields", json::parse(fields_to_json(fields))},
              {"template_prompt", template_prompt}};
  const std::string body = req.dump();

  // The request runs on its own thread so the overall deadline holds even
  // when connect and read each stall close to their own limits.
  auto result = std::make_shared<std::promise<std::optional<std::string>>>();
  auto future = result->get_future();
  std::thread([result, body, url = base_url_, path = path_, timeout = timeout_] {
    std::optional<std::string> out;
    try {
      httplib::Client cli(url);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
      cli.set_connection_timeout(secs.count(), usecs.count());
      cli.set_read_timeout(secs.count(), usecs.count());
      cli.set_write_timeout(secs.count(), usecs.count());
      auto res = cli.Post(path, body, "application/json");
      if (res && res->status == 200) {
        const json j = json::parse(res->body);
        if (j.contains("prompt") && j["prompt"].is_string()) out = j["prompt"].get<std::string>();
      }
    } catch (...) {
    }
    result->set_value(std::move(out));
  }).detach();

  if (future.wait_for(timeout_) != std::future_status::ready) return std::nullopt;
  return future.get();
}

}  // namespace previz::style
