/*
 * Copyright 2026 The thruwall Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <ostream>
#include <string_view>

#include <json.hpp>

namespace thruwall::io {

enum class LogLevel { debug, info, warn, error };

/// One JSON object per line: {"level", "event", ...fields}.
class JsonLog {
 public:
  explicit JsonLog(std::ostream& out, LogLevel threshold = LogLevel::info)
      : out_(out), threshold_(threshold) {}

  void emit(LogLevel level, std::string_view event, nlohmann::json fields = nlohmann::json::object());
  void info(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
    emit(LogLevel::info, event, std::move(fields));
  }
  void warn(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
    emit(LogLevel::warn, event, std::move(fields));
  }

 private:
  std::ostream& out_;
  LogLevel threshold_;
};

std::string_view to_string(LogLevel level) noexcept;

}  // namespace thruwall::io
