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

#include "thruwall/common/error.hpp"

namespace thruwall {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::invalid_material: return "invalid_material";
    case ErrorKind::domain: return "domain";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::empty_scene: return "empty_scene";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::refusal: return "refusal";
    case ErrorKind::length: return "length";
    case ErrorKind::design: return "design";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::io: return "io";
    case ErrorKind::checksum: return "checksum";
    case ErrorKind::format: return "format";
  }
  return "unknown";
}

}  // namespace thruwall
